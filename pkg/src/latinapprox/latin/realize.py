"""Realizing amalgams as Latin squares by detachment.

An outline ``A[i, j, k]`` with group sizes ``p`` must satisfy
``sum_k A[i, j, k] = p_i p_j``, ``sum_j A[i, j, k] = p_i p_k`` and
``sum_i A[i, j, k] = p_j p_k``. Detachment splits one concrete row off a row
group at a time, handing it a floor-or-ceiling share of every block count
(an integral rounding of ``A[i] / remaining`` with exact margins, found by
max-flow). Columns are split the same way, and finally each symbol group's
cells form a regular bipartite graph whose edge colouring names the symbols.
"""
from __future__ import annotations

import numpy as np

from ..flow import bipartite_edge_coloring, round_matrix
from .amalgam import IntegerAmalgam
from .squares import EMPTY, GroupedPartition, LatinSquare, PartialLatinSquare, amalgamation, is_latin


class RealizationFailed(RuntimeError):
    pass


class PaddingInfeasible(ValueError):
    pass


def check_outline(A, sizes) -> None:
    A = np.asarray(A)
    p = np.asarray(sizes)
    n = len(p)
    if A.shape != (n, n, n):
        raise ValueError("outline shape does not match the group sizes")
    if (A < 0).any():
        raise ValueError("negative outline entry")
    outer = p[:, None] * p[None, :]
    if not (np.array_equal(A.sum(axis=2), outer) and np.array_equal(A.sum(axis=1), outer)
            and np.array_equal(A.sum(axis=0), outer)):
        raise ValueError("outline margins must be p_i p_j, p_i p_k and p_j p_k")


def realize_outline(A, sizes, seed: int | None = None, trace: list | None = None) -> np.ndarray:
    """Latin square of order ``sum(sizes)`` whose amalgamation under the
    contiguous grouping with these sizes is exactly ``A``.

    ``trace`` (a list) collects ``(phase, group, remaining, block, share)``
    for every split. ``seed`` permutes tie-breaking.
    """
    A = np.asarray(A, dtype=np.int64)
    check_outline(A, sizes)
    sizes = [int(s) for s in sizes]
    n = len(sizes)
    N = sum(sizes)
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    rng = np.random.default_rng(seed) if seed is not None else None

    # rows: rowX[r][j][k] = cells of row r in column group j with symbol group k
    rowX: list = [None] * N
    for i in range(n):
        C = A[i].tolist()
        for step in range(sizes[i]):
            rem = sizes[i] - step
            if rem == 1:
                X = C
            else:
                order = rng.permutation(n).tolist() if rng is not None else None
                try:
                    X = round_matrix(C, rem, sizes, sizes, order=order)
                except ValueError as exc:
                    raise RealizationFailed(f"row split stuck in group {i}, {rem} left") from exc
            if trace is not None:
                trace.append(("row", i, rem, [r[:] for r in C], [r[:] for r in X]))
            rowX[offs[i] + step] = X
            C = [[C[a][b] - X[a][b] for b in range(n)] for a in range(n)]

    # columns: label[r][c] = symbol group of cell (r, c)
    label = np.full((N, N), -1, dtype=np.int64)
    for j in range(n):
        Bm = [[rowX[r][j][k] for k in range(n)] for r in range(N)]
        for step in range(sizes[j]):
            rem = sizes[j] - step
            if rem == 1:
                Y = Bm
            else:
                order = rng.permutation(N).tolist() if rng is not None else None
                try:
                    Y = round_matrix(Bm, rem, [1] * N, sizes, order=order)
                except ValueError as exc:
                    raise RealizationFailed(f"column split stuck in group {j}, {rem} left") from exc
            if trace is not None:
                trace.append(("col", j, rem, [r[:] for r in Bm], [r[:] for r in Y]))
            c = offs[j] + step
            for r in range(N):
                ks = [k for k in range(n) if Y[r][k]]
                if len(ks) != 1 or Y[r][ks[0]] != 1:
                    raise RealizationFailed(f"cell ({r},{c}) got {Y[r]}")
                label[r, c] = ks[0]
            Bm = [[Bm[r][k] - Y[r][k] for k in range(n)] for r in range(N)]

    # symbols: colour each symbol group's regular bipartite graph
    table = np.full((N, N), -1, dtype=np.int64)
    for k in range(n):
        if sizes[k] == 0:
            continue
        cells = [(int(r), int(c)) for r, c in zip(*np.nonzero(label == k))]
        if rng is not None:
            cells = [cells[x] for x in rng.permutation(len(cells))]
        colours = bipartite_edge_coloring(cells, N, N, sizes[k])
        for (r, c), col in zip(cells, colours):
            table[r, c] = offs[k] + col
    if not is_latin(table):
        raise RealizationFailed("detachment produced a non-Latin table")
    g = GroupedPartition.from_sizes(sizes)
    if not np.array_equal(amalgamation(table, g), A):
        raise RealizationFailed("detachment changed the amalgamation")
    return table


def _as_amalgam(m) -> IntegerAmalgam:
    return m if isinstance(m, IntegerAmalgam) else IntegerAmalgam.from_entries(m)


def realize_amalgamation(m, seed: int | None = None, trace: list | None = None):
    """Latin square of order ``n t`` with groups of size ``t`` and amalgamation ``t m``.

    ``m`` is a compact amalgam (every line sums to ``t``). Returns
    ``(LatinSquare, GroupedPartition)``.
    """
    m = _as_amalgam(m)
    if not m.is_compact():
        raise ValueError("realize_amalgamation needs all line sums equal to t")
    if (m.entries < 0).any():
        raise ValueError("negative amalgam entry")
    sizes = [m.t] * m.n
    table = realize_outline(m.t * m.entries, sizes, seed=seed, trace=trace)
    return LatinSquare(table), GroupedPartition.equal(m.n, m.t)


def padded_outline(m: IntegerAmalgam):
    """Add one slack group so every line is complete.

    Real groups keep size ``t``; the slack group gets the smallest size ``T``
    that keeps all slack entries non-negative. Returns ``(A, sizes)``; ``T = 0``
    means no slack was needed.
    """
    n, t = m.n, m.t
    e = m.entries
    dK = t - e.sum(axis=2)  # [i, j]
    dJ = t - e.sum(axis=1)  # [i, k]
    dI = t - e.sum(axis=0)  # [j, k]
    if (dK < 0).any() or (dJ < 0).any() or (dI < 0).any():
        raise PaddingInfeasible("a line sum exceeds t")
    D = int(dK.sum())
    if D == 0:
        return t * e, [t] * n
    need = max(int(x.max()) for x in (dJ.sum(axis=1), dI.sum(axis=1), dJ.sum(axis=0)))
    T = max(need, 1)
    while T * T - n * t * T + t * D < 0:
        T += 1
        if T > n * t:
            raise PaddingInfeasible("no slack size balances the outline")
    A = np.zeros((n + 1,) * 3, dtype=np.int64)
    A[:n, :n, :n] = t * e
    A[:n, :n, n] = t * dK
    A[:n, n, :n] = t * dJ
    A[n, :n, :n] = t * dI
    A[:n, n, n] = t * T - t * dJ.sum(axis=1)
    A[n, :n, n] = t * T - t * dI.sum(axis=1)
    A[n, n, :n] = t * T - t * dJ.sum(axis=0)
    A[n, n, n] = T * T - n * t * T + t * D
    if (A < 0).any():
        raise PaddingInfeasible("negative slack entry")
    return A, [t] * n + [T]


def realize_partial(m: IntegerAmalgam, seed: int | None = None):
    """Partial Latin square of order ``n t`` whose filled cells cover every
    ``S`` block, realize every ``S'`` / ``S''`` equation, and whose grouped
    quotient lies in ``supp(m)``.

    Works by padding with a slack group, realizing the padded outline, and
    erasing every cell whose row, column or symbol is slack.
    """
    m.validate()
    A, sizes = padded_outline(m)
    table = realize_outline(A, sizes, seed=seed)
    N = m.n * m.t
    part = table[:N, :N].copy()
    part[part >= N] = EMPTY
    return PartialLatinSquare(part), GroupedPartition.equal(m.n, m.t)


def brute_force_realize(A, sizes, limit: int = 8):
    """Lexicographically least Latin square with amalgamation ``A``, by backtracking.

    Returns the table or ``None``; orders above ``limit`` are refused.
    """
    A = np.asarray(A, dtype=np.int64)
    check_outline(A, sizes)
    N = int(sum(sizes))
    if N > limit:
        raise ValueError(f"brute force limited to order {limit}")
    gof = GroupedPartition.from_sizes(sizes).group_of()
    rem = A.copy()
    table = np.full((N, N), -1, dtype=np.int64)
    row_used = np.zeros((N, N), dtype=bool)
    col_used = np.zeros((N, N), dtype=bool)

    def solve(pos):
        if pos == N * N:
            return True
        r, c = divmod(pos, N)
        gi, gj = gof[r], gof[c]
        for s in range(N):
            if row_used[r, s] or col_used[c, s]:
                continue
            gk = gof[s]
            if rem[gi, gj, gk] == 0:
                continue
            rem[gi, gj, gk] -= 1
            row_used[r, s] = col_used[c, s] = True
            table[r, c] = s
            if solve(pos + 1):
                return True
            rem[gi, gj, gk] += 1
            row_used[r, s] = col_used[c, s] = False
        table[r, c] = -1
        return False

    return table.copy() if solve(0) else None
