"""Latin squares, partial Latin squares and grouped partitions of their index set."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EMPTY = -1


class NotLatin(ValueError):
    pass


def is_latin(table) -> bool:
    t = np.asarray(table)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        return False
    n = t.shape[0]
    want = np.arange(n)
    return all(np.array_equal(np.sort(t[r]), want) for r in range(n)) and \
        all(np.array_equal(np.sort(t[:, c]), want) for c in range(n))


def is_partial_latin(table) -> bool:
    t = np.asarray(table)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        return False
    n = t.shape[0]
    if ((t < EMPTY) | (t >= n)).any():
        return False
    for line in list(t) + list(t.T):
        vals = line[line != EMPTY]
        if len(vals) != len(set(vals.tolist())):
            return False
    return True


class LatinSquare:
    """Multiplication table of a finite quasigroup: ``table[r][c] = r o c``."""

    def __init__(self, table):
        t = np.array(table, dtype=np.int64)
        if not is_latin(t):
            raise NotLatin("rows and columns must be permutations of 0..N-1")
        self.table = t

    @property
    def order(self) -> int:
        return self.table.shape[0]

    def op(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def __eq__(self, other):
        return isinstance(other, LatinSquare) and np.array_equal(self.table, other.table)

    def __repr__(self):
        return f"LatinSquare(order={self.order})"

    def is_loop(self, unit: int) -> bool:
        idx = np.arange(self.order)
        return bool(np.array_equal(self.table[unit], idx) and np.array_equal(self.table[:, unit], idx))


class PartialLatinSquare:
    """Partial quasigroup table; ``EMPTY`` (-1) marks cells outside the domain."""

    def __init__(self, table):
        t = np.array(table, dtype=np.int64)
        if not is_partial_latin(t):
            raise NotLatin("symbols repeat in a row or column, or are out of range")
        self.table = t

    @property
    def order(self) -> int:
        return self.table.shape[0]

    @property
    def filled(self) -> np.ndarray:
        return self.table != EMPTY

    def domain(self) -> set[tuple[int, int]]:
        return {(int(r), int(c)) for r, c in zip(*np.nonzero(self.filled))}

    def __repr__(self):
        return f"PartialLatinSquare(order={self.order}, filled={int(self.filled.sum())})"


@dataclass
class GroupedPartition:
    """Equivalence classes ``Q_1..Q_n`` of the quasigroup's elements."""

    groups: list[list[int]]

    @classmethod
    def equal(cls, n: int, t: int) -> "GroupedPartition":
        return cls([list(range(i * t, (i + 1) * t)) for i in range(n)])

    @classmethod
    def from_sizes(cls, sizes) -> "GroupedPartition":
        groups, o = [], 0
        for s in sizes:
            groups.append(list(range(o, o + s)))
            o += s
        return cls(groups)

    @property
    def n(self) -> int:
        return len(self.groups)

    @property
    def order(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def sizes(self) -> list[int]:
        return [len(g) for g in self.groups]

    def group_of(self) -> np.ndarray:
        out = np.full(self.order, -1, dtype=np.int64)
        for i, g in enumerate(self.groups):
            out[g] = i
        if (out < 0).any():
            raise ValueError("groups do not cover 0..N-1")
        return out

    def validate(self) -> None:
        flat = sorted(x for g in self.groups for x in g)
        if flat != list(range(len(flat))):
            raise ValueError("groups must partition 0..N-1")


def _table_of(sq):
    return sq.table if hasattr(sq, "table") else np.asarray(sq)


def amalgamation(sq, g: GroupedPartition) -> np.ndarray:
    """Block counts ``A[i, j, k] = #{(r, c) : r in Q_i, c in Q_j, sq[r][c] in Q_k}``."""
    t = _table_of(sq)
    gof = g.group_of()
    n = g.n
    A = np.zeros((n, n, n), dtype=np.int64)
    rows, cols = np.nonzero(t != EMPTY)
    np.add.at(A, (gof[rows], gof[cols], gof[t[rows, cols]]), 1)
    return A


def gqq_of(sq, g: GroupedPartition) -> set[tuple[int, int, int]]:
    """Triples ``(i, j, k)`` such that some ``q in Q_i``, ``q' in Q_j`` has ``q o q' in Q_k``."""
    A = amalgamation(sq, g)
    return {tuple(int(v) for v in idx) for idx in zip(*np.nonzero(A))}


def loop_permutations(sq: LatinSquare, q0: int):
    """Permutations ``a``, ``b`` with ``q0 o a(x) = x`` and ``b(x) o a(q0) = x``."""
    t = sq.table
    N = sq.order
    a = np.empty(N, dtype=np.int64)
    a[t[q0]] = np.arange(N)
    col = t[:, a[q0]]
    b = np.empty(N, dtype=np.int64)
    b[col] = np.arange(N)
    return a, b


def loopify(sq: LatinSquare, q0: int) -> LatinSquare:
    """Isotope ``x * y = b(x) o a(y)``, a loop with unit ``q0``."""
    if not 0 <= q0 < sq.order:
        raise ValueError("q0 out of range")
    a, b = loop_permutations(sq, q0)
    return LatinSquare(sq.table[np.ix_(b, a)])


def random_latin_square(order: int, rng: np.random.Generator) -> LatinSquare:
    """Random Latin square built row by row from randomised perfect matchings.

    Not uniform, but reaches squares of every isotopy class with positive probability.
    """
    table = np.full((order, order), EMPTY, dtype=np.int64)
    for r in range(order):
        used = [set(table[:r, c].tolist()) for c in range(order)]
        allowed = []
        for c in range(order):
            opts = [s for s in range(order) if s not in used[c]]
            rng.shuffle(opts)
            allowed.append(opts)
        match_sym: dict = {}

        def augment(c, seen):
            for s in allowed[c]:
                if s in seen:
                    continue
                seen.add(s)
                if s not in match_sym or augment(match_sym[s], seen):
                    match_sym[s] = c
                    return True
            return False

        for c in rng.permutation(order).tolist():
            if not augment(c, set()):
                raise RuntimeError("Latin rectangle failed to extend")
        for s, c in match_sym.items():
            table[r, c] = s
    return LatinSquare(table)
