"""Embedding a partial Latin square of order N into a Latin square of order 2N."""
from __future__ import annotations

import numpy as np

from ..flow import bipartite_edge_coloring
from .squares import EMPTY, LatinSquare, NotLatin, PartialLatinSquare, is_partial_latin


def complete_partial(p) -> LatinSquare:
    """Latin square of order ``2N`` agreeing with ``p`` on every filled cell.

    Three edge colourings, each of a bipartite graph whose maximum degree
    is at most ``N``:

    1. empty cells of the top-left block (rows x columns) get the new symbols
       ``N + colour``, so every top row now holds ``N`` distinct symbols;
    2. each top row's ``N`` missing symbols are spread over the right-hand
       columns by colouring rows x missing symbols;
    3. the top half now uses every symbol exactly ``N`` times, so columns x
       missing symbols is ``N``-regular and its colouring fills the bottom rows.
    """
    table = p.table if isinstance(p, PartialLatinSquare) else np.asarray(p, dtype=np.int64)
    if not is_partial_latin(table):
        raise NotLatin("input is not a partial Latin square")
    N = table.shape[0]
    M = 2 * N
    out = np.full((M, M), EMPTY, dtype=np.int64)
    out[:N, :N] = table
    if N == 0:
        return LatinSquare(out)

    holes = [(int(r), int(c)) for r, c in zip(*np.nonzero(table == EMPTY))]
    if holes:
        for (r, c), col in zip(holes, bipartite_edge_coloring(holes, N, N, N)):
            out[r, c] = N + col

    missing = []
    for r in range(N):
        have = set(out[r, :N].tolist())
        missing += [(r, s) for s in range(M) if s not in have]
    for (r, s), col in zip(missing, bipartite_edge_coloring(missing, N, M, N)):
        out[r, N + col] = s

    missing = []
    for c in range(M):
        have = set(out[:N, c].tolist())
        missing += [(c, s) for s in range(M) if s not in have]
    for (c, s), col in zip(missing, bipartite_edge_coloring(missing, M, M, N)):
        out[N + col, c] = s

    return LatinSquare(out)
