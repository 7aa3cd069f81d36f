"""Max-flow and bipartite edge colouring.

Both are small and exact: capacities are Python ints, so rational problems
are scaled to a common denominator before they get here.
"""
from __future__ import annotations

from collections import deque


class FlowNetwork:
    """Dinic's algorithm on integer capacities.

    Edges are explored in insertion order, so results are deterministic.
    """

    def __init__(self, n_nodes: int):
        self.n = n_nodes
        self.adj: list[list[int]] = [[] for _ in range(n_nodes)]
        self.to: list[int] = []
        self.cap: list[int] = []
        self.orig: list[int] = []

    def add_edge(self, u: int, v: int, capacity: int) -> int:
        """Add ``u -> v`` and return the edge id (its flow is ``flow(eid)``)."""
        if capacity < 0:
            raise ValueError("negative capacity")
        eid = len(self.to)
        self.adj[u].append(eid)
        self.to.append(v)
        self.cap.append(capacity)
        self.orig.append(capacity)
        self.adj[v].append(eid + 1)
        self.to.append(u)
        self.cap.append(0)
        self.orig.append(0)
        return eid

    def flow(self, eid: int) -> int:
        return self.orig[eid] - self.cap[eid]

    def _bfs(self, s, t):
        level = [-1] * self.n
        level[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for e in self.adj[u]:
                if self.cap[e] > 0 and level[self.to[e]] < 0:
                    level[self.to[e]] = level[u] + 1
                    q.append(self.to[e])
        return level

    def max_flow(self, s: int, t: int) -> int:
        total = 0
        while True:
            level = self._bfs(s, t)
            if level[t] < 0:
                return total
            it = [0] * self.n
            while True:
                pushed = self._dfs(s, t, level, it)
                if not pushed:
                    break
                total += pushed

    def _dfs(self, s, t, level, it):
        # iterative augmenting-path search in the level graph
        stack = [s]
        path: list[int] = []
        while stack:
            u = stack[-1]
            if u == t:
                f = min(self.cap[e] for e in path)
                for e in path:
                    self.cap[e] -= f
                    self.cap[e ^ 1] += f
                return f
            advanced = False
            while it[u] < len(self.adj[u]):
                e = self.adj[u][it[u]]
                v = self.to[e]
                if self.cap[e] > 0 and level[v] == level[u] + 1:
                    stack.append(v)
                    path.append(e)
                    advanced = True
                    break
                it[u] += 1
            if not advanced:
                stack.pop()
                level[u] = -1
                if path:
                    path.pop()
                    it[stack[-1]] += 1
        return 0

    def reachable(self, s: int) -> set[int]:
        """Nodes reachable from ``s`` in the residual graph (source side of a min cut)."""
        seen = {s}
        q = deque([s])
        while q:
            u = q.popleft()
            for e in self.adj[u]:
                v = self.to[e]
                if self.cap[e] > 0 and v not in seen:
                    seen.add(v)
                    q.append(v)
        return seen


def round_matrix(numer, denom: int, row_sums, col_sums, order=None):
    """Round ``numer / denom`` entrywise to floor or ceil, hitting the given margins.

    The margins must be integral and equal to those of ``numer / denom``;
    flow integrality then guarantees a solution. ``order`` optionally permutes
    the rows to vary tie-breaking.
    """
    n_rows = len(numer)
    n_cols = len(numer[0]) if n_rows else 0
    base = [[x // denom for x in row] for row in numer]
    need_r = [row_sums[a] - sum(base[a]) for a in range(n_rows)]
    need_c = [col_sums[b] - sum(base[a][b] for a in range(n_rows)) for b in range(n_cols)]
    if any(x < 0 for x in need_r) or any(x < 0 for x in need_c) or sum(need_r) != sum(need_c):
        raise ValueError("margins inconsistent with the fractional matrix")
    if sum(need_r) == 0:
        return base
    src, snk = n_rows + n_cols, n_rows + n_cols + 1
    net = FlowNetwork(n_rows + n_cols + 2)
    rows = list(range(n_rows)) if order is None else list(order)
    for a in rows:
        if need_r[a]:
            net.add_edge(src, a, need_r[a])
    frac_edges = []
    for a in rows:
        for b in range(n_cols):
            if numer[a][b] % denom:
                frac_edges.append((a, b, net.add_edge(a, n_rows + b, 1)))
    for b in range(n_cols):
        if need_c[b]:
            net.add_edge(n_rows + b, snk, need_c[b])
    if net.max_flow(src, snk) != sum(need_r):
        raise ValueError("no consistent rounding exists")
    for a, b, eid in frac_edges:
        base[a][b] += net.flow(eid)
    return base


def bipartite_edge_coloring(edges, n_left: int, n_right: int, n_colors: int | None = None):
    """Proper edge colouring of a simple bipartite graph with ``max degree`` colours.

    König's theorem via alternating-path recolouring. ``edges`` is a list of
    ``(u, v)``; returns a list of colours aligned with it.
    """
    deg_l = [0] * n_left
    deg_r = [0] * n_right
    for u, v in edges:
        deg_l[u] += 1
        deg_r[v] += 1
    delta = max(deg_l + deg_r + [0])
    k = delta if n_colors is None else n_colors
    if k < delta:
        raise ValueError("fewer colours than the maximum degree")
    at_l = [[None] * k for _ in range(n_left)]   # at_l[u][c] = v
    at_r = [[None] * k for _ in range(n_right)]  # at_r[v][c] = u
    for u, v in edges:
        if u < 0 or v < 0:
            raise ValueError("bad vertex")
        if v in (x for x in at_l[u] if x is not None):
            raise ValueError("parallel edge in a simple graph")
        a = at_l[u].index(None)
        b = at_r[v].index(None)
        if at_r[v][a] is not None:
            # flip the a/b alternating path that starts at v
            path = []
            side, node, c = "r", v, a
            while True:
                nxt = at_r[node][c] if side == "r" else at_l[node][c]
                if nxt is None:
                    break
                path.append((side, node, nxt, c))
                side = "l" if side == "r" else "r"
                node = nxt
                c = b if c == a else a
            for side_, x, y, c in path:
                if side_ == "r":
                    at_r[x][c] = None
                    at_l[y][c] = None
                else:
                    at_l[x][c] = None
                    at_r[y][c] = None
            for side_, x, y, c in path:
                c2 = b if c == a else a
                if side_ == "r":
                    at_r[x][c2] = y
                    at_l[y][c2] = x
                else:
                    at_l[x][c2] = y
                    at_r[y][c2] = x
        at_l[u][a] = v
        at_r[v][a] = u
    colour_of = {}
    for u in range(n_left):
        for c, v in enumerate(at_l[u]):
            if v is not None:
                colour_of[(u, v)] = c
    return [colour_of[(u, v)] for u, v in edges]
