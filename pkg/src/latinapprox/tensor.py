"""The three-index measure tensor of a partition and its line-sum laws.

``w[i, j, k]`` is the Haar mass of pairs ``(x, y)`` with ``y`` in cell ``j``,
``x`` in cell ``k`` and ``x y^-1`` in cell ``i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .groups import CompactWindow, GroupModel
from .partitioning import Partition


class UnsupportedGeometry(ValueError):
    pass


class LawViolation(Exception):
    def __init__(self, report):
        self.report = report
        worst = report.violations[0] if report.violations else None
        super().__init__(f"line-sum law violated ({len(report.violations)} lines); first: {worst}")


@dataclass
class WTensor:
    n: int
    entries: np.ndarray
    mode: str  # "exact" | "montecarlo"
    window_measure: object
    mc_stddev: np.ndarray | None = None
    batch_entries: np.ndarray | None = None
    samples: int = 0
    seed: int | None = None

    @property
    def line_value(self):
        """The common line sum ``nu(C)^2 / n^2`` forced on complete lines."""
        if self.mode == "exact":
            return Fraction(self.window_measure) ** 2 / self.n ** 2
        return float(self.window_measure) ** 2 / self.n ** 2

    def support(self) -> set[tuple[int, int, int]]:
        return {tuple(int(v) for v in idx) for idx in zip(*np.nonzero(self.entries > 0))}

    def line_stddev(self):
        """Batch standard errors of the three line-sum matrices (Monte Carlo only)."""
        if self.batch_entries is None:
            z = np.zeros((self.n, self.n))
            return z, z.copy(), z.copy()
        b = self.batch_entries
        nb = b.shape[0]
        out = []
        for axis in (1, 2, 3):
            s = b.sum(axis=axis)
            out.append(s.std(axis=0, ddof=1) / math.sqrt(nb))
        return tuple(out)


@dataclass
class SupportSets:
    S: set = field(default_factory=set)    # (i, j) with P_i P_j inside C
    S1: set = field(default_factory=set)   # (i, k) with P_i^-1 P_k inside C
    S2: set = field(default_factory=set)   # (j, k) with P_k P_j^-1 inside C


# ---- exact computation -----------------------------------------------------

def interval_difference_mass(X, Y, Z) -> Fraction:
    """Lebesgue measure of ``{(x, y) in X x Y : x - y in Z}`` for intervals."""
    (xl, xh), (yl, yh), (zl, zh) = X, Y, Z
    if zh <= zl or xh <= xl or yh <= yl:
        return Fraction(0)

    def f(z):
        return max(Fraction(0), min(xh, yh + z) - max(xl, yl + z))

    pts = {zl, zh}
    for b in (xl - yh, xl - yl, xh - yh, xh - yl):
        if zl < b < zh:
            pts.add(b)
    pts = sorted(pts)
    # f is linear between breakpoints, so the trapezoid rule is exact
    return sum(((b - a) * (f(a) + f(b)) / 2 for a, b in zip(pts, pts[1:])), Fraction(0))


def circle_difference_mass(X, Y, Z) -> Fraction:
    """As above on the circle ``R/Z``: ``x - y`` taken modulo 1."""
    return sum((interval_difference_mass(X, Y, (Z[0] + s, Z[1] + s)) for s in (-1, 0)),
               Fraction(0))


def w_exact(p: Partition, model: GroupModel | None = None,
            window: CompactWindow | None = None) -> WTensor:
    """Exact rational tensor for torus, real-line and finite-group partitions."""
    model = model or p.model
    window = window or p.window
    n = p.n
    w = np.empty((n, n, n), dtype=object)
    if model.kind == "finite":
        order = model.order
        cell_of = {}
        for c in p.cells:
            if c.elements is None:
                raise UnsupportedGeometry("finite partitions need element cells")
            for x in c.elements:
                cell_of[x] = c.id
        counts = np.zeros((n, n, n), dtype=np.int64)
        for x in range(order):
            for y in range(order):
                z = model.mul((x,), model.inv((y,)))[0]
                counts[cell_of[z], cell_of[y], cell_of[x]] += 1
        for idx in product(range(n), repeat=3):
            w[idx] = Fraction(int(counts[idx]), order * order)
        return WTensor(n, w, "exact", window.measure())
    if model.kind not in ("torus", "real_line"):
        raise UnsupportedGeometry(f"no exact tensor for {model!r}; use w_montecarlo")
    if any(c.bounds is None for c in p.cells):
        raise UnsupportedGeometry("exact tensors need box cells")
    mass = circle_difference_mass if model.kind == "torus" else interval_difference_mass
    cache: dict = {}

    def axis_mass(X, Y, Z):
        key = (X, Y, Z)
        if key not in cache:
            cache[key] = mass(X, Y, Z)
        return cache[key]

    bounds = [c.bounds for c in p.cells]
    for i, j, k in product(range(n), repeat=3):
        val = Fraction(1)
        for a in range(len(bounds[0])):
            val *= axis_mass(bounds[k][a], bounds[j][a], bounds[i][a])
            if not val:
                break
        w[i, j, k] = val
    return WTensor(n, w, "exact", window.measure())


# ---- Monte Carlo -----------------------------------------------------------

def _cell_locator(p: Partition):
    """Vectorised point -> cell index (``-1`` outside the window)."""
    model = p.model
    if model.kind == "finite":
        lut = np.full(model.order, -1, dtype=np.int64)
        for c in p.cells:
            for x in c.elements:
                lut[x] = c.id
        return lambda z: lut[z[:, 0].astype(np.int64)]
    dim = len(p.cells[0].bounds)
    axes = []
    for a in range(dim):
        edges = sorted({c.bounds[a][0] for c in p.cells} | {c.bounds[a][1] for c in p.cells})
        axes.append(edges)
    shape = tuple(len(e) - 1 for e in axes)
    grid = np.full(shape, -1, dtype=np.int64)
    for c in p.cells:
        if any(lo == hi for lo, hi in c.bounds):
            continue  # empty cell, never hit
        idx = tuple(axes[a].index(c.bounds[a][0]) for a in range(dim))
        if any(axes[a][idx[a] + 1] != c.bounds[a][1] for a in range(dim)):
            raise UnsupportedGeometry("Monte Carlo needs a product-grid partition")
        grid[idx] = c.id
    fedges = [np.array([float(e) for e in ax]) for ax in axes]

    def locate(z):
        out_idx = []
        inside = np.ones(len(z), dtype=bool)
        for a in range(dim):
            pos = np.searchsorted(fedges[a], z[:, a], side="right") - 1
            inside &= (pos >= 0) & (pos < len(fedges[a]) - 1)
            out_idx.append(np.clip(pos, 0, len(fedges[a]) - 2))
        ids = grid[tuple(out_idx)]
        return np.where(inside, ids, -1)

    return locate


def w_montecarlo(p: Partition, model: GroupModel | None = None,
                 window: CompactWindow | None = None, samples: int = 10**6,
                 seed: int = 0, batches: int = 32) -> WTensor:
    """Stratified estimate: every cell pair ``(j, k)`` gets the same number of draws.

    Standard errors come from ``batches`` independent replicates.
    Deterministic for a fixed seed.
    """
    model = model or p.model
    window = window or p.window
    if samples < 10**4:
        raise ValueError("Monte Carlo needs at least 10^4 samples")
    n = p.n
    per = max(batches, (samples // (n * n)) // batches * batches)
    per_batch = per // batches
    rng = np.random.default_rng(seed)
    locate = _cell_locator(p)
    meas = [float(c.measure) for c in p.cells]
    batch_counts = np.zeros((batches, n, n, n))
    for j in range(n):
        for k in range(n):
            if meas[j] == 0 or meas[k] == 0:
                continue
            if model.kind == "finite":
                ej = np.array(p.cells[j].elements)
                ek = np.array(p.cells[k].elements)
                y = rng.choice(ej, size=per)[:, None].astype(float)
                x = rng.choice(ek, size=per)[:, None].astype(float)
            else:
                y = model.np_sample_box(rng, p.cells[j].bounds, per)
                x = model.np_sample_box(rng, p.cells[k].bounds, per)
            z = model.np_mul_inv(x, y)
            if model.kind == "torus":
                z[z >= 1.0] = 0.0
            ids = locate(z).reshape(batches, per_batch)
            for b in range(batches):
                row = ids[b]
                cnt = np.bincount(row[row >= 0], minlength=n)
                batch_counts[b, :, j, k] = cnt
    scale = np.array(meas)
    weight = scale[None, :, None] * scale[None, None, :] / per_batch
    batch_est = batch_counts * weight[None, :, :, :]
    entries = batch_est.mean(axis=0)
    stddev = batch_est.std(axis=0, ddof=1) / math.sqrt(batches)
    return WTensor(n, entries, "montecarlo", window.measure(), mc_stddev=stddev,
                   batch_entries=batch_est, samples=per * n * n, seed=seed)


# ---- line sums and support --------------------------------------------------

def line_sums(w: WTensor):
    """``(sum over i, sum over j, sum over k)`` as ``n x n`` matrices indexed
    ``[j, k]``, ``[i, k]`` and ``[i, j]``."""
    e = w.entries
    return e.sum(axis=0), e.sum(axis=1), e.sum(axis=2)


def _imul(a, b):
    ps = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    return (min(ps), max(ps))


def _inside(iv, C) -> bool:
    return iv[0] >= C[0] and iv[1] <= C[1]


def support_sets(p: Partition, model: GroupModel | None = None,
                 window: CompactWindow | None = None) -> SupportSets:
    """Pairs whose products stay in the window, by interval arithmetic.

    Containment that cannot be certified is treated as failure.
    """
    model = model or p.model
    window = window or p.window
    n = p.n
    pairs = {(a, b) for a in range(n) for b in range(n)}
    if window is None or window.whole_group:
        return SupportSets(set(pairs), set(pairs), set(pairs))
    B = [c.bounds for c in p.cells]
    C = window.bounds
    out = SupportSets()
    if model.kind == "real_line":
        for a, b in sorted(pairs):
            (la, ha), = B[a]
            (lb, hb), = B[b]
            if _inside((la + lb, ha + hb), C[0]):
                out.S.add((a, b))
            # P_a^-1 P_b and P_b P_a^-1 coincide on the line
            if _inside((lb - ha, hb - la), C[0]):
                out.S1.add((a, b))
                out.S2.add((a, b))
        return out
    if model.kind == "affine_line":
        for a, b in sorted(pairs):
            (A0, A1), (B0, B1) = B[a]
            (C0, C1), (D0, D1) = B[b]
            # P_a P_b: (a1 a2, a1 b2 + b1)
            pa = (A0 * C0, A1 * C1)
            t = _imul((A0, A1), (D0, D1))
            pb = (t[0] + B0, t[1] + B1)
            if _inside(pa, C[0]) and _inside(pb, C[1]):
                out.S.add((a, b))
            # P_a^-1 P_b: (a2 / a1, (b2 - b1) / a1)
            qa = (C0 / A1, C1 / A0)
            qb = _imul((1 / A1, 1 / A0), (D0 - B1, D1 - B0))
            if _inside(qa, C[0]) and _inside(qb, C[1]):
                out.S1.add((a, b))
        for j, k in sorted(pairs):
            (J0, J1), (K0, K1) = B[j]
            (L0, L1), (M0, M1) = B[k]
            # P_k P_j^-1: (ak / aj, bk - (ak / aj) bj)
            ra = (L0 / J1, L1 / J0)
            t = _imul(ra, (K0, K1))
            rb = (M0 - t[1], M1 - t[0])
            if _inside(ra, C[0]) and _inside(rb, C[1]):
                out.S2.add((j, k))
        return out
    raise UnsupportedGeometry(f"no interval arithmetic for {model!r} windows")


def _arc_overlap(a0, a1, b0, b1, modulus) -> Fraction:
    if modulus is None:
        return max(Fraction(0), min(a1, b1) - max(a0, b0))
    tot = Fraction(0)
    for s in range(-3, 3):
        tot += max(Fraction(0), min(a1, b1 + s) - max(a0, b0 + s))
    return tot


def product_meets(p: Partition, i: int, j: int, k: int) -> bool:
    """Whether ``P_i P_j`` meets ``P_k`` in a set of positive measure."""
    model = p.model
    if model.kind == "finite":
        ci, cj, ck = p.cells[i].elements, p.cells[j].elements, set(p.cells[k].elements)
        return any(model.mul((x,), (y,))[0] in ck for x in ci for y in cj)
    if model.kind not in ("torus", "real_line"):
        raise UnsupportedGeometry(f"no exact product geometry for {model!r}")
    mod = 1 if model.kind == "torus" else None
    for (li, hi), (lj, hj), (lk, hk) in zip(p.cells[i].bounds, p.cells[j].bounds, p.cells[k].bounds):
        if _arc_overlap(li + lj, hi + hj, lk, hk, mod) <= 0:
            return False
    return True


@dataclass
class LineLawReport:
    passed: bool
    line_value: object
    max_excess: object
    max_deficit_on_support: object
    violations: list
    support_ok: bool | None
    existential_ok: bool | None
    lines_checked: int


def verify_line_laws(w: WTensor, s: SupportSets, window_measure=None, mode: str | None = None,
                     partition: Partition | None = None, z: float = 4.0,
                     raise_on_violation: bool = True) -> LineLawReport:
    """Check every line sum is at most ``nu(C)^2 / n^2`` and equal to it on the
    support sets (k-lines on ``S``, j-lines on ``S1``, i-lines on ``S2``).

    Exact tensors must satisfy the laws exactly; Monte Carlo tensors within
    ``z`` standard errors. With a ``partition`` on exact geometry, every
    positive entry is also checked against ``P_i P_j`` meeting ``P_k``.
    """
    mode = mode or w.mode
    n = w.n
    if window_measure is None:
        window_measure = w.window_measure
    if mode == "exact":
        l = Fraction(window_measure) ** 2 / n ** 2
        tol = [np.zeros((n, n), dtype=object)] * 3
    else:
        l = float(window_measure) ** 2 / n ** 2
        se = w.line_stddev()
        tol = [z * x + 1e-12 * l for x in se]
    by_i, by_j, by_k = line_sums(w)
    checks = (("i", by_i, s.S2, tol[0]), ("j", by_j, s.S1, tol[1]), ("k", by_k, s.S, tol[2]))
    violations = []
    max_excess = 0
    max_deficit = 0
    count = 0
    for name, mat, required, tl in checks:
        for a in range(n):
            for b in range(n):
                count += 1
                v = mat[a, b]
                excess = v - l
                max_excess = max(max_excess, excess)
                if excess > tl[a, b]:
                    violations.append((name, (a, b), v, l, "exceeds"))
                elif (a, b) in required:
                    deficit = l - v
                    max_deficit = max(max_deficit, deficit)
                    if deficit > tl[a, b]:
                        violations.append((name, (a, b), v, l, "deficit"))
    support_ok = None
    existential_ok = None
    if mode == "exact":
        existential_ok = all(any(w.entries[i, j, k] > 0 for k in range(n)) for i, j in s.S)
        if not existential_ok:
            violations.append(("k", None, None, l, "S pair with empty line"))
        if partition is not None and partition.model.kind in ("torus", "real_line", "finite"):
            support_ok = all(product_meets(partition, *t) for t in sorted(w.support()))
            if not support_ok:
                violations.append(("support", None, None, None, "positive entry off P_i P_j"))
    report = LineLawReport(not violations, l, max_excess, max_deficit, violations,
                           support_ok, existential_ok, count)
    if violations and raise_on_violation:
        raise LawViolation(report)
    return report
