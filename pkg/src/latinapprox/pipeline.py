"""From a group model to a finite quasigroup with an approximate embedding.

The compact route partitions the whole group, builds the exact measure tensor,
rounds it to an integer amalgam and realizes that amalgam as a Latin square.
Each quasigroup element of group ``Q_i`` is sent to a distinct point of cell
``P_i``; the report measures how far ``alpha(q o q')`` lands from
``alpha(q) alpha(q')``.

The locally compact route does the same on a window ``C`` around a target
``B``, realizes only a partial square, and completes it by embedding.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .groups import CompactWindow, GroupModel, _frac
from .latin import (
    GroupedPartition,
    LatinSquare,
    PaddingInfeasible,
    RoundingInfeasible,
    complete_partial,
    gqq_of,
    loop_permutations,
    loopify,
    minimal_integral_t,
    realize_amalgamation,
    realize_partial,
    round_to_amalgam,
)
from .partitioning import Partition, lattice_partition, singleton_partition
from .tensor import (
    LineLawReport,
    UnsupportedGeometry,
    WTensor,
    product_meets,
    support_sets,
    verify_line_laws,
    w_exact,
    w_montecarlo,
)

MAX_T_DOUBLINGS = 6


@dataclass
class ApproxMap:
    square: LatinSquare
    groups: GroupedPartition
    alpha: list
    in_window: list
    partition: Partition

    def image(self, q: int):
        return self.alpha[q]


@dataclass
class ApproximationReport:
    kind: str
    n: int
    t: int
    order: int
    density_ok: bool
    max_product_error: float
    mean_product_error: float
    epsilon_bound: float
    pair_count: int
    cell_diameter: float
    gqq_in_support: bool | None = None
    gqq_products_meet: bool | None = None
    s_blocks_defined: bool | None = None
    partial_order: int | None = None
    unit: int | None = None
    unit_laws_hold: bool | None = None
    displacement: float | None = None
    line_laws: LineLawReport | None = field(default=None, repr=False)

    @property
    def within_bound(self) -> bool:
        return self.max_product_error <= self.epsilon_bound


@dataclass
class ProbeReport:
    kind: str
    n: int
    samples: int
    seed: int | None
    mode: str
    line_value: float
    median: float
    disparity: float
    stddev: float
    noise_floor: float
    lines_checked: int
    worst_line: tuple | None

    @property
    def obstruction(self) -> bool:
        """Disparity beyond the noise floor: the line laws visibly fail."""
        return self.disparity > self.noise_floor


# ---- helpers ---------------------------------------------------------------

def cell_diameter(p: Partition) -> Fraction:
    model = p.model
    if model.kind == "finite":
        return Fraction(0) if all(len(c.elements) == 1 for c in p.cells) else Fraction(1)
    widths = [hi - lo for c in p.cells for lo, hi in c.bounds]
    if model.kind == "torus":
        return max(min(w, Fraction(1, 2)) for w in widths)
    if model.kind == "real_line":
        return max(widths)
    raise UnsupportedGeometry(f"no diameter for {model!r} cells")


def _place(p: Partition, i: int, a: int, t: int):
    """The ``a``-th of ``t`` evenly spaced points inside cell ``i``."""
    cell = p.cells[i]
    if cell.elements is not None:
        if t != 1:
            raise ValueError("singleton cells hold one point; finite groups need t = 1")
        return (cell.elements[0],)
    (lo, hi), *rest = cell.bounds
    x0 = lo + (hi - lo) * Fraction(2 * a + 1, 2 * t)
    return (x0,) + tuple((l + h) / 2 for l, h in rest)


def _product_errors(model: GroupModel, table, alpha, indices):
    errs = []
    for q1 in indices:
        a1 = alpha[q1]
        row = table[q1]
        for q2 in indices:
            e = model.dist(alpha[int(row[q2])], model.mul(a1, alpha[q2]))
            errs.append(float(e))
    if not errs:
        return 0.0, 0.0, 0
    return max(errs), sum(errs) / len(errs), len(errs)


def _density(p: Partition, alpha, t: int, indices) -> bool:
    counts = [0] * p.n
    for q in indices:
        c = p.locate(alpha[q])
        if c is None:
            return False
        counts[c] += 1
    return all(c == t for c in counts)


def _round_with_retries(w: WTensor, s, t: int, mode: str, realize):
    last = None
    for _ in range(MAX_T_DOUBLINGS + 1):
        try:
            m = round_to_amalgam(w, s, t, mode=mode)
            return m, realize(m)
        except (RoundingInfeasible, PaddingInfeasible) as exc:
            last = exc
            t *= 2
    raise last


def _compact_partition(model: GroupModel, n_cells: int | None) -> Partition:
    if model.kind == "finite":
        if n_cells not in (None, model.order):
            raise ValueError(f"finite groups use singleton cells (n_cells = {model.order})")
        return singleton_partition(model)
    if model.kind != "torus":
        raise ValueError(f"{model!r} is not compact; use approximate_locally_compact")
    if n_cells is None:
        raise ValueError("n_cells is required for a torus")
    return lattice_partition(model, n_cells)


# ---- compact ---------------------------------------------------------------

def approximate_compact(model: GroupModel, n_cells: int | None = None, t_hint: int | None = None,
                        seed: int | None = None):
    """Finite quasigroup approximation of a compact group.

    ``n_cells`` is the number of cells per torus axis (ignored for finite
    groups, which use singleton cells). ``t_hint`` is the starting group size;
    by default the smallest ``t`` that makes the scaled tensor integral.
    """
    p = _compact_partition(model, n_cells)
    w = w_exact(p)
    s = support_sets(p)
    laws = verify_line_laws(w, s, partition=p)
    t = t_hint or minimal_integral_t(w)
    m, (sq, groups) = _round_with_retries(w, s, t, "compact", lambda m: realize_amalgamation(m, seed=seed))
    t = m.t
    alpha = [_place(p, i, a, t) for i in range(p.n) for a in range(t)]
    N = sq.order
    supp = w.support()
    gqq = gqq_of(sq, groups)
    mx, mean, count = _product_errors(model, sq.table, alpha, range(N))
    diam = cell_diameter(p)
    report = ApproximationReport(
        kind=model.kind, n=p.n, t=t, order=N,
        density_ok=_density(p, alpha, t, range(N)),
        max_product_error=mx, mean_product_error=mean,
        epsilon_bound=float(3 * diam), pair_count=count, cell_diameter=float(diam),
        gqq_in_support=gqq <= supp,
        gqq_products_meet=all(product_meets(p, *tr) for tr in sorted(gqq)),
        line_laws=laws,
    )
    return ApproxMap(sq, groups, alpha, [True] * N, p), report


def loop_approximate(model: GroupModel, n_cells: int | None = None, t_hint: int | None = None,
                     seed: int | None = None):
    """Compact approximation turned into a loop whose unit sits nearest the identity."""
    amap, base = approximate_compact(model, n_cells, t_hint, seed=seed)
    e = model.identity()
    dists = [model.dist(x, e) for x in amap.alpha]
    q0 = min(range(len(dists)), key=lambda q: (dists[q], q))
    a, b = loop_permutations(amap.square, q0)
    lp = loopify(amap.square, q0)
    N = lp.order
    ident = np.arange(N)
    unit_ok = bool(np.array_equal(lp.table[q0], ident) and np.array_equal(lp.table[:, q0], ident))
    disp = max(float(model.dist(amap.alpha[int(perm[x])], amap.alpha[x]))
               for perm in (a, b) for x in range(N))
    mx, mean, count = _product_errors(model, lp.table, amap.alpha, range(N))
    report = ApproximationReport(
        kind=base.kind, n=base.n, t=base.t, order=N, density_ok=base.density_ok,
        max_product_error=mx, mean_product_error=mean, epsilon_bound=base.epsilon_bound,
        pair_count=count, cell_diameter=base.cell_diameter,
        gqq_in_support=base.gqq_in_support, gqq_products_meet=base.gqq_products_meet,
        unit=q0, unit_laws_hold=unit_ok, displacement=disp, line_laws=base.line_laws,
    )
    return ApproxMap(lp, amap.groups, amap.alpha, amap.in_window, amap.partition), report


# ---- locally compact ---------------------------------------------------------

def window_around(model: GroupModel, B) -> CompactWindow:
    """Window ``C`` containing ``B B`` with half a ``B``-width of margin.

    For ``B = [-s, s]`` on the line this is ``C = [-3s, 3s]``.
    """
    if model.kind != "real_line":
        raise UnsupportedGeometry("windows are only inflated on the real line")
    if isinstance(B, CompactWindow):
        B = B.inner or B.bounds
    (lo, hi), = B
    lo, hi = _frac(lo), _frac(hi)
    width = hi - lo
    C = ((2 * lo - width / 2, 2 * hi + width / 2),)
    return CompactWindow(model, C, inner=((lo, hi),))


def approximate_locally_compact(model: GroupModel, B, n_cells: int, t_hint: int | None = None,
                                seed: int | None = None):
    """Approximation over a window of the real line.

    ``B`` is the target interval (a box ``((lo, hi),)`` or a window whose
    inner box is the target). Product errors are measured over pairs whose
    images both lie in ``B``.
    """
    if model.kind == "affine_line":
        raise UnsupportedGeometry("the affine group only supports the unimodularity probe")
    window = B if isinstance(B, CompactWindow) and B.bounds is not None and B.inner is not None \
        else window_around(model, B)
    p = lattice_partition(model, n_cells, window)
    w = w_exact(p)
    s = support_sets(p)
    laws = verify_line_laws(w, s, partition=p)
    t = t_hint or minimal_integral_t(w)
    m, (partial, groups) = _round_with_retries(w, s, t, "partial",
                                               lambda m: realize_partial(m, seed=seed))
    t = m.t
    N = partial.order
    filled = partial.filled
    s_ok = all(filled[i * t:(i + 1) * t, j * t:(j + 1) * t].all() for i, j in s.S)
    sq = complete_partial(partial)
    M = sq.order
    (c_lo, c_hi), = window.bounds
    alpha = [_place(p, i, a, t) for i in range(p.n) for a in range(t)]
    alpha += [(c_hi + 1 + q,) for q in range(M - N)]
    in_window = [q < N for q in range(M)]
    inner = [q for q in range(N) if window.contains_inner(alpha[q])]
    mx, mean, count = _product_errors(model, sq.table, alpha, inner)
    diam = cell_diameter(p)
    gqq = gqq_of(partial, groups)
    report = ApproximationReport(
        kind=model.kind, n=p.n, t=t, order=M,
        density_ok=_density(p, alpha, t, range(N)),
        max_product_error=mx, mean_product_error=mean,
        epsilon_bound=float(3 * diam), pair_count=count, cell_diameter=float(diam),
        gqq_in_support=gqq <= w.support(),
        gqq_products_meet=all(product_meets(p, *tr) for tr in sorted(gqq)),
        s_blocks_defined=s_ok, partial_order=N, line_laws=laws,
    )
    amap = ApproxMap(sq, GroupedPartition(groups.groups + [list(range(N, M))]) if M > N else groups,
                     alpha, in_window, p)
    return amap, report


# ---- unimodularity probe -----------------------------------------------------

DEFAULT_AFFINE_WINDOW = ((Fraction(1, 2), Fraction(2)), (Fraction(-1), Fraction(1)))


def _probe_partition(model: GroupModel, window, n_cells: int) -> Partition:
    if model.kind == "finite":
        return singleton_partition(model)
    if model.kind == "torus":
        return lattice_partition(model, n_cells)
    if model.kind == "affine_line":
        k = math.isqrt(n_cells)
        if k * k != n_cells:
            raise ValueError("affine probes need a square number of cells (k strips per axis)")
        if window is None:
            window = CompactWindow(model, DEFAULT_AFFINE_WINDOW)
        return lattice_partition(model, k, window)
    if model.kind == "real_line":
        if window is None:
            raise ValueError("real-line probes need a window")
        return lattice_partition(model, n_cells, window)
    raise ValueError(f"cannot probe {model!r}")


def unimodularity_probe(model: GroupModel, window: CompactWindow | None = None, n_cells: int = 9,
                        samples: int = 10**6, seed: int = 0) -> ProbeReport:
    """Largest relative spread of the line sums that unimodularity would force equal.

    Lines considered: k-lines on ``S``, j-lines on ``S'`` and i-lines on
    ``S''`` (every line when the window is the whole compact group). The
    spread is ``max |sum - median| / median``; the noise floor is four times
    the largest relative batch standard error among those lines. Finite
    groups use the exact tensor, so both are zero.
    """
    p = _probe_partition(model, window, n_cells)
    s = support_sets(p)
    exact = model.kind == "finite"
    w = w_exact(p) if exact else w_montecarlo(p, samples=samples, seed=seed)
    e = w.entries
    sums = (e.sum(axis=0), e.sum(axis=1), e.sum(axis=2))
    se = w.line_stddev()
    lines = []
    for name, mat, err, req in zip("ijk", sums, se, (s.S2, s.S1, s.S)):
        for a, b in sorted(req):
            lines.append((name, (a, b), float(mat[a, b]), float(err[a, b])))
    if not lines:
        raise ValueError("no complete lines to compare; enlarge the window or refine the partition")
    med = statistics.median(v for _, _, v, _ in lines)
    worst = max(lines, key=lambda x: abs(x[2] - med))
    disparity = abs(worst[2] - med) / med if med else 0.0
    rel_sd = max(x[3] for x in lines) / med if med else 0.0
    return ProbeReport(
        kind=model.kind, n=p.n, samples=0 if exact else w.samples, seed=None if exact else seed,
        mode=w.mode, line_value=float(w.line_value), median=med, disparity=disparity,
        stddev=rel_sd, noise_floor=4 * rel_sd, lines_checked=len(lines),
        worst_line=(worst[0], worst[1]),
    )


__all__ = [
    "ApproxMap", "ApproximationReport", "ProbeReport", "approximate_compact",
    "approximate_locally_compact", "cell_diameter", "loop_approximate", "unimodularity_probe",
    "window_around",
]
