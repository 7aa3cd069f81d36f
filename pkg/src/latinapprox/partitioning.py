"""Equisize, U-fine partitions of a compact window.

Two routes: exact lattice boxes, and a Rado-style allocator that splits an
atomized window among the translates ``h U`` of a cover by max-flow.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .flow import FlowNetwork
from .groups import CompactWindow, FiniteGroup, GroupModel, NeighborhoodSpec, circle_distance


class PartitionError(Exception):
    pass


class CoverInfeasible(PartitionError):
    pass


class HallViolation(PartitionError):
    """The Rado condition fails; ``subset`` witnesses ``mu(union) < sum(eps)``."""

    def __init__(self, subset, union_measure, target_sum):
        self.subset = tuple(subset)
        self.union_measure = union_measure
        self.target_sum = target_sum
        super().__init__(f"Hall condition violated on I={list(self.subset)}: "
                         f"mu(union S_i) = {union_measure} < {target_sum}")


class AtomTooCoarse(PartitionError):
    pass


@dataclass
class Cell:
    id: int
    measure: Fraction
    representative: tuple
    witness: tuple
    bounds: tuple | None = None
    elements: tuple | None = None
    atom_ids: tuple | None = None


@dataclass
class Partition:
    model: GroupModel
    window: CompactWindow
    cells: list[Cell]

    @property
    def n(self) -> int:
        return len(self.cells)

    @property
    def representatives(self):
        return [c.representative for c in self.cells]

    @property
    def cell_measure(self) -> Fraction:
        """Common cell measure (the window measure over ``n``)."""
        return Fraction(self.window_measure) / self.n

    @property
    def window_measure(self):
        if all(c.bounds is not None for c in self.cells) or all(c.elements is not None for c in self.cells):
            return self.window.measure()
        return sum(c.measure for c in self.cells)

    def locate(self, g) -> int | None:
        """Index of the cell containing ``g`` (box and finite partitions)."""
        for c in self.cells:
            if c.elements is not None and g[0] in c.elements:
                return c.id
            if c.bounds is not None and all(lo <= x < hi for x, (lo, hi) in zip(g, c.bounds)):
                return c.id
        return None


# ---- geometry helpers -----------------------------------------------------

def _interval_sup_circle(c: Fraction, lo: Fraction, hi: Fraction) -> Fraction:
    if hi - lo >= 1:
        return Fraction(1, 2)
    anti = (c + Fraction(1, 2)) % 1
    # antipode inside [lo, hi] modulo 1
    if (anti - lo) % 1 <= hi - lo:
        return Fraction(1, 2)
    return max(circle_distance(c, lo), circle_distance(c, hi))


def box_sup_dist(model: GroupModel, g, box) -> Fraction | float:
    """Supremum of ``dist(g, x)`` over the closed box."""
    if model.kind == "torus":
        return max(_interval_sup_circle(c, lo, hi) for c, (lo, hi) in zip(g, box))
    if model.kind == "real_line":
        (lo, hi), = box
        return max(abs(g[0] - lo), abs(g[0] - hi))
    if model.kind == "affine_line":
        # the half-plane distance from a point is convex in each coordinate
        return max(model.dist(g, (a, b)) for a, b in product(*box))
    raise ValueError(f"no box geometry for {model!r}")


def box_center(model: GroupModel, box) -> tuple:
    return tuple((lo + hi) / 2 for lo, hi in box)


def _cell_fits(model: GroupModel, cell: Cell, U: NeighborhoodSpec) -> bool:
    if cell.elements is not None:
        return all(model.dist(cell.witness, (x,)) <= U.radius for x in cell.elements)
    if cell.bounds is not None:
        return box_sup_dist(model, cell.witness, cell.bounds) <= U.radius
    raise ValueError("atom cells need the atomized space to check fineness")


# ---- lattice partitions ---------------------------------------------------

def _axis_edges(lo: Fraction, hi: Fraction, k: int) -> list[Fraction]:
    return [lo + (hi - lo) * Fraction(m, k) for m in range(k + 1)]


def _affine_a_edges(a0: Fraction, a1: Fraction, k: int) -> list[Fraction]:
    # equal steps in 1/a give equal left Haar mass per strip
    u0, u1 = 1 / a0, 1 / a1
    return [1 / (u0 - (u0 - u1) * Fraction(m, k)) for m in range(k + 1)]


def lattice_partition(model: GroupModel, n_per_axis: int,
                      window: CompactWindow | None = None) -> Partition:
    """Split the window into ``n_per_axis ** dim`` equal-measure half-open boxes.

    Torus windows default to the whole group. Cells are numbered row-major,
    axis 0 slowest. Affine windows are cut into strips of equal left Haar mass.
    """
    if n_per_axis < 1:
        raise ValueError("n_per_axis must be >= 1")
    if model.kind == "finite":
        raise ValueError("finite groups use singleton_partition")
    window = window or CompactWindow(model)
    box = window.box()
    if model.kind == "affine_line":
        edges = [_affine_a_edges(*box[0], n_per_axis), _axis_edges(*box[1], n_per_axis)]
    else:
        edges = [_axis_edges(lo, hi, n_per_axis) for lo, hi in box]
    cells = []
    for idx in product(range(n_per_axis), repeat=len(box)):
        b = tuple((edges[a][m], edges[a][m + 1]) for a, m in enumerate(idx))
        centre = box_center(model, b)
        cells.append(Cell(id=len(cells), measure=model.box_measure(b),
                          representative=centre, witness=centre, bounds=b))
    return Partition(model, window, cells)


def singleton_partition(model: FiniteGroup) -> Partition:
    cells = [Cell(id=x, measure=Fraction(1, model.order), representative=(x,),
                  witness=(x,), elements=(x,)) for x in range(model.order)]
    return Partition(model, CompactWindow(model), cells)


# ---- atomized spaces ------------------------------------------------------

@dataclass
class AtomizedSpace:
    """A finite stand-in for a non-atomic measure space."""

    model: GroupModel
    points: list[tuple]
    weights: list[Fraction]
    boxes: list[tuple | None]
    resolution: Fraction

    @property
    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    @property
    def max_weight(self) -> Fraction:
        return max(self.weights)

    def __len__(self):
        return len(self.weights)


def atomize(model: GroupModel, window: CompactWindow, resolution) -> AtomizedSpace:
    """Grid the window into boxes no wider than ``resolution`` per axis."""
    resolution = Fraction(resolution)
    if model.kind == "finite":
        pts = [(x,) for x in range(model.order)]
        return AtomizedSpace(model, pts, [Fraction(1, model.order)] * model.order,
                             [None] * model.order, Fraction(0))
    box = window.box()
    ks = [max(1, math.ceil((hi - lo) / resolution)) for lo, hi in box]
    edges = [_axis_edges(lo, hi, k) for (lo, hi), k in zip(box, ks)]
    pts, wts, boxes = [], [], []
    for idx in product(*(range(k) for k in ks)):
        b = tuple((edges[a][m], edges[a][m + 1]) for a, m in enumerate(idx))
        pts.append(box_center(model, b))
        wts.append(model.box_measure(b))
        boxes.append(b)
    return AtomizedSpace(model, pts, wts, boxes, resolution)


@dataclass
class RadoInstance:
    cover_sets: list[list[int]]
    targets: list[Fraction]
    centers: list[tuple] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.cover_sets)


def union_measure(space: AtomizedSpace, inst: RadoInstance, subset) -> Fraction:
    atoms = set()
    for i in subset:
        atoms.update(inst.cover_sets[i])
    return sum((space.weights[a] for a in atoms), Fraction(0))


def hall_holds(space: AtomizedSpace, inst: RadoInstance, subset) -> bool:
    return union_measure(space, inst, subset) >= sum((inst.targets[i] for i in subset), Fraction(0))


def _lattice_centres(model, window, radius):
    box = window.box()
    centre = box_center(model, box)
    if box_sup_dist(model, centre, box) <= radius:
        return [centre]
    axes = []
    for lo, hi in box:
        k = math.ceil((hi - lo) / radius)
        if model.kind == "torus" and window.whole_group:
            axes.append([lo + (hi - lo) * Fraction(m, k) for m in range(k)])
        else:
            axes.append([lo + (hi - lo) * Fraction(2 * m + 1, 2 * k) for m in range(k)])
    return [tuple(p) for p in product(*axes)]


def build_cover(model: GroupModel, window: CompactWindow, U: NeighborhoodSpec,
                resolution=None, spot_checks: int = 256, seed: int = 0):
    """Greedy lattice cover ``H`` with ``H U`` covering the window, plus its Rado instance.

    Lattice spacing equals the radius of ``U``. Returns ``(H, instance, space)``.
    Raises ``CoverInfeasible`` if an atom is uncovered or a checked subset
    breaks the Hall condition.
    """
    if model.kind in ("finite", "affine_line"):
        raise ValueError("lattice covers are built for torus and real-line windows")
    if resolution is None:
        resolution = U.radius / 16
    resolution = Fraction(resolution)
    if resolution >= U.radius:
        raise CoverInfeasible("resolution must be finer than the neighbourhood radius")
    space = atomize(model, window, resolution)
    H = _lattice_centres(model, window, U.radius)
    sets = [[a for a, b in enumerate(space.boxes) if box_sup_dist(model, h, b) <= U.radius]
            for h in H]
    covered = set().union(*map(set, sets))
    if len(covered) != len(space):
        raise CoverInfeasible(f"{len(space) - len(covered)} atoms not covered at resolution {resolution}")
    eps = space.total / len(H)
    inst = RadoInstance(sets, [eps] * len(H), list(H))
    checks = [[i] for i in range(len(H))] + [list(range(len(H)))]
    rng = random.Random(seed)
    for _ in range(spot_checks if len(H) > 2 else 0):
        k = rng.randint(2, len(H) - 1)
        checks.append(sorted(rng.sample(range(len(H)), k)))
    for sub in checks:
        if not hall_holds(space, inst, sub):
            raise CoverInfeasible(f"Hall condition fails on {sub}; refine resolution or enlarge window")
    return H, inst, space


# ---- Rado allocation -------------------------------------------------------

def _common_denominator(values) -> int:
    d = 1
    for v in values:
        d = d * v.denominator // math.gcd(d, v.denominator)
    return d


def _find_cycle(adj):
    """Return a cycle in an undirected simple graph as a node list, or None."""
    colour = {}
    parent = {}
    for root in sorted(adj):
        if root in colour:
            continue
        stack = [(root, iter(sorted(adj[root])))]
        colour[root] = 1
        parent[root] = None
        while stack:
            u, it = stack[-1]
            for v in it:
                if v == parent[u]:
                    continue
                if v in colour:
                    # back edge u -> v closes a cycle
                    cyc = [u]
                    x = u
                    while x != v:
                        x = parent[x]
                        cyc.append(x)
                    return cyc
                colour[v] = 1
                parent[v] = u
                stack.append((v, iter(sorted(adj[v]))))
                break
            else:
                stack.pop()
    return None


def rado_allocate(space: AtomizedSpace, inst: RadoInstance) -> Partition:
    """Partition the atoms into ``P_i`` with ``P_i`` inside ``S_i`` and ``mu(P_i)`` near ``eps_i``.

    A max-flow (source -> set ``i`` with capacity ``eps_i``, set -> its atoms,
    atom -> sink with capacity = weight) gives a fractional split; cycle
    cancelling reduces the split atoms to a forest, which is rounded so that
    every set misses its target by less than the largest atom weight.
    """
    n, m = inst.n, len(space)
    total = space.total
    if sum(inst.targets, Fraction(0)) != total:
        raise ValueError("targets must sum to the total measure")
    if any(e <= 0 for e in inst.targets):
        raise ValueError("targets must be positive")
    D = _common_denominator(list(space.weights) + list(inst.targets))
    W = [int(w * D) for w in space.weights]
    E = [int(e * D) for e in inst.targets]
    big = sum(W) + 1

    src, snk = n + m, n + m + 1
    net = FlowNetwork(n + m + 2)
    for i in range(n):
        net.add_edge(src, i, E[i])
    edge_ids = {}
    for i, S in enumerate(inst.cover_sets):
        for a in sorted(set(S)):
            edge_ids[(i, a)] = net.add_edge(i, n + a, big)
    for a in range(m):
        net.add_edge(n + a, snk, W[a])
    value = net.max_flow(src, snk)
    if value < sum(W):
        side = net.reachable(src)
        I = [i for i in range(n) if i in side]
        raise HallViolation(I, union_measure(space, inst, I),
                            sum((inst.targets[i] for i in I), Fraction(0)))

    f = {key: net.flow(eid) for key, eid in edge_ids.items() if net.flow(eid) > 0}
    owner: dict[int, int] = {}
    frac_adj: dict[tuple, set] = {}
    for (i, a), x in f.items():
        if x == W[a]:
            owner[a] = i
        else:
            frac_adj.setdefault(("s", i), set()).add(("a", a))
            frac_adj.setdefault(("a", a), set()).add(("s", i))

    def fl(u, v):
        i, a = (u[1], v[1]) if u[0] == "s" else (v[1], u[1])
        return (i, a)

    # cancel cycles so the split atoms form a forest
    while True:
        cyc = _find_cycle(frac_adj)
        if cyc is None:
            break
        edges = [fl(cyc[k], cyc[(k + 1) % len(cyc)]) for k in range(len(cyc))]
        minus = edges[1::2]
        delta = min(f[e] for e in minus)
        for k, e in enumerate(edges):
            f[e] += delta if k % 2 == 0 else -delta
        for (i, a) in edges:
            if f[(i, a)] == 0 or f[(i, a)] == W[a]:
                frac_adj[("s", i)].discard(("a", a))
                frac_adj[("a", a)].discard(("s", i))
                if f[(i, a)] == 0:
                    del f[(i, a)]
                else:
                    owner[a] = i
        frac_adj = {k: v for k, v in frac_adj.items() if v}

    # round the forest top-down; each set's error stays below the largest atom
    seen = set()
    for root in sorted(k for k in frac_adj if k[0] == "s"):
        if root in seen:
            continue
        seen.add(root)
        queue = [(root, None, 0)]  # (set node, parent atom, carried deviation)
        while queue:
            s, parent_atom, dev = queue.pop(0)
            i = s[1]
            children = sorted(a for a in frac_adj[s] if a != parent_atom and a not in seen)
            dev -= sum(f[(i, a[1])] for a in children)
            for a in children:
                seen.add(a)
                if dev < 0:
                    owner[a[1]] = i
                    dev += W[a[1]]
                    receiver = None
                else:
                    receiver = min(x for x in frac_adj[a] if x != s)
                for child_set in sorted(x for x in frac_adj[a] if x != s):
                    if child_set in seen:
                        continue
                    seen.add(child_set)
                    x = f[(child_set[1], a[1])]
                    if child_set == receiver:
                        owner[a[1]] = child_set[1]
                        queue.append((child_set, a, W[a[1]] - x))
                    else:
                        queue.append((child_set, a, -x))

    cells_atoms: list[list[int]] = [[] for _ in range(n)]
    for a in range(m):
        cells_atoms[owner[a]].append(a)
    wmax = space.max_weight
    cells = []
    for i, atoms in enumerate(cells_atoms):
        if not atoms:
            raise AtomTooCoarse(f"cell {i} received no atoms; refine the atomization")
        mu = sum((space.weights[a] for a in atoms), Fraction(0))
        if abs(mu - inst.targets[i]) > wmax:
            raise AtomTooCoarse(f"cell {i} misses its target by {abs(mu - inst.targets[i])}")
        witness = inst.centers[i] if inst.centers else space.points[atoms[0]]
        cells.append(Cell(id=i, measure=mu, representative=space.points[atoms[0]],
                          witness=witness, atom_ids=tuple(atoms)))
    window = CompactWindow(space.model) if space.model.compact else None
    return Partition(space.model, window, cells)


# ---- verification ---------------------------------------------------------

@dataclass
class PartitionReport:
    fine: bool
    equisize: bool
    max_deviation: Fraction
    disjoint: bool
    covers: bool
    representatives_inside: bool


def _boxes_overlap(model, b1, b2) -> bool:
    for (lo1, hi1), (lo2, hi2) in zip(b1, b2):
        if model.kind == "torus":
            # overlap of half-open arcs modulo 1
            if hi1 - lo1 >= 1 or hi2 - lo2 >= 1:
                continue
            s = (lo2 - lo1) % 1
            if not (s < hi1 - lo1 or (lo1 - lo2) % 1 < hi2 - lo2):
                return False
        elif hi1 <= lo2 or hi2 <= lo1:
            return False
    return True


def verify_partition(p: Partition, U: NeighborhoodSpec, model: GroupModel | None = None,
                     space: AtomizedSpace | None = None,
                     targets=None) -> PartitionReport:
    """Check U-fineness, equal measure, disjointness and covering.

    For atom-set partitions pass the ``space``; the measure deviation is then
    measured against ``targets`` (default: equal shares).
    """
    model = model or p.model
    n = p.n
    if targets is None:
        share = (space.total if space is not None else p.window_measure) / n
        targets = [share] * n
    dev = max(abs(c.measure - t) for c, t in zip(p.cells, targets))
    if p.cells[0].atom_ids is not None:
        if space is None:
            raise ValueError("atom partitions need their space")
        ids = [a for c in p.cells for a in c.atom_ids]
        disjoint = len(ids) == len(set(ids))
        covers = set(ids) == set(range(len(space)))
        fine = all(box_sup_dist(model, c.witness, space.boxes[a]) <= U.radius
                   for c in p.cells for a in c.atom_ids) if model.kind != "finite" else all(
            model.dist(c.witness, space.points[a]) <= U.radius for c in p.cells for a in c.atom_ids)
        reps = all(c.representative in [space.points[a] for a in c.atom_ids] for c in p.cells)
        return PartitionReport(fine, dev == 0, dev, disjoint, covers, reps)
    if p.cells[0].elements is not None:
        els = [x for c in p.cells for x in c.elements]
        disjoint = len(els) == len(set(els))
        covers = set(els) == set(range(model.order))
        reps = all(c.representative[0] in c.elements for c in p.cells)
    else:
        disjoint = all(not _boxes_overlap(model, p.cells[a].bounds, p.cells[b].bounds)
                       for a in range(n) for b in range(a + 1, n))
        covers = disjoint and sum(c.measure for c in p.cells) == p.window.measure()
        reps = all(p.locate(c.representative) == c.id for c in p.cells)
    fine = all(_cell_fits(model, c, U) for c in p.cells)
    return PartitionReport(fine, dev == 0, dev, disjoint, covers, reps)
