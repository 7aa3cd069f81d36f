import random
from fractions import Fraction as F
from itertools import combinations

import networkx as nx
import pytest

from latinapprox.flow import FlowNetwork
from latinapprox.groups import CompactWindow, FiniteGroup, NeighborhoodSpec, RealLine, Torus
from latinapprox.partitioning import (
    AtomizedSpace, AtomTooCoarse, CoverInfeasible, HallViolation, RadoInstance, atomize,
    build_cover, hall_holds, lattice_partition, rado_allocate, singleton_partition,
    union_measure, verify_partition,
)


def test_torus_quarters():
    p = lattice_partition(Torus(1), 4)
    assert [c.bounds for c in p.cells] == [((F(m, 4), F(m + 1, 4)),) for m in range(4)]
    assert all(c.measure == F(1, 4) for c in p.cells)
    assert [c.representative for c in p.cells] == [(F(2 * m + 1, 8),) for m in range(4)]


def test_torus2_boxes():
    p = lattice_partition(Torus(2), 2)
    assert p.n == 4 and all(c.measure == F(1, 4) for c in p.cells)
    assert p.cells[1].bounds == ((F(0), F(1, 2)), (F(1, 2), F(1)))


def test_single_cell_torus_fineness():
    p = lattice_partition(Torus(1), 1)
    assert p.n == 1 and p.cells[0].measure == 1
    assert verify_partition(p, NeighborhoodSpec(F(1, 2))).fine
    assert not verify_partition(p, NeighborhoodSpec(F(49, 100))).fine


def test_lattice_rejects_zero():
    with pytest.raises(ValueError):
        lattice_partition(Torus(1), 0)


def test_verify_lattice_examples():
    p = lattice_partition(Torus(1), 4)
    r = verify_partition(p, NeighborhoodSpec(F(1, 4)))
    assert r.fine and r.equisize and r.max_deviation == 0 and r.disjoint and r.covers
    assert r.representatives_inside
    assert not verify_partition(p, NeighborhoodSpec(F(1, 16))).fine


@pytest.mark.parametrize("k", [1, 2, 3, 5, 8])
def test_lattice_fine_when_radius_at_least_width(k):
    for d in (1, 2):
        p = lattice_partition(Torus(d), k)
        r = verify_partition(p, NeighborhoodSpec(F(1, k)))
        assert r.fine and r.equisize and r.disjoint and r.covers


def test_real_line_and_finite_partitions():
    R = RealLine()
    p = lattice_partition(R, 12, CompactWindow(R, ((-3, 3),)))
    assert all(c.measure == F(1, 2) for c in p.cells)
    assert verify_partition(p, NeighborhoodSpec(F(1, 4))).fine
    s = singleton_partition(FiniteGroup.symmetric(3))
    r = verify_partition(s, NeighborhoodSpec(F(1, 2)))
    assert r.fine and r.equisize and r.covers and r.disjoint


def test_cover_torus_eighths():
    H, inst, space = build_cover(Torus(1), CompactWindow(Torus(1)), NeighborhoodSpec(F(1, 8)))
    assert H == [(F(k, 8),) for k in range(8)]
    assert inst.targets == [F(1, 8)] * 8
    # every union of |I| arcs has measure at least |I| / 8
    for r in range(1, 9):
        for sub in combinations(range(8), r):
            assert union_measure(space, inst, sub) >= F(r, 8)


def test_cover_real_line_twelve():
    R = RealLine()
    H, inst, space = build_cover(R, CompactWindow(R, ((-3, 3),)), NeighborhoodSpec(F(1, 2)))
    assert len(H) == 12
    assert inst.targets == [F(1, 2)] * 12 and sum(inst.targets) == 6
    assert H[0] == (F(-11, 4),) and H[-1] == (F(11, 4),)


def test_cover_single_ball():
    R = RealLine()
    H, inst, _ = build_cover(R, CompactWindow(R, ((0, F(1, 2)),)), NeighborhoodSpec(F(1, 2)))
    assert H == [(F(1, 4),)] and inst.targets == [F(1, 2)]


def test_cover_resolution_too_coarse():
    with pytest.raises(CoverInfeasible):
        build_cover(Torus(1), CompactWindow(Torus(1)), NeighborhoodSpec(F(1, 8)), resolution=F(1, 4))


def _space(weights):
    return AtomizedSpace(RealLine(), [(F(a),) for a in range(len(weights))], list(weights),
                         [((F(a), F(a + 1)),) for a in range(len(weights))], F(1))


def test_disjoint_sets_are_forced():
    space = _space([F(1, 4)] * 8)
    inst = RadoInstance([[0, 1], [2, 3], [4, 5], [6, 7]], [F(1, 2)] * 4)
    p = rado_allocate(space, inst)
    assert [list(c.atom_ids) for c in p.cells] == inst.cover_sets


def test_torus_arcs_at_fine_resolution():
    T = Torus(1)
    U = NeighborhoodSpec(F(1, 8))
    H, inst, space = build_cover(T, CompactWindow(T), U, resolution=F(1, 128))
    p = rado_allocate(space, inst)
    assert p.n == 8
    for c in p.cells:
        assert abs(c.measure - F(1, 8)) <= F(1, 128)
        assert set(c.atom_ids) <= set(inst.cover_sets[c.id])
    r = verify_partition(p, U, space=space)
    assert r.fine and r.disjoint and r.covers and r.max_deviation <= F(1, 128)


def test_one_atom_two_halves_is_too_coarse():
    space = _space([F(1)])
    inst = RadoInstance([[0], [0]], [F(1, 2), F(1, 2)])
    assert hall_holds(space, inst, [0, 1])
    with pytest.raises(AtomTooCoarse):
        rado_allocate(space, inst)


def _random_feasible(rng, n, m):
    """Hall-feasible by construction: targets are the sums of an explicit split."""
    D = rng.randint(1, 50)
    weights = [F(rng.randint(1, 20), D) for _ in range(m)]
    sets = [set() for _ in range(n)]
    share = [F(0)] * n
    for a, w in enumerate(weights):
        first = a % n
        sets[first].add(a)
        if n > 1 and rng.random() < 0.4:
            other = rng.choice([i for i in range(n) if i != first])
            part = w * F(rng.randint(1, 7), 8)
            sets[other].add(a)
            share[other] += part
            share[first] += w - part
        else:
            share[first] += w
    for i in range(n):
        sets[i].update(rng.sample(range(m), min(m, 5)))
    return weights, [sorted(s) for s in sets], share


def test_random_feasible_instances():
    rng = random.Random(3)
    for _ in range(20):
        n, m = rng.randint(1, 10), rng.randint(10, 300)
        weights, sets, share = _random_feasible(rng, n, m)
        space = _space(weights)
        inst = RadoInstance(sets, share)
        p = rado_allocate(space, inst)
        for c in p.cells:
            assert set(c.atom_ids) <= set(sets[c.id])
            assert abs(c.measure - share[c.id]) <= space.max_weight


def _flow_value(space, inst):
    n, m = inst.n, len(space)
    D = 1
    for v in list(space.weights) + list(inst.targets):
        D = D * v.denominator // __import__("math").gcd(D, v.denominator)
    g = nx.DiGraph()
    for i in range(n):
        g.add_edge("s", ("set", i), capacity=int(inst.targets[i] * D))
        for a in inst.cover_sets[i]:
            g.add_edge(("set", i), ("atom", a), capacity=10**12)
    for a in range(m):
        g.add_edge(("atom", a), "t", capacity=int(space.weights[a] * D))
    return F(nx.maximum_flow_value(g, "s", "t"), D)


def test_flow_saturates_iff_hall_holds():
    rng = random.Random(8)
    for _ in range(60):
        n, m = rng.randint(1, 7), rng.randint(2, 12)
        weights = [F(rng.randint(1, 6), 6) for _ in range(m)]
        sets = [sorted(rng.sample(range(m), rng.randint(1, m))) for _ in range(n)]
        cut = sorted(rng.sample(range(1, 100), n - 1))
        parts = [b - a for a, b in zip([0] + cut, cut + [100])]
        total = sum(weights)
        targets = [total * F(p, 100) for p in parts]
        space, inst = _space(weights), RadoInstance(sets, targets)
        brute = all(hall_holds(space, inst, sub)
                    for r in range(1, n + 1) for sub in combinations(range(n), r))
        assert (_flow_value(space, inst) == total) == brute
        try:
            rado_allocate(space, inst)
        except HallViolation as exc:
            assert not brute
            assert exc.union_measure < exc.target_sum
            assert union_measure(space, inst, exc.subset) == exc.union_measure
        except AtomTooCoarse:
            assert brute


def test_hall_violation_witness():
    space = _space([F(1)] * 4)
    inst = RadoInstance([[0], [0, 1], [2, 3]], [F(3, 2), F(1), F(3, 2)])
    with pytest.raises(HallViolation) as info:
        rado_allocate(space, inst)
    I = info.value.subset
    assert I and set(I) <= {0, 1}
    assert not hall_holds(space, inst, I)
    assert info.value.union_measure == union_measure(space, inst, I)


def test_dinic_matches_networkx():
    rng = random.Random(2)
    for _ in range(30):
        k = rng.randint(3, 12)
        net = FlowNetwork(k)
        g = nx.DiGraph()
        for _ in range(rng.randint(k, 4 * k)):
            u, v = rng.sample(range(k), 2)
            c = rng.randint(1, 20)
            net.add_edge(u, v, c)
            if g.has_edge(u, v):
                g[u][v]["capacity"] += c
            else:
                g.add_edge(u, v, capacity=c)
        g.add_nodes_from([0, k - 1])
        assert net.max_flow(0, k - 1) == nx.maximum_flow_value(g, 0, k - 1)


def test_atomize_weights_sum_to_window():
    R = RealLine()
    space = atomize(R, CompactWindow(R, ((-3, 3),)), F(1, 7))
    assert space.total == 6 and all(hi - lo <= F(1, 7) for (lo, hi), in space.boxes)
