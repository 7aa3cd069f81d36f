from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest

from latinapprox.groups import AffineLine, CompactWindow, FiniteGroup, RealLine, Torus
from latinapprox.partitioning import Cell, Partition, lattice_partition, singleton_partition
from latinapprox.tensor import (
    LawViolation, SupportSets, UnsupportedGeometry, WTensor, circle_difference_mass,
    interval_difference_mass, line_sums, product_meets, support_sets, verify_line_laws,
    w_exact, w_montecarlo,
)


def grid_tensor_torus1(n, grid):
    """Midpoint-grid double sum of the defining integral on the circle.

    Independent of the closed form: x and y run over ``grid`` midpoints per
    unit, ``x - y`` is reduced mod 1 and all three points are binned.
    """
    per = grid // n
    counts = np.zeros((n, n, n), dtype=np.int64)
    b = np.arange(grid)
    cell_y = b // per
    for a in range(grid):
        d = (a - b) % grid  # x - y in grid units; midpoints cancel
        cell_z = d // per
        np.add.at(counts, (cell_z, cell_y, np.full(grid, a // per)), 1)
    return counts / grid ** 2


@pytest.fixture(scope="module")
def torus4():
    return w_exact(lattice_partition(Torus(1), 4))


def test_torus4_against_grid_oracle(torus4):
    oracle = grid_tensor_torus1(4, 4096)
    exact = torus4.entries.astype(float)
    assert np.array_equal(oracle > 0, exact > 0)
    assert np.abs(oracle - exact).max() < 1e-4


def test_torus4_frozen_pattern(torus4):
    # mass sits at i = k - j and i = k - j - 1 (mod 4), 1/32 each
    for i, j, k in product(range(4), repeat=3):
        want = F(1, 32) if (k - j - i) % 4 in (0, 1) else 0
        assert torus4.entries[i, j, k] == want
    for m in line_sums(torus4):
        assert all(x == F(1, 16) for x in m.flat)


def test_z3_oracle():
    Z3 = FiniteGroup.cyclic(3)
    w = w_exact(singleton_partition(Z3))
    # nine pairs (x, y); the triple is (x - y, y, x)
    hand = np.zeros((3, 3, 3), dtype=object)
    hand[...] = F(0)
    for x in range(3):
        for y in range(3):
            hand[(x - y) % 3, y, x] += F(1, 9)
    assert (w.entries == hand).all()
    for i, j, k in product(range(3), repeat=3):
        assert w.entries[i, j, k] == (F(1, 9) if (i + j) % 3 == k else 0)
    for m in line_sums(w):
        assert all(x == F(1, 9) for x in m.flat)


def test_single_cell_is_total_mass():
    w = w_exact(lattice_partition(Torus(1), 1))
    assert w.entries[0, 0, 0] == 1


def test_s3_follows_group_law():
    S3 = FiniteGroup.symmetric(3)
    w = w_exact(singleton_partition(S3))
    for i, j, k in product(range(6), repeat=3):
        assert (w.entries[i, j, k] > 0) == (S3.mul((i,), (j,)) == (k,))


def test_interval_mass_hand_values():
    assert interval_difference_mass((0, 1), (0, 1), (0, 1)) == F(1, 2)
    assert interval_difference_mass((0, 1), (0, 1), (-1, 1)) == 1
    assert interval_difference_mass((F(0), F(1, 2)), (F(0), F(1, 2)), (F(1, 2), F(1))) == 0
    assert circle_difference_mass((F(0), F(1, 4)), (F(1, 2), F(3, 4)), (F(1, 2), F(3, 4))) == F(1, 32)


def test_real_line_against_grid_oracle():
    R = RealLine()
    p = lattice_partition(R, 12, CompactWindow(R, ((-3, 3),)))
    w = w_exact(p)
    g = 480  # grid points per unit, 240 per cell; integer units keep x - y exact
    per = g // 2
    idx = np.arange(6 * g)
    cell = idx // per
    oracle = np.zeros((12, 12, 12))
    for a in range(6 * g):
        d = a - idx + 3 * g  # (x - y + 3) in grid units
        inside = (d >= 0) & (d < 6 * g)
        np.add.at(oracle, (d[inside] // per, cell[inside], np.full(inside.sum(), a // per)), 1)
    oracle /= g * g
    exact = w.entries.astype(float)
    assert np.array_equal(oracle > 1e-12, exact > 0)
    assert np.abs(oracle - exact).max() < 2e-3


def test_mc_matches_exact_within_four_sigma(torus4):
    p = lattice_partition(Torus(1), 4)
    w = w_montecarlo(p, samples=10**6, seed=1)
    exact = torus4.entries.astype(float)
    assert (np.abs(w.entries - exact) <= 4 * w.mc_stddev + 1e-12).all()


def test_mc_is_deterministic_under_seed():
    p = lattice_partition(Torus(1), 4)
    a = w_montecarlo(p, samples=10**4, seed=9)
    b = w_montecarlo(p, samples=10**4, seed=9)
    c = w_montecarlo(p, samples=10**4, seed=10)
    assert np.array_equal(a.entries, b.entries) and np.array_equal(a.mc_stddev, b.mc_stddev)
    assert not np.array_equal(a.entries, c.entries)


def test_mc_rejects_small_samples():
    with pytest.raises(ValueError):
        w_montecarlo(lattice_partition(Torus(1), 4), samples=100)


def test_mc_error_within_four_sigma_in_most_runs(torus4):
    p = lattice_partition(Torus(1), 4)
    exact = torus4.entries.astype(float)
    ok = 0
    errs = {1: [], 4: []}
    for seed in range(100):
        w = w_montecarlo(p, samples=10**5, seed=seed)
        ok += bool((np.abs(w.entries - exact) <= 4 * w.mc_stddev + 1e-12).all())
        errs[1].append(np.abs(w.entries - exact).max())
    for seed in range(20):
        w = w_montecarlo(p, samples=4 * 10**5, seed=1000 + seed)
        errs[4].append(np.abs(w.entries - exact).max())
    assert ok >= 95
    assert np.mean(errs[4]) < np.mean(errs[1])


def test_zero_measure_cell_has_empty_lines():
    T = Torus(1)
    half = F(1, 2)
    cells = [Cell(0, half, (F(1, 4),), (F(1, 4),), bounds=((F(0), half),)),
             Cell(1, F(0), (half,), (half,), bounds=((half, half),)),
             Cell(2, half, (F(3, 4),), (F(3, 4),), bounds=((half, F(1)),))]
    w = w_montecarlo(Partition(T, CompactWindow(T), cells), samples=10**4, seed=0)
    assert (w.entries[1] == 0).all() and (w.entries[:, 1] == 0).all() and (w.entries[:, :, 1] == 0).all()


def test_line_sums_of_zero_tensor():
    w = WTensor(3, np.zeros((3, 3, 3)), "montecarlo", 1.0)
    for m in line_sums(w):
        assert m.shape == (3, 3) and not m.any()


def test_support_sets_whole_torus():
    s = support_sets(lattice_partition(Torus(2), 2))
    full = {(a, b) for a in range(4) for b in range(4)}
    assert s.S == s.S1 == s.S2 == full


def test_support_sets_real_line():
    R = RealLine()
    p = lattice_partition(R, 12, CompactWindow(R, ((-3, 3),)))
    s = support_sets(p)
    assert (5, 6) in s.S and (6, 5) in s.S  # [-1/2, 0) and [0, 1/2)
    for i, j in product(range(12), repeat=2):
        (li, hi), = p.cells[i].bounds
        (lj, hj), = p.cells[j].bounds
        assert ((i, j) in s.S) == (li + lj >= -3 and hi + hj <= 3)
    assert (11, 6) not in s.S  # reaches 3.5


def test_verify_torus_and_finite_exact():
    for p in (lattice_partition(Torus(1), 8), lattice_partition(Torus(2), 3),
              singleton_partition(FiniteGroup.cyclic(3))):
        w = w_exact(p)
        r = verify_line_laws(w, support_sets(p), partition=p)
        assert r.passed and r.max_excess == 0 and r.max_deficit_on_support == 0
        assert r.support_ok and r.existential_ok


def test_real_line_laws_on_support_sets():
    R = RealLine()
    p = lattice_partition(R, 12, CompactWindow(R, ((-3, 3),)))
    w = w_exact(p)
    s = support_sets(p)
    r = verify_line_laws(w, s, partition=p)
    assert r.passed and r.line_value == F(1, 4)
    by_i, by_j, by_k = line_sums(w)
    assert all(v <= F(1, 4) for m in (by_i, by_j, by_k) for v in m.flat)
    assert any(v < F(1, 4) for v in by_k.flat)  # lines leaving C are short
    assert all(by_k[i, j] == F(1, 4) for i, j in s.S)
    assert all(by_j[i, k] == F(1, 4) for i, k in s.S1)
    assert all(by_i[j, k] == F(1, 4) for j, k in s.S2)


def test_total_mass_whole_group():
    w = w_exact(lattice_partition(Torus(2), 3))
    assert sum(w.entries.flat) == 1


def test_torus_translation_invariance():
    n = 8
    w = w_exact(lattice_partition(Torus(1), n)).entries
    for i, j, k in product(range(n), repeat=3):
        assert w[i, j, k] == w[i, (j + 1) % n, (k + 1) % n] == w[(i + 1) % n, j, (k + 1) % n]


def test_positive_entries_have_meeting_products():
    p = lattice_partition(Torus(2), 3)
    w = w_exact(p)
    for t in w.support():
        assert product_meets(p, *t)


def test_affine_violates_line_laws():
    A = AffineLine()
    win = CompactWindow(A, ((F(1, 2), F(2)), (F(-1), F(1))))
    p = lattice_partition(A, 3, win)
    s = support_sets(p)
    assert s.S  # some products certified inside the window
    w = w_montecarlo(p, samples=10**6, seed=7)
    with pytest.raises(LawViolation) as info:
        verify_line_laws(w, s)
    assert info.value.report.violations


def test_exact_geometry_unsupported_for_affine():
    A = AffineLine()
    p = lattice_partition(A, 2, CompactWindow(A, ((1, 2), (0, 1))))
    with pytest.raises(UnsupportedGeometry):
        w_exact(p)


def test_law_violation_on_perturbed_tensor():
    p = lattice_partition(Torus(1), 4)
    w = w_exact(p)
    w.entries[0, 0, 0] += F(1, 1000)
    with pytest.raises(LawViolation):
        verify_line_laws(w, SupportSets(*(set(support_sets(p).S),) * 3))
