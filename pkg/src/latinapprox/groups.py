"""Concrete groups with Haar measure.

Elements are plain tuples of coordinates:

* torus(d): ``d`` Fractions in ``[0, 1)``
* real line: a single Fraction
* affine line ``x -> a x + b``: the pair ``(a, b)`` with ``a > 0``
* finite group: a single int index into the Cayley table

Torus, real-line and finite arithmetic is exact (Fractions / ints).
"""
from __future__ import annotations

import csv
import math
from fractions import Fraction
from itertools import permutations
from typing import Sequence

import numpy as np

GroupElement = tuple
Box = tuple  # tuple of (lo, hi) Fraction pairs, one per axis


class KindMismatch(ValueError):
    """An element does not belong to the model it was used with."""


def _frac(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


def circle_distance(x: Fraction, y: Fraction) -> Fraction:
    d = (x - y) % 1
    return min(d, 1 - d)


class GroupModel:
    """Base class. Subclasses fill in the group law, metric and measure."""

    kind: str = ""
    compact: bool = False
    unimodular: bool = True
    exact: bool = True

    def identity(self) -> GroupElement:
        raise NotImplementedError

    def contains(self, g) -> bool:
        raise NotImplementedError

    def check(self, *elements) -> None:
        for g in elements:
            if not self.contains(g):
                raise KindMismatch(f"{g!r} is not an element of {self!r}")

    def mul(self, g, h) -> GroupElement:
        raise NotImplementedError

    def inv(self, g) -> GroupElement:
        raise NotImplementedError

    def dist(self, g, h):
        raise NotImplementedError

    def box_measure(self, box: Box):
        """Haar measure of a half-open coordinate box."""
        raise NotImplementedError

    def total_measure(self):
        raise NotImplementedError

    # vectorised helpers for Monte Carlo, coordinates as float arrays of shape (m, dim)
    def np_mul_inv(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Row-wise ``x * y^-1``."""
        raise NotImplementedError

    def np_sample_box(self, rng: np.random.Generator, box: Box, size: int) -> np.ndarray:
        """Draw ``size`` points from Haar measure restricted to ``box``."""
        raise NotImplementedError


class Torus(GroupModel):
    kind = "torus"
    compact = True

    def __init__(self, dim: int = 1):
        if dim < 1:
            raise ValueError("torus dimension must be >= 1")
        self.dim = dim

    def __repr__(self):
        return f"Torus({self.dim})"

    def __eq__(self, other):
        return isinstance(other, Torus) and other.dim == self.dim

    def __hash__(self):
        return hash(("torus", self.dim))

    def element(self, *coords) -> GroupElement:
        return tuple(_frac(c) % 1 for c in coords)

    def identity(self):
        return tuple(Fraction(0) for _ in range(self.dim))

    def contains(self, g):
        return (isinstance(g, tuple) and len(g) == self.dim
                and all(isinstance(c, (Fraction, int)) and 0 <= c < 1 for c in g))

    def mul(self, g, h):
        self.check(g, h)
        return tuple((a + b) % 1 for a, b in zip(g, h))

    def inv(self, g):
        self.check(g)
        return tuple((-a) % 1 for a in g)

    def dist(self, g, h):
        self.check(g, h)
        return max(circle_distance(a, b) for a, b in zip(g, h))

    def box_measure(self, box):
        m = Fraction(1)
        for lo, hi in box:
            m *= hi - lo
        return m

    def total_measure(self):
        return Fraction(1)

    def np_mul_inv(self, x, y):
        return np.mod(x - y, 1.0)

    def np_sample_box(self, rng, box, size):
        lo = np.array([float(a) for a, _ in box])
        hi = np.array([float(b) for _, b in box])
        return lo + (hi - lo) * rng.random((size, len(box)))


class RealLine(GroupModel):
    kind = "real_line"

    def __repr__(self):
        return "RealLine()"

    def __eq__(self, other):
        return isinstance(other, RealLine)

    def __hash__(self):
        return hash("real_line")

    dim = 1

    def element(self, x) -> GroupElement:
        return (_frac(x),)

    def identity(self):
        return (Fraction(0),)

    def contains(self, g):
        return isinstance(g, tuple) and len(g) == 1 and isinstance(g[0], (Fraction, int))

    def mul(self, g, h):
        self.check(g, h)
        return (g[0] + h[0],)

    def inv(self, g):
        self.check(g)
        return (-g[0],)

    def dist(self, g, h):
        self.check(g, h)
        return abs(g[0] - h[0])

    def box_measure(self, box):
        (lo, hi), = box
        return hi - lo

    def total_measure(self):
        return math.inf

    def np_mul_inv(self, x, y):
        return x - y

    def np_sample_box(self, rng, box, size):
        (lo, hi), = box
        return float(lo) + float(hi - lo) * rng.random((size, 1))


class AffineLine(GroupModel):
    """The ``ax + b`` group with left Haar measure ``da db / a^2``.

    Composition is ``(a, b)(c, d) = (ac, ad + b)``. Not unimodular: the
    right-invariant measure is ``da db / a``.
    """

    kind = "affine_line"
    unimodular = False
    dim = 2

    def __repr__(self):
        return "AffineLine()"

    def __eq__(self, other):
        return isinstance(other, AffineLine)

    def __hash__(self):
        return hash("affine_line")

    def element(self, a, b) -> GroupElement:
        return (_frac(a), _frac(b))

    def identity(self):
        return (Fraction(1), Fraction(0))

    def contains(self, g):
        return (isinstance(g, tuple) and len(g) == 2
                and all(isinstance(c, (Fraction, int)) for c in g) and g[0] > 0)

    def mul(self, g, h):
        self.check(g, h)
        a, b = g
        c, d = h
        return (a * c, a * d + b)

    def inv(self, g):
        self.check(g)
        a, b = g
        return (1 / Fraction(a), -Fraction(b) / a)

    def dist(self, g, h):
        # hyperbolic distance on the upper half plane b + ia; left-invariant
        self.check(g, h)
        (a1, b1), (a2, b2) = g, h
        arg = 1 + ((a1 - a2) ** 2 + (b1 - b2) ** 2) / (2 * a1 * a2)
        return math.acosh(float(arg))

    def box_measure(self, box):
        (a0, a1), (b0, b1) = box
        return (b1 - b0) * (1 / Fraction(a0) - 1 / Fraction(a1))

    def total_measure(self):
        return math.inf

    def right_translate_factor(self, g) -> Fraction:
        """``nu(E g) / nu(E)`` for left Haar ``nu``; equals ``1 / a``."""
        return 1 / Fraction(g[0])

    def np_mul_inv(self, x, y):
        # (a, b)(c, d)^-1 = (a / c, b - a d / c)
        r = x[:, 0] / y[:, 0]
        return np.stack([r, x[:, 1] - r * y[:, 1]], axis=1)

    def np_sample_box(self, rng, box, size):
        (a0, a1), (b0, b1) = box
        # 1/a is uniform under da / a^2
        u = 1 / float(a1) + (1 / float(a0) - 1 / float(a1)) * rng.random(size)
        b = float(b0) + float(b1 - b0) * rng.random(size)
        return np.stack([1 / u, b], axis=1)


class FiniteGroup(GroupModel):
    """A finite group given by its Cayley table (row-major, 0-indexed)."""

    kind = "finite"
    compact = True

    def __init__(self, table: Sequence[Sequence[int]], name: str = "finite"):
        tab = np.asarray(table, dtype=np.int64)
        if tab.ndim != 2 or tab.shape[0] != tab.shape[1]:
            raise ValueError("Cayley table must be square")
        order = tab.shape[0]
        if tab.min() < 0 or tab.max() >= order:
            raise ValueError("Cayley table entries out of range")
        self.table = tab
        self.order = order
        self.name = name
        ids = [e for e in range(order)
               if all(tab[e, x] == x and tab[x, e] == x for x in range(order))]
        if len(ids) != 1:
            raise ValueError("Cayley table has no two-sided identity")
        self._identity = ids[0]
        self._inverse = np.empty(order, dtype=np.int64)
        for x in range(order):
            ys = np.nonzero(tab[x] == self._identity)[0]
            if len(ys) != 1:
                raise ValueError("Cayley table is not a group table")
            self._inverse[x] = ys[0]

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        idx = np.arange(n)
        return cls((idx[:, None] + idx[None, :]) % n, name=f"Z{n}")

    @classmethod
    def symmetric(cls, k: int = 3) -> "FiniteGroup":
        perms = sorted(permutations(range(k)))
        index = {p: i for i, p in enumerate(perms)}
        # (p q)(x) = p(q(x))
        table = [[index[tuple(p[q[x]] for x in range(k))] for q in perms] for p in perms]
        return cls(table, name=f"S{k}")

    @classmethod
    def from_csv(cls, path, name: str | None = None) -> "FiniteGroup":
        with open(path, newline="") as fh:
            rows = [[int(v) for v in row] for row in csv.reader(fh) if row]
        return cls(rows, name=name or str(path))

    def __repr__(self):
        return f"FiniteGroup({self.name}, order={self.order})"

    def __eq__(self, other):
        return isinstance(other, FiniteGroup) and np.array_equal(other.table, self.table)

    def __hash__(self):
        return hash(("finite", self.table.tobytes()))

    dim = 1

    def element(self, x: int) -> GroupElement:
        return (int(x),)

    def identity(self):
        return (self._identity,)

    def contains(self, g):
        return (isinstance(g, tuple) and len(g) == 1
                and isinstance(g[0], (int, np.integer)) and 0 <= g[0] < self.order)

    def mul(self, g, h):
        self.check(g, h)
        return (int(self.table[g[0], h[0]]),)

    def inv(self, g):
        self.check(g)
        return (int(self._inverse[g[0]]),)

    def dist(self, g, h):
        self.check(g, h)
        return Fraction(0) if g == h else Fraction(1)

    def set_measure(self, elements) -> Fraction:
        return Fraction(len(set(elements)), self.order)

    def total_measure(self):
        return Fraction(1)

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def np_mul_inv(self, x, y):
        xi = x[:, 0].astype(np.int64)
        yi = y[:, 0].astype(np.int64)
        return self.table[xi, self._inverse[yi]][:, None].astype(float)


# ---- module-level functional surface -------------------------------------

def mul(g, h, model: GroupModel):
    return model.mul(g, h)


def inv(g, model: GroupModel):
    return model.inv(g)


def dist(g, h, model: GroupModel):
    return model.dist(g, h)


class NeighborhoodSpec:
    """Closed metric ball of the given radius around the identity.

    Balls of a left-invariant metric are symmetric, so ``U = U^-1``.
    """

    symmetric = True

    def __init__(self, radius):
        radius = _frac(radius)
        if radius <= 0:
            raise ValueError("neighbourhood radius must be positive")
        self.radius = radius

    def __repr__(self):
        return f"NeighborhoodSpec(radius={self.radius})"

    def contains(self, g, model: GroupModel) -> bool:
        return model.dist(model.identity(), g) <= self.radius


class CompactWindow:
    """A compact box ``C`` with an inner target ``B`` inside it.

    ``bounds=None`` means the whole (compact) group.
    """

    def __init__(self, model: GroupModel, bounds: Box | None = None, inner: Box | None = None):
        if bounds is None and not model.compact:
            raise ValueError("a non-compact group needs explicit window bounds")
        if bounds is not None:
            bounds = tuple((_frac(lo), _frac(hi)) for lo, hi in bounds)
            if any(hi <= lo for lo, hi in bounds):
                raise ValueError("window bounds must have positive width")
            if model.kind == "affine_line" and bounds[0][0] <= 0:
                raise ValueError("affine window needs a > 0")
        if inner is not None:
            inner = tuple((_frac(lo), _frac(hi)) for lo, hi in inner)
            if bounds is not None and not all(
                    lo >= blo and hi <= bhi for (lo, hi), (blo, bhi) in zip(inner, bounds)):
                raise ValueError("inner target B must lie inside C")
        self.model = model
        self.bounds = bounds
        self.inner = inner

    def __repr__(self):
        return f"CompactWindow({self.model!r}, bounds={self.bounds}, inner={self.inner})"

    @property
    def whole_group(self) -> bool:
        return self.bounds is None

    def box(self) -> Box:
        """Bounds as a box; the whole torus is the unit cube."""
        if self.bounds is not None:
            return self.bounds
        if self.model.kind == "torus":
            return tuple((Fraction(0), Fraction(1)) for _ in range(self.model.dim))
        raise ValueError("finite groups have no box form")

    def measure(self):
        if self.bounds is None:
            return self.model.total_measure()
        return self.model.box_measure(self.bounds)

    def contains(self, g) -> bool:
        if self.bounds is None:
            return self.model.contains(g)
        return all(lo <= c <= hi for c, (lo, hi) in zip(g, self.bounds))

    def contains_inner(self, g) -> bool:
        if self.inner is None:
            return self.contains(g)
        return all(lo <= c <= hi for c, (lo, hi) in zip(g, self.inner))


def model_from_spec(spec: str) -> GroupModel:
    """Parse ``torus:2``, ``Z6``, ``cyclic:6``, ``S3``, ``real_line``, ``affine``,
    ``cayley:path.csv``."""
    s = spec.strip()
    low = s.lower()
    if low.startswith("torus"):
        _, _, d = s.partition(":")
        return Torus(int(d) if d else 1)
    if low in ("real", "real_line", "r"):
        return RealLine()
    if low in ("affine", "affine_line", "ax+b"):
        return AffineLine()
    if low.startswith("cyclic:"):
        return FiniteGroup.cyclic(int(s.split(":", 1)[1]))
    if low.startswith("z") and low[1:].isdigit():
        return FiniteGroup.cyclic(int(low[1:]))
    if low.startswith("s") and low[1:].isdigit():
        return FiniteGroup.symmetric(int(low[1:]))
    if low.startswith("cayley:"):
        return FiniteGroup.from_csv(s.split(":", 1)[1])
    raise ValueError(f"unknown group spec {spec!r}")
