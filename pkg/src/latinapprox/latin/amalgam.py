"""Integer amalgams: the measure tensor scaled and rounded to integers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import lil_matrix

from ..tensor import SupportSets, WTensor


class RoundingInfeasible(ValueError):
    """No integer tensor with the required line sums fits the support at this ``t``."""


@dataclass
class IntegerAmalgam:
    n: int
    entries: np.ndarray
    t: int
    support_mask: np.ndarray | None = None
    required_S: set = field(default_factory=set)
    required_S1: set = field(default_factory=set)
    required_S2: set = field(default_factory=set)
    mode: str = "compact"

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.int64)
        if self.entries.shape != (self.n,) * 3:
            raise ValueError("entries must be n x n x n")
        if self.support_mask is None:
            self.support_mask = self.entries > 0

    @classmethod
    def from_entries(cls, entries, t: int | None = None) -> "IntegerAmalgam":
        """Compact-mode amalgam; ``t`` defaults to the common line sum."""
        e = np.asarray(entries, dtype=np.int64)
        n = e.shape[0]
        if t is None:
            t = int(e.sum(axis=2).flat[0]) if e.size else 0
        return cls(n, e, t, mode="compact")

    def line_sums(self):
        e = self.entries
        return e.sum(axis=0), e.sum(axis=1), e.sum(axis=2)

    def is_compact(self) -> bool:
        return all((s == self.t).all() for s in self.line_sums())

    def validate(self) -> None:
        e = self.entries
        if (e < 0).any():
            raise ValueError("negative amalgam entry")
        if (e[~self.support_mask] != 0).any():
            raise ValueError("amalgam leaves its support mask")
        by_i, by_j, by_k = self.line_sums()
        if self.mode == "compact":
            if not self.is_compact():
                raise ValueError("compact amalgam needs every line sum equal to t")
            return
        if (by_i > self.t).any() or (by_j > self.t).any() or (by_k > self.t).any():
            raise ValueError("line sum exceeds t")
        for (i, j) in self.required_S:
            if by_k[i, j] != self.t:
                raise ValueError(f"k-line ({i},{j}) in S is short")
        for (i, k) in self.required_S1:
            if by_j[i, k] != self.t:
                raise ValueError(f"j-line ({i},{k}) in S' is short")
        for (j, k) in self.required_S2:
            if by_i[j, k] != self.t:
                raise ValueError(f"i-line ({j},{k}) in S'' is short")


def _scaled(w: WTensor, t: int):
    if w.mode == "exact":
        factor = Fraction(t * w.n ** 2) / Fraction(w.window_measure) ** 2
    else:
        factor = t * w.n ** 2 / float(w.window_measure) ** 2
    return w.entries * factor


def round_to_amalgam(w: WTensor, s: SupportSets | None, target_t: int,
                     mode: str = "compact", loop: bool = False) -> IntegerAmalgam:
    """Scale ``w`` so complete lines sum to ``target_t`` and round to integers on ``supp(w)``.

    If the scaled tensor is already integral it is used as is. Otherwise a
    small integer program picks floor or ceiling per entry subject to the
    line-sum constraints (all lines equal ``t`` in compact mode; at most ``t``,
    with equality on ``S`` and, for ``loop``, on ``S'`` and ``S''``, in partial mode).
    """
    if target_t < 1:
        raise ValueError("target_t must be positive")
    n = w.n
    t = target_t
    mask = np.asarray(w.entries > 0, dtype=bool)
    reqS = set(s.S) if s is not None else set()
    req1 = set(s.S1) if (s is not None and loop) else set()
    req2 = set(s.S2) if (s is not None and loop) else set()
    if mode == "compact":
        full = {(a, b) for a in range(n) for b in range(n)}
        reqS, req1, req2 = full, full, full
    elif mode != "partial":
        raise ValueError("mode must be 'compact' or 'partial'")

    x = _scaled(w, t)
    floors = np.vectorize(math.floor, otypes=[np.int64])(x) if n else np.zeros((0, 0, 0), np.int64)
    amalgam = IntegerAmalgam(n, floors, t, mask, reqS if mode == "partial" else set(),
                             req1 if mode == "partial" else set(),
                             req2 if mode == "partial" else set(), mode)
    integral = bool(np.all(floors == x)) if w.mode == "exact" else False
    if integral:
        try:
            amalgam.validate()
            return amalgam
        except ValueError:
            pass

    idx = [tuple(v) for v in zip(*np.nonzero(mask))]
    if not idx:
        raise RoundingInfeasible("empty support")
    col = {v: c for c, v in enumerate(idx)}
    lo = np.array([float(floors[v]) for v in idx])
    hi = np.array([float(math.ceil(x[v])) for v in idx])
    frac = np.array([float(x[v] - floors[v]) for v in idx])
    rows = []
    lb, ub = [], []
    for axis, req in ((0, req2), (1, req1), (2, reqS)):
        for a in range(n):
            for b in range(n):
                members = []
                for c in range(n):
                    v = [a, b]
                    v.insert(axis, c)
                    v = tuple(v)
                    if v in col:
                        members.append(col[v])
                if (a, b) in req:
                    lb.append(t)
                else:
                    lb.append(0)
                ub.append(t)
                rows.append(members)
    A = lil_matrix((len(rows), len(idx)))
    for r, members in enumerate(rows):
        for c in members:
            A[r, c] = 1
    cons = LinearConstraint(A.tocsr(), np.array(lb, float), np.array(ub, float))
    # prefer rounding each entry towards its nearest integer
    res = milp(c=1.0 - 2.0 * frac, constraints=[cons], integrality=np.ones(len(idx)),
               bounds=Bounds(lo, hi))
    if res.status != 0 or res.x is None:
        raise RoundingInfeasible(f"no integer amalgam with line sums {t} on this support")
    out = np.zeros((n, n, n), dtype=np.int64)
    for v, val in zip(idx, np.round(res.x).astype(np.int64)):
        out[v] = val
    amalgam.entries = out
    amalgam.validate()
    return amalgam


def minimal_integral_t(w: WTensor) -> int:
    """Smallest ``t`` for which the scaled exact tensor is integral."""
    if w.mode != "exact":
        raise ValueError("exact tensors only")
    x = _scaled(w, 1)
    d = 1
    for v in x.flat:
        d = d * Fraction(v).denominator // math.gcd(d, Fraction(v).denominator)
    return d
