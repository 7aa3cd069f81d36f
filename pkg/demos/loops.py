"""Turning a quasigroup approximation into a loop.

The unit is the element placed closest to 0; two row and column
permutations make it a two-sided identity without moving any element far.

Run: python demos/loops.py
"""
import numpy as np

from latinapprox.groups import Torus
from latinapprox.latin import loopify, random_latin_square
from latinapprox.pipeline import loop_approximate

sq = random_latin_square(5, np.random.default_rng(1))
print("random square:\n", sq.table)
print("as a loop with unit 2:\n", loopify(sq, 2).table)

for n in (8, 16):
    amap, rep = loop_approximate(Torus(1), n)
    print(f"\ntorus n={n}: unit {rep.unit} at {amap.alpha[rep.unit][0]}, "
          f"unit laws {rep.unit_laws_hold}, displacement {rep.displacement:.4f}, "
          f"max error {rep.max_product_error:.4f}")
