"""The real line is not compact, so only a window is approximated.

A partial square is realized over C = [-3, 3], blocks that would overflow the
window are left empty, and the result is completed to twice its order.
Products are only promised to be close for elements placed inside B = [-1, 1].

Run: python demos/real_line_window.py
"""
from latinapprox.groups import RealLine
from latinapprox.pipeline import approximate_locally_compact, window_around

R = RealLine()
print("window around [-1, 1]:", window_around(R, ((-1, 1),)).bounds)

for n in (12, 24, 48):
    amap, rep = approximate_locally_compact(R, ((-1, 1),), n)
    inside = sum(amap.in_window)
    print(f"n={n:2d} partial order {rep.partial_order:3d} -> completed {rep.order:3d}; "
          f"{rep.pair_count} pairs checked in B, max error {rep.max_product_error:.4f} "
          f"(bound {rep.epsilon_bound:.4f}); {inside} elements live in the window")
