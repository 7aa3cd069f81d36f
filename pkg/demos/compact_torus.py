"""Approximate the circle group by a finite quasigroup and watch the error shrink.

Run: python demos/compact_torus.py
"""
from latinapprox import io as lio
from latinapprox.groups import Torus
from latinapprox.pipeline import approximate_compact
from latinapprox.tensor import w_exact
from latinapprox.partitioning import lattice_partition

T = Torus(1)

# Four arcs of length 1/4. The tensor entry w[i, j, k] is the measure of
# pairs (x, y) with x in arc k, y in arc j and x - y in arc i.
w = w_exact(lattice_partition(T, 4))
supp = sorted(w.support())
print(f"{len(supp)} of 64 entries are nonzero, each {w.entries[supp[0]]}; with x in arc k:")
for k in range(4):
    print(f"  arc {k}: (i, j) in", [(i, j) for i, j, kk in supp if kk == k])

# Each arc becomes a group of t quasigroup elements, placed evenly inside it.
for n in (4, 8, 16, 32):
    amap, rep = approximate_compact(T, n)
    print(f"n={n:2d} t={rep.t} order={rep.order:3d}  "
          f"max product error {rep.max_product_error:.5f}  "
          f"(bound {rep.epsilon_bound:.5f})")

amap, rep = approximate_compact(T, 4)
print("\nthe order-8 square for n=4:")
print(lio.square_to_csv(amap.square), end="")
print("element positions:", [str(a[0]) for a in amap.alpha])
