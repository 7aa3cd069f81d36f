"""Line sums of the measure tensor only balance on unimodular groups.

On the ax+b group left Haar measure is not right invariant, and the
Monte Carlo line sums disagree far beyond their sampling noise. The torus
is the control.

Run: python demos/unimodularity_probe.py
"""
from latinapprox.groups import AffineLine, Torus, FiniteGroup
from latinapprox.pipeline import unimodularity_probe

for name, model in (("ax+b", AffineLine()), ("circle", Torus(1)), ("S3", FiniteGroup.symmetric(3))):
    r = unimodularity_probe(model, samples=10**6, seed=7)
    print(f"{name:7s} {r.lines_checked:3d} lines  disparity {r.disparity:.4f}  "
          f"noise floor {r.noise_floor:.4f}  -> "
          f"{'obstruction' if r.obstruction else 'balanced'}")
