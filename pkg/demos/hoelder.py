"""Hölder continuity of the data-to-solution map in a weaker norm.

Perturb a smooth datum by ``eps`` times a fixed direction and fit the
distance at ``t = 0.5`` against the initial distance on a log-log scale.
Run with ``python demos/hoelder.py``.
"""

from ccch.experiments import classify_region, hoelder_exponent, run_hoelder

s, r = 3.0, 2.0
print(f"(s, r) = ({s:g}, {r:g}) lies in region {classify_region(s, r).name}, "
      f"predicted exponent {hoelder_exponent(s, r):g}")
rep = run_hoelder(s=s, r=r)
print(f"{'eps':>10s}  {'dist at 0':>12s}  {'dist at t':>12s}")
for eps, d0, dt, status in rep.rows:
    print(f"{eps:10.3e}  {d0:12.5e}  {dt:12.5e}  {status}")
fit = rep.fits["hoelder"]
print(f"fitted exponent {fit.slope:.4f}; verdict {rep.verdicts[0].label}")
