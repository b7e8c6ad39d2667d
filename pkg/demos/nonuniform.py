"""Non-uniform dependence on initial data, at small frequencies.

Pairs of solutions whose initial distance decays like a negative power of
``lam`` stay a fixed distance apart at ``t = 1``. This run uses small ``lam`` so it finishes in seconds; the
acceptance suite runs the full sweep. Run with ``python demos/nonuniform.py``.
"""

from ccch.experiments import NonuniformParams, run_nonuniform

params = NonuniformParams(s=3.0, delta=0.5, p=1, q=1, a=2.0, b=2.0,
                          lambdas=(16.0, 32.0, 64.0), t_probe=1.0)
rep = run_nonuniform(params)
present = ["lambda", "n", "dist_t0", "dist_tprobe"]
print("  ".join(f"{c:>12s}" for c in present))
for row in rep.rows:
    print("  ".join(f"{row[rep.columns.index(c)]:12.5g}" for c in present))
print()
for v in rep.verdicts:
    print(f"{v.name:20s} {v.label}  {v.criterion}")
