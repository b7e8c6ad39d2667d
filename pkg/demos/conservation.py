"""Conserved quantities of the spectral solver.

With ``p = 2a`` and ``q = 2b`` the quadratic moments of ``m`` and ``n`` are
invariants; for every admissible ``a, b`` the ``L^{p/a}`` norm of ``m`` is
transported by the flow. Run with ``python demos/conservation.py``.
"""

from ccch.experiments import run_conservation

for p, q, a, b in [(2, 2, 1.0, 1.0), (2, 1, 2.0, 1.0)]:
    rep = run_conservation(p=p, q=q, a=a, b=b, n=256, dt=1e-3, t_final=1.0)
    print(f"p={p} q={q} a={a:g} b={b:g}")
    for v in rep.verdicts:
        measured = "" if v.measured is None else f"{v.measured:.2e}"
        print(f"  {v.name:16s} {measured:>10s}  {v.label}  ({v.criterion})")
    t = rep.column("t")
    m2 = rep.column("int_m2")
    print(f"  int m^2: {m2[0]:.12f} at t={t[0]:g}, {m2[-1]:.12f} at t={t[-1]:g}\n")
