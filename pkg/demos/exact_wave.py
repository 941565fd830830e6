"""Follow the exact two-mode travelling wave and watch the solver keep it.

With lam = 1 the j = 0 member of the two-mode family solves the equation
exactly, so the numerical solution should track the closed form to the
step tolerance.  The j = 1 member is only approximate; its residual shrinks
like m^(1/2 - 2s).

    python demos/exact_wave.py
"""
import numpy as np

from mzk import SolverConfig, TorusGrid, hs_norm, solve
from mzk.illposed import ApproxFamilyParams, family_field, residual_linf_closed_form

m, s = 4, 2.0
grid = TorusGrid(20)
p = ApproxFamilyParams(m, 0, r=1.0, s=s, lam=1.0)
traj = solve(family_field(p, 0.0, grid), SolverConfig(N=20, t_end=1.0, lam=1.0, tol=1e-10, record_every=10))

print("t        rel L2 error")
for t, u in zip(traj.times, traj.fields):
    exact = family_field(p, t, grid)
    print(f"{t:6.3f}   {hs_norm(0, u - exact) / hs_norm(0, exact):.3e}")
print(f"accepted steps: {len(traj.step_sizes)}")

print("\nresidual of the approximate (j = 1) family")
print("  m     ||R||_inf     m^(2s-1/2) ||R||_inf / 2")
for m in (4, 8, 16, 32, 64):
    R = residual_linf_closed_form(ApproxFamilyParams(m, 1, s=s))
    print(f"{m:4d}   {R:.4e}   {R * m ** (2 * s - 0.5) / 2:.12f}")
