"""Two data sets that merge in H^s while their solutions drift apart.

For each carrier frequency m we solve from the initial data of both
two-mode families.  The initial H^s distance is m^(-1/2), yet the distance
at time t stays above roughly |sin t| / 2 for every m.  A few small m values keep
this under half a minute.

    python demos/norm_separation.py
"""
from mzk import SolverConfig
from mzk.illposed import run_divergence_experiment

out = run_divergence_experiment([4, 8, 16], t_end=1.0,
                                cfg=SolverConfig(N=0, t_end=1.0, lam=1.0, dt=1 / 200, record_every=10))
for key, run in out["runs"].items():
    print(f"m = {key:>2}: D(0) = {run['initial_distance']:.4f}  (m^-1/2 = {run['predicted_initial_distance']:.4f})")
    for t, D, env in zip(run["t"], run["D"], run["envelope"]):
        bar = "#" * int(round(60 * D))
        print(f"   t={t:4.2f}  D={D:.4f}  |sin t|/2={env:.4f}  {bar}")
if "fit_v1_l2" in out:
    slope, stderr = out["fit_v1_l2"]
    print(f"\nL2 error of the approximate solution at t=0.5 decays like m^{slope:.3f} (+- {stderr:.1e})")
