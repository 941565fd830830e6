"""Randomized ratios for the bilinear and dispersive estimates.

Each ratio compares the left side of an estimate with its right side on
seeded random band-limited fields.  Bounded ensemble maxima as the
bandwidth grows are what the estimates predict; a systematic climb would
point at a missing factor.

    python demos/inequality_harness.py
"""
from mzk.inequalities import (
    RandomFieldSpec, kato_ponce_ensemble, product_ensemble, strichartz_ratio, transference_check,
)

print("Kato-Ponce commutator and product ratios, 50 pairs each")
for K in (8, 16, 32):
    spec = RandomFieldSpec(seed=1, K=K, beta=2.0, count=50)
    kp, pr = kato_ponce_ensemble(spec), product_ensemble(spec)
    print(f"  K={K:2d}  commutator max {kp.max:.3f}   product max {pr.max:.3f}")

print("\nStrichartz ratio on dyadic shells, 10 samples each")
for j in (2, 3, 4):
    rep = strichartz_ratio(j, RandomFieldSpec(seed=2, K=2 ** j, count=10))
    print(f"  j={j}  max {rep.max:.3f}  mean {rep.mean:.3f}")

print("\nTorus/plane transference for a Gaussian")
for s in (0.0, 2.0):
    res = transference_check(s, n_samples=16)
    print(f"  s={s:.0f}  max pointwise discrepancy {res.max_discrepancy:.2e}")
