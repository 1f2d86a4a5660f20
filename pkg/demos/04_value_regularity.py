"""Discounted value fields: spatial Lipschitz envelope and decay at infinity.

Two certifications on the moving-wall benchmark:

* Above the growth threshold K from the tracking ledger, the relaxed value
  is b * exp(-(lambda - K) t)-Lipschitz in space per time slice; we compare
  empirical difference quotients per slice against that envelope.
* For any discount above the growth rate a1 of the data, the value along a
  feasible path is squeezed under a closed-form envelope and vanishes as t
  grows; the field's truncation tail bound rides along in the comparison.

The threshold K is huge here (it inherits the conservative repair factor),
so the profile run uses a correspondingly large discount; the decay run
shows a moderate discount where only the decay statement applies.
"""

import math
from pathlib import Path

from feastube import (
    GridSpec,
    decay_check,
    derive_nft_constants,
    derive_tracking_constants,
    get_problem,
    lipschitz_profile,
    solve_value,
    verify_ipc,
    viable_trajectory,
)
from feastube.analysis import emit_report

OUT = Path(__file__).parent / "out" / "value"

wall = get_problem("moving-wall-1d")
cert = verify_ipc(wall, (0.0, 2 * math.pi), r_min=0.9, delta=0.5,
                  n_time=50, n_dirs=2).certificate
nft_cons = derive_nft_constants(wall, cert, 1.0)
tc = derive_tracking_constants(wall, nft_cons.beta, 5.0)
print(f"tracking ledger: K = {tc.K:.2f}, C = {tc.C:.3e}")

# -- spatial regularity above the threshold --------------------------------
lam = 2 * max(tc.K, wall.data.a1) + 1
nx = 201
dx = (1.8 + 2.7) / (nx - 1)
grid = GridSpec(lo=[-2.7], hi=[1.8], shape=(nx,), dt=dx / wall.data.M)
field = solve_value(wall, lam, grid, relaxed=True, mixture_grid=4,
                    horizon=200 * grid.dt)
prof = lipschitz_profile(field, tc, pair_budget=400)
print(f"\nlambda = {lam:.1f} > K: profile over {len(prof.times)} slices, "
      f"max quotient {prof.empirical.max():.3e}, "
      f"envelope at t0 {prof.bound[0]:.3e}, passed = {prof.passed}")

# -- decay along a feasible path at a moderate discount ---------------------
lam2 = 6.0
grid2 = GridSpec(lo=[-2.7], hi=[1.8], shape=(101,), dt=(1.8 + 2.7) / 100)
field2 = solve_value(wall, lam2, grid2, relaxed=True, mixture_grid=2, tol=1e-3)
path = viable_trajectory(wall, cert, 0.0, [-0.5], field2.T, field2.dt)
dec = decay_check(wall, field2, path, tol_decay=1e-2)
print(f"\nlambda = {lam2}: auto horizon T = {field2.T:.2f} "
      f"(tail bound {field2.tail_bound:.2e})")
print(f"value along the path: starts {dec.values[0]:.4f}, "
      f"ends {dec.final_value:.2e}, passed = {dec.passed}")

emit_report({"lipschitz": prof, "decay": dec}, OUT)
print(f"\nreport in {OUT}")
