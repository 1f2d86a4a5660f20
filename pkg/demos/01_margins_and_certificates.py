"""Inward margins on a moving wall, and how a pinched corridor defeats them.

The state must stay below a sinusoidally moving wall and above a fixed
floor.  At every sampled boundary point we solve a tiny matrix game: find
the mixture of sampled controls whose velocity makes the most negative
inner product with every nearby constraint gradient.  A uniformly positive
game value yields a certificate with two radii (eps, eta): short inward
moves from anywhere in the eta-tube stay feasible with eps to spare.

Squeezing the corridor benchmark below its controllability threshold makes
the two wall gradients oppose each other inside one active ball: no mixture
points inward, the game value drops to zero, and verification reports the
failing boundary point instead of a certificate.
"""

import math

from feastube import get_problem, inward_margin, verify_ipc

wall = get_problem("moving-wall-1d")

print("== margins along the moving wall ==")
for t in (0.0, math.pi / 2, math.pi):
    x = [1.0 + 0.4 * math.sin(t)]  # on the upper wall
    mr = inward_margin(wall, t, x, delta=0.1)
    print(f"  t={t:5.2f}  wall at {x[0]:+.3f}  margin r={mr.r:.3f}  "
          f"mixture={mr.alpha.round(3).tolist()}  velocity={mr.v.round(3).tolist()}")

ver = verify_ipc(wall, (0.0, 2 * math.pi), r_min=0.9, delta=0.5,
                 n_time=100, n_dirs=2)
cert = ver.certificate
print(f"\ncertificate over [0, 2pi]: r={cert.r:.6f}, delta={cert.delta}, "
      f"eps={cert.eps:.6f}, eta={cert.eta:.6f}  ({cert.n_samples} boundary samples)")

print("\n== pinching the corridor ==")
for width in (1.0, 0.01):
    corridor = get_problem("corridor-2d", {"width": width})
    ver = verify_ipc(corridor, (0.0, 2 * math.pi), r_min=0.5, delta=0.1,
                     n_time=12, n_dirs=8)
    if ver.ok:
        print(f"  width={width}: verified, r={ver.certificate.r:.3f}")
    else:
        w = ver.worst
        print(f"  width={width}: FAILS, best margin {w['r']:.3f} at "
              f"t={w['t']:.2f}, x={[round(v, 3) for v in w['x']]}")
