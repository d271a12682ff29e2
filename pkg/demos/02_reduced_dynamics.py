"""
Flow on the center manifold
===========================

The reduced field is radial, ds/dt = q(|s|^2) s, so everything reduces to
the sign of rho(r) = r q(r^2).  Below lam = 9 small disks are attracting
blocks; above it the origin repels and an invariant circle appears.
"""

import numpy as np

from shbif import manifold as mf
from shbif import reduced as rd

field9 = mf.parameterized_reduction(9, 5)
print("rho at lam=9:", {k: str(v) for k, v in rd.radial_polynomial(field9).powers.items()})

# exact certificate that the flux is inward on 0 < |s| <= 1
cert = rd.isolation_certificate(field9, R=1)
print("isolation bound:", cert.bound, "holds:", cert.holds)

# the block at r = 0.01 flips as lam crosses 9
for lam in (8.9, 9.0, 9.1, 9.5):
    vf = mf.parameterized_reduction(lam, 5)
    print(lam, rd.classify_block(vf, 0.01).verdict)

# invariant circle and the attractor-repeller pair inside it
vf = mf.parameterized_reduction(9.2, 5)
circle = rd.invariant_circle(vf)
print("r* =", circle.radius)
report = rd.check_attractor_repeller(vf, circle)
print("pair check passed:", report.passed)

# r* scales like sqrt(lam - 9)
for j in range(2, 6):
    lam = 9 + 2.0**-j
    r = rd.invariant_circle(mf.parameterized_reduction(lam, 5)).radius
    print(f"lam={lam:.5f}  r*={r:.6f}  r*/sqrt(lam-9)={r / np.sqrt(lam - 9):.6f}")
