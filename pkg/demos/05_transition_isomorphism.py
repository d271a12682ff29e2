"""
Moving splittings
=================

The transition map T = P1_ref P1 + P2_ref P2 carries the splitting at one
parameter onto a reference splitting.  It is the identity when the two
coincide and exists as long as the projections stay closer than 1.
"""

import math

import numpy as np

from shbif import spectral as sp
from shbif.errors import PreconditionError

P = sp.center_projection_matrix(4)
Q = sp.LinearMapMatrix(sp.identity_like(P.matrix) - P.matrix, 4)
T = sp.transition_isomorphism((P, Q), (P, Q))
print("identity:", all(T.matrix[i, j] == (i == j) for i in range(8) for j in range(8)))

ref = (np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
for theta in (0.1, 0.5, 1.0, math.pi / 2):
    v = np.array([math.cos(theta), math.sin(theta)])
    w = np.array([-math.sin(theta), math.cos(theta)])
    try:
        M = sp.transition_isomorphism(ref, (np.outer(v, v), np.outer(w, w))).matrix
        print(f"theta={theta:.3f}  T v = {M @ v}  cond = {np.linalg.cond(M):.3f}")
    except PreconditionError as exc:
        print(f"theta={theta:.3f}  rejected: {exc}")
