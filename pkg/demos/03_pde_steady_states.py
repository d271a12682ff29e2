"""
The full Galerkin system
========================

Integrate the truncated PDE with ETDRK4, watch the Lyapunov functional
decrease, and compare the end state to a Newton solve and to the reduced
prediction.
"""

import numpy as np

from shbif import manifold as mf
from shbif import pde
from shbif import reduced as rd
from shbif.spectral import FLOAT, sin

cfg = pde.SimConfig(lam=9.2, K=16, dt=0.05, T=400)
traj = pde.integrate_pde(cfg, sin(1, 0.1, kind=FLOAT), sample_every=20)

V = pde.lyapunov_value(traj.states, cfg.lam)
print("V start/end:", V[0], V[-1])
print("largest increase of V:", np.max(np.diff(V)))

final = traj.final
print("PDE amplitude:", np.hypot(final[0], final[1]))
print("Newton:       ", pde.stationary_amplitude(9.2, K=16).amplitude)
print("reduced r*:   ", rd.invariant_circle(mf.parameterized_reduction(9.2, 5)).radius)

# below criticality everything decays
cfg = pde.SimConfig(lam=8.5, K=16, dt=0.05, T=200, ic_count=8)
end = pde.integrate_pde(cfg, pde.random_initial_states(cfg), sample_every=10**6).final
print("norms at T=200, lam=8.5:", pde.state_norm(end).max())
