"""
Bifurcation table
=================

Sample the attractor from many seeded initial states at each lam and put
dist_H next to the Newton amplitude, the reduced r* and the block verdict.
"""

from shbif import pde

template = pde.SimConfig(lam=9.0, K=16, dt=0.05, T=1500, ic_count=8)
rows = pde.bifurcation_sweep([8.5, 9.0625, 9.125, 9.25, 9.5], template)
print(pde.sweep_csv(rows))

# dist_H should double when lam - 9 quadruples
d = {r.lam: r.dist_H for r in rows}
print("ratio 9.25 / 9.0625:", d[9.25] / d[9.0625])
