"""
Center-manifold reduction in exact arithmetic
=============================================

At lam = 9 the mode sin2x/cos2x loses stability.  We solve for the graph
of the center manifold degree by degree, with every coefficient a Fraction,
and read off the planar vector field that governs the bifurcation.
"""

from shbif import manifold as mf

# degree-3 manifold map, ranged in the stable modes only
psi = mf.solve_center_manifold(9, order=3)
for (a, b), poly in psi.items():
    print(f"s1^{a} s2^{b}:", poly)

# the same map written as products like sin2x cos4x
print("alpha =", [str(a) for a in mf.alpha_coefficients(psi)])

# the residual of the invariance equation is exactly zero
print("residual:", mf.homological_residual(psi) or "0")

# reduced field from the eigenbasis map: radial, so O(2) symmetric
field = mf.reduced_vector_field(psi, order=5)
print("G1 =", {m: str(c) for m, c in field.G1.items()})

# reduced field from the product ansatz: a different quintic, because the
# products also carry sin2x/cos2x parts
prod = mf.reduced_vector_field(mf.product_ansatz_map(psi), order=5)
print("G1 (products) =", {m: str(c) for m, c in prod.G1.items()})

# off criticality the linear rate lam - 9 appears
print(mf.parameterized_reduction(9.3, order=3).coefficient(1, 1, 0))
