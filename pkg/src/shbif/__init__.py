"""Attractor-bifurcation analysis of the 1D Swift-Hohenberg equation at lam = 9.

Submodules:

- ``spectral``: exact/float trigonometric algebra, projections, the linear
  operator, and the projection-induced transition isomorphism.
- ``manifold``: center-manifold map and reduced planar field in exact
  rational arithmetic.
- ``reduced``: flow of the reduced field, disk-block classification,
  invariant circle, attractor-repeller checks.
- ``pde``: Galerkin integration, Newton steady states, Lyapunov functional,
  attractor sampling and parameter sweeps.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError,
    DomainError,
    PreconditionError,
    ResonanceError,
    ScalarKindError,
    TruncationError,
)
from .manifold import (  # noqa: E402
    CenterManifoldMap,
    ReducedVectorField,
    alpha_coefficients,
    homological_residual,
    product_ansatz_map,
    parameterized_reduction,
    reduced_vector_field,
    solve_center_manifold,
)
from .pde import (  # noqa: E402
    AttractorSample,
    SimConfig,
    bifurcation_sweep,
    integrate_pde,
    lyapunov_value,
    sample_attractor,
    stationary_amplitude,
)
from .reduced import (  # noqa: E402
    check_attractor_repeller,
    classify_block,
    integrate_reduced,
    invariant_circle,
    isolation_certificate,
    radial_polynomial,
)
from .spectral import (  # noqa: E402
    TrigPoly,
    apply_L,
    eigenvalue,
    multiply_trig,
    project_center,
    project_stable,
    spectral_decomposition,
    transition_isomorphism,
)
