"""Radial theory toolkit for the p-Laplace Henon equation -div(|Du|^{p-2}Du) = |x|^a u^q.

Submodules:
    params        problem parameters, regimes, closed-form exponents and constants
    radial        flux-form radial integrator, exact singular profile, scaling map
    transforms    coordinate changes (Emden-Fowler, logarithmic) and their residuals
    phase         autonomous-system phase plane: fixed points, stability, orbits
    classify      isolated-singularity classification and Dirac-mass estimation
    global_checks ball identities, gradient decay, nonexistence sweep
    bvp           annulus Dirichlet problems and the monotone source iteration
    cli           command-line front end
"""

__version__ = "0.1.0"

from .params import (
    ProblemParams,
    Regime,
    ExponentSet,
    compute_exponents,
    classify_regime,
    fundamental_solution,
    dirac_coefficient,
    surface_area,
)
from .radial import (
    RadialSolution,
    ShootResult,
    Terminal,
    ToleranceConfig,
    shoot_regular,
    integrate_exterior,
    exact_singular_solution,
    rescale_solution,
    ode_residual,
    solution_from_values,
)

__all__ = [
    "ProblemParams",
    "Regime",
    "ExponentSet",
    "compute_exponents",
    "classify_regime",
    "fundamental_solution",
    "dirac_coefficient",
    "surface_area",
    "RadialSolution",
    "ShootResult",
    "Terminal",
    "ToleranceConfig",
    "shoot_regular",
    "integrate_exterior",
    "exact_singular_solution",
    "rescale_solution",
    "ode_residual",
    "solution_from_values",
    "__version__",
]
