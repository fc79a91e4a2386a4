"""Unconditionally stable implicit-explicit linear multistep schemes.

Submodules
----------
coeffs
    The one-parameter coefficient family and its structural checks.
diagram
    Unconditional-stability diagrams and fast membership tests.
spectra
    Generalized eigenvalues and weighted numerical ranges of a splitting.
recipes
    Searches for stable ``(delta, sigma)`` pairs.
stepper
    Generic r-step ImEx integrator.
diffusion
    1D variable-coefficient and 3D porous-medium spectral solvers.
channel
    Stokes channel-flow mode problem with explicit pressure.
cli
    Command-line front end.
"""
__version__ = "0.1.0"

from ._backend import BACKEND
from .coeffs import ImExScheme, check_order_conditions, check_zero_stability, generate_scheme
from .diagram import StabilityDiagram, all_inside, contains, extreme_points, root_modulus, stability_diagram
from .errors import (
    ConfigError,
    DefinitenessError,
    DomainError,
    GridError,
    ImexError,
    InitializationError,
    InstabilityError,
    InvalidSchemeError,
    ParameterError,
    SingularityError,
)
from .recipes import (
    FeasibilityResult,
    optimal_interval_params,
    recipe_delta,
    recipe_joint,
    recipe_sigma,
)
from .report import ConvergenceReport
from .spectra import SpectralSet, SplittingPair, generalized_eigenvalues, rescale, w_p_set
from .stepper import Bootstrap, MatrixSplitOperator, initialize, integrate, step

__all__ = [
    "__version__",
    "BACKEND",
    "ImExScheme",
    "generate_scheme",
    "check_zero_stability",
    "check_order_conditions",
    "StabilityDiagram",
    "stability_diagram",
    "contains",
    "all_inside",
    "root_modulus",
    "extreme_points",
    "SplittingPair",
    "SpectralSet",
    "w_p_set",
    "generalized_eigenvalues",
    "rescale",
    "FeasibilityResult",
    "recipe_delta",
    "recipe_sigma",
    "recipe_joint",
    "optimal_interval_params",
    "Bootstrap",
    "MatrixSplitOperator",
    "initialize",
    "step",
    "integrate",
    "ConvergenceReport",
    "ImexError",
    "ParameterError",
    "InvalidSchemeError",
    "SingularityError",
    "DefinitenessError",
    "InitializationError",
    "GridError",
    "DomainError",
    "InstabilityError",
    "ConfigError",
]
