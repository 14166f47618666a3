"""fracfam: fractional resolvent families C_a/S_a/P_a (a in (1,2]) for the
diagonal Dirichlet Laplacian, grid fractional calculus, identity verification,
and a damped-Picard mild-solution solver for semilinear fractional Volterra
integrodifferential problems."""

from .specfun import (
    MLParams,
    PoleError,
    WrightParams,
    g_kernel,
    gamma_fn,
    mittag_leffler,
    subordination_density,
    wright_phi,
)
from .fracalc import (
    GridFunction,
    LaplaceEstimate,
    TimeGrid,
    caputo_derivative,
    numeric_laplace,
    rl_derivative,
    rl_integral,
    singular_convolution,
)
from .spectral import (
    NodalField,
    QuadratureError,
    SpectralField,
    SpectralOperator,
    apply_fractional_power,
    apply_operator,
    apply_resolvent,
    fractional_power_via_integral,
    sine_forward,
    sine_inverse,
)
from .families import (
    DEFAULT_CHENLI_MATRIX,
    CheckRow,
    FamilyEvaluation,
    FamilyKind,
    VerificationReport,
    apply_family,
    apply_family_subordinated,
    brute_force_volterra,
    brute_force_volterra_matrix,
    family_bound_witness,
    family_symbol,
    family_symbol_table,
    matrix_family,
    matrix_family_table,
    verify_alpha_resolvent_equation,
    verify_family_identities,
)
from .solver import (
    ForcingTerm,
    ManufacturedSolution,
    NonConvergenceError,
    NonlinearityDescriptor,
    ProblemSpec,
    SolveResult,
    linear_mild_solution,
    make_manufactured,
    picard_solve,
    volterra_form_residual,
)

__version__ = "0.1.0"

__all__ = [
    "MLParams",
    "PoleError",
    "WrightParams",
    "g_kernel",
    "gamma_fn",
    "mittag_leffler",
    "subordination_density",
    "wright_phi",
    "GridFunction",
    "LaplaceEstimate",
    "TimeGrid",
    "caputo_derivative",
    "numeric_laplace",
    "rl_derivative",
    "rl_integral",
    "singular_convolution",
    "NodalField",
    "QuadratureError",
    "SpectralField",
    "SpectralOperator",
    "apply_fractional_power",
    "apply_operator",
    "apply_resolvent",
    "fractional_power_via_integral",
    "sine_forward",
    "sine_inverse",
    "DEFAULT_CHENLI_MATRIX",
    "CheckRow",
    "FamilyEvaluation",
    "FamilyKind",
    "VerificationReport",
    "apply_family",
    "apply_family_subordinated",
    "brute_force_volterra",
    "brute_force_volterra_matrix",
    "family_bound_witness",
    "family_symbol",
    "family_symbol_table",
    "matrix_family",
    "matrix_family_table",
    "verify_alpha_resolvent_equation",
    "verify_family_identities",
    "ForcingTerm",
    "ManufacturedSolution",
    "NonConvergenceError",
    "NonlinearityDescriptor",
    "ProblemSpec",
    "SolveResult",
    "linear_mild_solution",
    "make_manufactured",
    "picard_solve",
    "volterra_form_residual",
    "__version__",
]
