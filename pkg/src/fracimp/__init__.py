"""fracimp: Caputo fractional Volterra integrodifferential equations with
Riemann-Liouville integrable impulses.

Solves the two-phase problem (differential dynamics between impulse windows,
implicitly prescribed state inside them) by Picard iteration in a weighted
norm, computes the contraction constants and weight thresholds that make the
iteration converge, and certifies Ulam-type stability bounds for candidate
approximate solutions.
"""

from .analysis import (
    AnalysisReport,
    HolderExponents,
    WeightedBounds,
    choose_holder_exponents,
    contraction_constant_basic,
    contraction_constant_weighted,
    holder_kernel_bound,
    stability_constant,
    theta_threshold_basic,
    theta_threshold_weighted,
)
from .errors import (
    ConfigError,
    DomainError,
    EvaluationError,
    ExpressionError,
    FracimpError,
    InsufficientResolutionError,
    NoThresholdError,
    RangeError,
    StructuralError,
    ThetaTooSmallError,
)
from .expressions import Expression, parse_expression
from .fractional import (
    caputo_derivative,
    inversion_roundtrip_check,
    rl_integral,
    rl_integral_adaptive,
)
from .grids import (
    BieleckiWeight,
    Grid,
    PiecewiseFunction,
    ProblemGrid,
    SampledFunction,
    Segment,
    bielecki_norm,
)
from .kernels import BACKEND
from .problem import (
    BranchTag,
    HypothesisData,
    ImpulsiveProblem,
    LipschitzEstimate,
    Partition,
    SamplingConfig,
    StabilityConfig,
    build_grid,
    classify,
    estimate_lipschitz,
    validate_partition,
)
from .solver import (
    SolverConfig,
    SolveTrace,
    apply_operator_T,
    fixed_point_residual,
    initial_iterate,
    solve_impulse_branch,
    solve_picard,
    solve_picard_staged,
)
from .special import (
    BetaArgs,
    PowerIntegralArgs,
    beta_fn,
    gamma_fn,
    mittag_leffler,
    weighted_power_integral,
)
from .ulam import (
    ResidualProfile,
    StabilityReport,
    certify,
    check_h4,
    residual_profile,
    residual_uncertainty,
)

__version__ = "0.1.0"
