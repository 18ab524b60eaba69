"""Backward (nabla) calculus for fuzzy-number-valued functions on time
scales: jump operators, level-set arithmetic, generalized differences,
derivative estimation with case classification, rule checkers and a small
definition language with a CLI."""

from .errors import (
    AlphaOutOfRange,
    DslSyntaxError,
    EmptySide,
    EndpointDerivativeMissing,
    FuzzyNablaError,
    GhNonexistent,
    GridMismatch,
    LengthDirectionUndetermined,
    LimitDisagreement,
    NotInDomain,
    NotInTimeScale,
    OrderViolation,
    SignHypothesisFailed,
    ValidationError,
)
from .timescale import (
    ArithmeticGrid,
    ClosedInterval,
    ExplicitPoints,
    GeometricGrid,
    PointClass,
    ReciprocalGrid,
    Side,
    Stream,
    TimeScale,
)
from .fuzzy import (
    FuzzyNumber,
    GhCase,
    GhDiffResult,
    Interval,
    add,
    alpha_grid,
    crisp,
    gh_diff,
    h_diff,
    hausdorff,
    scalar_mul,
    triangular,
)
from .nabla import (
    DEFAULT_CONFIG,
    DerivativeResult,
    DiffCase,
    EndpointReport,
    FuzzyFunction,
    ProbeConfig,
    check_level_consistency,
    check_rho_identity,
    derivative_report,
    endpoint_derivatives,
    nabla_gh,
    nabla_scalar,
)
from .rules import (
    HypothesisCheck,
    RuleReport,
    Tag,
    Verdict,
    default_residual_tol,
    len_direction,
    product_fuzzy,
    product_interval,
    sum_rule,
    tag_i_ii,
)
from .dsl import (
    bind_function,
    eval_expr,
    eval_function,
    parse_function,
    parse_scalar,
    parse_timescale,
    print_canonical,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaOutOfRange",
    "ArithmeticGrid",
    "ClosedInterval",
    "DEFAULT_CONFIG",
    "DerivativeResult",
    "DiffCase",
    "DslSyntaxError",
    "EmptySide",
    "EndpointDerivativeMissing",
    "EndpointReport",
    "ExplicitPoints",
    "FuzzyFunction",
    "FuzzyNablaError",
    "FuzzyNumber",
    "GeometricGrid",
    "GhCase",
    "GhDiffResult",
    "GhNonexistent",
    "GridMismatch",
    "HypothesisCheck",
    "Interval",
    "LengthDirectionUndetermined",
    "LimitDisagreement",
    "NotInDomain",
    "NotInTimeScale",
    "OrderViolation",
    "PointClass",
    "ProbeConfig",
    "ReciprocalGrid",
    "RuleReport",
    "Side",
    "SignHypothesisFailed",
    "Stream",
    "Tag",
    "TimeScale",
    "ValidationError",
    "Verdict",
    "add",
    "alpha_grid",
    "bind_function",
    "check_level_consistency",
    "check_rho_identity",
    "crisp",
    "default_residual_tol",
    "derivative_report",
    "endpoint_derivatives",
    "eval_expr",
    "eval_function",
    "gh_diff",
    "h_diff",
    "hausdorff",
    "len_direction",
    "nabla_gh",
    "nabla_scalar",
    "parse_function",
    "parse_scalar",
    "parse_timescale",
    "print_canonical",
    "product_fuzzy",
    "product_interval",
    "scalar_mul",
    "sum_rule",
    "tag_i_ii",
    "triangular",
]
