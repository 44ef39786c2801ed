"""Area-preserving inverse-curvature flow on convex closed plane curves.

The evolving state is the radius-of-curvature profile on a uniform
tangent-angle grid; the engine integrates the nonlocal parabolic flow
that keeps the enclosed area fixed while shrinking the perimeter, and
the diagnostics verify the conserved and monotone quantities, explicit
bounds, and the exponential approach to the limiting circle.
"""

from .errors import (
    ClosureViolation,
    ConfigError,
    ConvexityViolation,
    FlowError,
    InsufficientData,
    NumericalBlowup,
)
from .state import (
    CurveState,
    FlowParams,
    GeometricBounds,
    from_raw,
    make_circle,
    make_ellipse,
    make_fourier,
)
from .geometry import (
    EmbeddedCurve,
    area,
    closure_residual,
    initial_bounds,
    integrate_periodic,
    lambda_nonlocal,
    length,
    polygon_perimeter,
    reconstruct,
    scaled_to_area,
    second_derivative,
    shoelace_area,
    support_function,
)
from .engine import StepReport, rhs_phi, rhs_rho, run, stable_dt, step
from .diagnostics import (
    ClaimCheck,
    DiagnosticsLog,
    GeometricSummary,
    VerdictReport,
    build_verdict,
    check_bounds,
    check_derivative_bounds,
    check_length_flux,
    check_limit_inequality,
    fit_decay_rate,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "ClaimCheck",
    "ClosureViolation",
    "ConfigError",
    "ConvexityViolation",
    "CurveState",
    "DiagnosticsLog",
    "EmbeddedCurve",
    "FlowError",
    "FlowParams",
    "GeometricBounds",
    "GeometricSummary",
    "InsufficientData",
    "NumericalBlowup",
    "StepReport",
    "VerdictReport",
    "area",
    "build_verdict",
    "check_bounds",
    "check_derivative_bounds",
    "check_length_flux",
    "check_limit_inequality",
    "closure_residual",
    "fit_decay_rate",
    "from_raw",
    "initial_bounds",
    "integrate_periodic",
    "lambda_nonlocal",
    "length",
    "make_circle",
    "make_ellipse",
    "make_fourier",
    "polygon_perimeter",
    "reconstruct",
    "rhs_phi",
    "rhs_rho",
    "run",
    "scaled_to_area",
    "second_derivative",
    "shoelace_area",
    "stable_dt",
    "step",
    "summarize",
    "support_function",
]
