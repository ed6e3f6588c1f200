"""Sequential convex programming with monotone line search for DC-constrained problems."""

from .balls import BallConstraint, Linearization, linearize, surrogate_value, to_ball
from .diagnostics import (
    RateFit,
    StationarityReport,
    audit_trace,
    fit_linear_rate,
    stationarity_residual,
    surrogate_identity_check,
)
from .errors import (
    ConstraintQualificationError,
    InvalidArgument,
    InvalidInstance,
    NumericalFailure,
    UnsupportedConfiguration,
)
from .models import CsInstance, build_problem, generate_instance, min_norm_init
from .problem import (
    ConstraintFunction,
    ConvexRegularizer,
    DCProblem,
    SmoothTerm,
    eval_F,
    subgradient_p2,
)
from .solver import SolveResult, SolverConfig, run_scp, run_scp_ls
from .subproblem import soft_threshold, solve_lin_ball, solve_quad_ball

__version__ = "0.1.0"
