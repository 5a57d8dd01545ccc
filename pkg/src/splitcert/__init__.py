"""First-order splitting solvers with per-run step-inequality certificates
and closed-form rate envelopes."""

from .algorithms import (
    ConstantStepSchedule,
    ObjectiveSpec,
    PolyStepSchedule,
    RunTrace,
    best_iterate,
    douglas_rachford_step,
    forward_backward_step,
    incremental_cycle,
    run_douglas_rachford,
    run_forward_backward,
    run_incremental,
    run_projected_subgradient,
    run_smooth_fb,
)
from .analysis import bound_curve, compare_bounds, fit_slopes
from .certify import (
    CertificateConstants,
    FejerCertificate,
    TestPoint,
    certify,
    certify_run,
    constants_for_trace,
    observed_B,
)
from .errors import ConfigError, ContractViolation, DomainError
from .numerics import as_point, inner, norm, norm_sq
from .oracles import (
    BallIndicator,
    BoxIndicator,
    EpsSubgradient,
    FunctionOracle,
    Hinge,
    Linear,
    Quadratic,
    ScaledL1,
    ScaledSqNorm,
    Zero,
    eps_subgradient_at_shifted_point,
    project_ball,
    project_box,
    prox_l1,
    prox_quadratic,
)
from .problems import Problem, catalog, get_problem, reference_solve
from .rates import (
    PolySchedule,
    envelope_constant,
    gap_bound_from_sequences,
    gap_bound_poly,
    gap_bound_zero_error,
    weighted_tail_sum,
    weighted_tail_sum_bound,
)

__version__ = "0.1.0"
