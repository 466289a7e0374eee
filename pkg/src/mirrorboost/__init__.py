"""Mirror descent with pluggable prox functions, step-size schedules, and
runtime convergence certificates. AdaBoost and incremental forward stagewise
regression are provided as exact instances of the same engine."""

from .bounds import (
    CertificateRecord,
    CertificateReport,
    RunConstants,
    check,
    constant_bound,
    dynamic_bound,
    md_gap_bound,
    polyak_bound,
)
from .boosting import (
    BoostState,
    TrainingSet,
    adaboost_step,
    edge,
    log_exp_loss,
    margin,
    run_adaboost,
    weak_learner,
)
from .md_core import (
    DualResponse,
    MinmaxProblem,
    MirrorDescentState,
    StepSchedule,
    UndefinedStepError,
    dual_response,
    dual_value,
    md_step,
)
from .md_core import run as run_mirror_descent
from .prox import ProxFunction, bregman, diameter_bound, entropy, euclidean, prox_solve
from .stagewise import (
    RegressionProblem,
    StagewiseState,
    correlation_objective,
    fs_step,
    least_squares_norm,
    optimal_shrinkage,
    run_fs,
    support_size,
)
from .trace import IterationRecord, RunResult, TraceHeader, read_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "BoostState",
    "CertificateRecord",
    "CertificateReport",
    "DualResponse",
    "IterationRecord",
    "MinmaxProblem",
    "MirrorDescentState",
    "ProxFunction",
    "RegressionProblem",
    "RunConstants",
    "RunResult",
    "StagewiseState",
    "StepSchedule",
    "TraceHeader",
    "TrainingSet",
    "UndefinedStepError",
    "adaboost_step",
    "bregman",
    "check",
    "constant_bound",
    "correlation_objective",
    "diameter_bound",
    "dual_response",
    "dual_value",
    "dynamic_bound",
    "edge",
    "entropy",
    "euclidean",
    "fs_step",
    "least_squares_norm",
    "log_exp_loss",
    "margin",
    "md_gap_bound",
    "md_step",
    "optimal_shrinkage",
    "polyak_bound",
    "prox_solve",
    "read_trace",
    "run_adaboost",
    "run_fs",
    "run_mirror_descent",
    "support_size",
    "weak_learner",
    "write_trace",
]
