"""Incremental forward stagewise regression.

Each round moves the residual along the design column most correlated with
it, by a shrinkage amount, and accrues the same amount on the corresponding
coefficient. The objective tracked per round is the largest absolute
column-residual correlation, which is also the max-norm of the least-squares
loss gradient at the current coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .md_core import MinmaxProblem, StepSchedule, UndefinedStepError
from .trace import IterationRecord, RunResult

# coefficients below this magnitude count as zero in the support size
NNZ_TOLERANCE = 1e-14


@dataclass(frozen=True)
class RegressionProblem:
    design: np.ndarray
    response: np.ndarray

    def __post_init__(self) -> None:
        design = np.asarray(self.design, dtype=float)
        response = np.asarray(self.response, dtype=float)
        if design.ndim != 2 or design.size == 0:
            raise ValueError("design must be a nonempty 2-D matrix")
        if response.shape != (design.shape[0],):
            raise ValueError("response must have one entry per row of the design")
        if not np.all(np.isfinite(design)) or not np.all(np.isfinite(response)):
            raise ValueError("design and response must be finite")
        if np.any(np.linalg.norm(design, axis=0) == 0.0):
            raise ValueError("design must not contain an all-zero column")
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "response", response)

    @property
    def num_samples(self) -> int:
        return self.design.shape[0]

    @property
    def num_columns(self) -> int:
        return self.design.shape[1]

    @cached_property
    def column_norms(self) -> np.ndarray:
        return np.linalg.norm(self.design, axis=0)

    @cached_property
    def design_norm(self) -> float:
        """Largest column l2 norm."""
        return float(self.column_norms.max())

    def to_minmax(self) -> MinmaxProblem:
        """The residual-space formulation: minimize the max absolute correlation."""
        return MinmaxProblem(payoff=self.design, primal_domain="residual-space",
                             dual_domain="l1-ball")


@dataclass
class StagewiseState:
    residual: np.ndarray
    coefficients: np.ndarray
    iteration: int = 0

    @classmethod
    def initial(cls, rp: RegressionProblem) -> "StagewiseState":
        return cls(residual=rp.response.copy(), coefficients=np.zeros(rp.num_columns))


def correlation_objective(rp: RegressionProblem, residual) -> float:
    """Largest absolute correlation between the residual and a design column."""
    residual = np.asarray(residual, dtype=float)
    return float(np.max(np.abs(rp.design.T @ residual)))


def fs_step(state: StagewiseState, rp: RegressionProblem, eps: float) -> StagewiseState:
    """One stagewise round; ties on the correlation resolve to the lowest index."""
    eps = float(eps)
    if eps < 0.0 or not math.isfinite(eps):
        raise ValueError("eps must be a finite nonnegative shrinkage")
    corr = rp.design.T @ state.residual
    magnitudes = np.abs(corr)
    j = int(np.argmax(magnitudes))
    sign = float(np.sign(corr[j]))
    grad = sign * rp.design[:, j]
    residual = state.residual - eps * grad
    coefficients = state.coefficients.copy()
    coefficients[j] += eps * sign
    return StagewiseState(residual=residual, coefficients=coefficients,
                          iteration=state.iteration + 1)


def support_size(coefficients) -> int:
    return int(np.count_nonzero(np.abs(np.asarray(coefficients, dtype=float)) > NNZ_TOLERANCE))


def least_squares_norm(rp: RegressionProblem) -> float:
    """l2 norm of the least-squares fit (the projection of the response onto
    the column space), computed by a rank-aware direct solve."""
    beta, _, _, _ = np.linalg.lstsq(rp.design, rp.response, rcond=None)
    return float(np.linalg.norm(rp.design @ beta))


def optimal_shrinkage(rp: RegressionProblem, iterations: int,
                      projection_norm: float | None = None) -> float:
    """Shrinkage tuned a priori to a planned number of iterations.

    `projection_norm` is the l2 norm of the least-squares fit; when it is not
    supplied, the response norm is used as an upper bound.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    if projection_norm is None:
        projection_norm = float(np.linalg.norm(rp.response))
    return projection_norm / (rp.design_norm * math.sqrt(iterations))


def run_fs(rp: RegressionProblem, schedule: StepSchedule, iterations: int,
           sink=None) -> RunResult:
    """Run forward stagewise regression, one record per round.

    The run stops early, with the reason on the result, when the residual
    becomes exactly orthogonal to every column (the objective is 0 and no
    further round can move).
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    state = StagewiseState.initial(rp)
    records: list[IterationRecord] = []
    terminated: str | None = None
    best = math.inf
    for k in range(iterations):
        r = state.residual
        corr = rp.design.T @ r
        magnitudes = np.abs(corr)
        j = int(np.argmax(magnitudes))
        value = float(magnitudes[j])
        if value == 0.0:
            terminated = "residual is orthogonal to every column; optimum reached"
            break
        sign = float(np.sign(corr[j]))
        grad = sign * rp.design[:, j]
        try:
            eps_k = schedule.step_size(k, value=value, grad=grad)
        except UndefinedStepError as exc:
            terminated = str(exc)
            break
        l1 = float(np.sum(np.abs(state.coefficients)))
        l0 = support_size(state.coefficients)
        state = fs_step(state, rp, eps_k)
        if value < best:
            best = value
        rec = IterationRecord(
            k=k,
            algorithm="stagewise",
            index=j,
            sign=sign,
            alpha=eps_k,
            primal=value,
            best_primal=best,
            dual=None,
            grad_norm=None,
            l1=l1,
            l0=l0,
            x=r,
        )
        records.append(rec)
        if sink is not None:
            sink(rec)
    return RunResult(records=records, state=state, terminated=terminated)
