"""AdaBoost with an exact best-column weak learner.

The training data is materialized as a margin matrix whose (i, j) entry is
label_i times the output of classifier j on example i, kept closed under
column negation so that the best edge is always nonnegative. The weight
update is the classical multiplicative rule; run_adaboost also evaluates the
functionals (edge, margin, log-exponential loss) used by the certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .md_core import MinmaxProblem, StepSchedule, UndefinedStepError
from .trace import IterationRecord, RunResult


def _close_under_negation(matrix: np.ndarray) -> np.ndarray:
    """Append the negation of every column whose negation is not present."""
    matrix = matrix + 0.0  # normalizes -0.0 so byte-level column lookups work
    present = {matrix[:, j].tobytes() for j in range(matrix.shape[1])}
    extra = []
    for j in range(matrix.shape[1]):
        neg = -matrix[:, j] + 0.0
        key = neg.tobytes()
        if key not in present:
            present.add(key)
            extra.append(neg)
    if not extra:
        return matrix
    return np.hstack([matrix, np.column_stack(extra)])


@dataclass(frozen=True)
class TrainingSet:
    """Examples, labels, and the negation-closed margin matrix.

    margins[i, j] = labels[i] * output of classifier j on example i, every
    entry in [-1, 1]. Raw features and labels are optional: instances defined
    directly at the matrix level carry only the margins.
    """

    margins: np.ndarray
    features: np.ndarray | None = None
    labels: np.ndarray | None = None

    def __post_init__(self) -> None:
        margins = np.asarray(self.margins, dtype=float)
        if margins.ndim != 2 or margins.size == 0:
            raise ValueError("margins must be a nonempty 2-D matrix")
        if not np.all(np.isfinite(margins)):
            raise ValueError("margin entries must be finite")
        if float(np.abs(margins).max()) > 1.0:
            raise ValueError("margin entries must lie in [-1, 1]")
        object.__setattr__(self, "margins", _close_under_negation(margins))

    @classmethod
    def from_outputs(cls, outputs, labels, features=None) -> "TrainingSet":
        """Build from classifier outputs (m x n, entries in [-1, 1]) and labels."""
        outputs = np.asarray(outputs, dtype=float)
        labels = np.asarray(labels, dtype=float)
        if outputs.ndim != 2:
            raise ValueError("outputs must be a 2-D matrix")
        if labels.shape != (outputs.shape[0],):
            raise ValueError("labels must have one entry per example")
        if not np.all(np.isfinite(outputs)) or not np.all(np.isfinite(labels)):
            raise ValueError("outputs and labels must be finite")
        if float(np.abs(outputs).max(initial=0.0)) > 1.0 or float(np.abs(labels).max(initial=0.0)) > 1.0:
            raise ValueError("outputs and labels must lie in [-1, 1]")
        margins = labels[:, None] * outputs
        return cls(margins=margins, features=features, labels=labels)

    @classmethod
    def from_margin_matrix(cls, margins) -> "TrainingSet":
        return cls(margins=np.asarray(margins, dtype=float))

    @property
    def num_examples(self) -> int:
        return self.margins.shape[0]

    @property
    def num_classifiers(self) -> int:
        return self.margins.shape[1]

    @property
    def lipschitz(self) -> float:
        return float(np.abs(self.margins).max())

    def to_minmax(self) -> MinmaxProblem:
        """The equivalent simplex-vs-simplex payoff problem."""
        return MinmaxProblem(payoff=self.margins)


def weak_learner(ts: TrainingSet, weights) -> int:
    """Index of the classifier with the largest weighted edge (lowest index on ties)."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (ts.num_examples,):
        raise ValueError("weights must have one entry per example")
    return int(np.argmax(ts.margins.T @ weights))


def edge(ts: TrainingSet, weights) -> float:
    """Largest weighted edge over all classifiers; nonnegative under negation closure."""
    weights = np.asarray(weights, dtype=float)
    return float(np.max(ts.margins.T @ weights))


def margin(ts: TrainingSet, lam) -> float:
    """Smallest per-example margin of the combination lam."""
    lam = np.asarray(lam, dtype=float)
    return float(np.min(ts.margins @ lam))


def log_exp_loss(ts: TrainingSet, coefficients) -> tuple[float, np.ndarray]:
    """Log of the mean exponentiated negative margin, and its gradient.

    Numerically stabilized by shifting the exponents; the gradient is
    -margins^T softmax(-margins @ coefficients).
    """
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.shape != (ts.num_classifiers,):
        raise ValueError("coefficients must have one entry per classifier")
    s = -(ts.margins @ coefficients)
    shift = float(s.max())
    e = np.exp(s - shift)
    total = float(e.sum())
    loss = shift + math.log(total / ts.num_examples)
    soft = e / total
    grad = -(ts.margins.T @ soft)
    return loss, grad


@dataclass
class BoostState:
    """Example weights, accumulated classifier coefficients, and step history."""

    weights: np.ndarray
    coefficients: np.ndarray
    steps: list[float] = field(default_factory=list)
    columns: list[int] = field(default_factory=list)
    step_total: float = 0.0

    @classmethod
    def initial(cls, ts: TrainingSet) -> "BoostState":
        m = ts.num_examples
        return cls(weights=np.full(m, 1.0 / m), coefficients=np.zeros(ts.num_classifiers))

    @property
    def iteration(self) -> int:
        return len(self.steps)

    def normalized_coefficients(self) -> np.ndarray | None:
        """Coefficients scaled to the simplex; None before the first nonzero step."""
        if self.step_total <= 0.0:
            return None
        return self.coefficients / self.step_total


def adaboost_step(state: BoostState, ts: TrainingSet, alpha: float) -> BoostState:
    """One boosting round: pick the best column, reweight, renormalize."""
    alpha = float(alpha)
    if alpha < 0.0 or not math.isfinite(alpha):
        raise ValueError("alpha must be a finite nonnegative step size")
    j = weak_learner(ts, state.weights)
    column = ts.margins[:, j]
    u = state.weights * np.exp(-alpha * column)
    s = float(np.sum(u))
    new_weights = u / s
    coefficients = state.coefficients.copy()
    coefficients[j] += alpha
    return BoostState(
        weights=new_weights,
        coefficients=coefficients,
        steps=state.steps + [alpha],
        columns=state.columns + [j],
        step_total=state.step_total + alpha,
    )


def run_adaboost(ts: TrainingSet, schedule: StepSchedule, iterations: int,
                 sink=None) -> RunResult:
    """Run AdaBoost, recording edge, loss-gradient norm, and margin per round.

    The recorded dual value is the margin of the normalized coefficient vector
    after the round. An undefined line-search step (edge equal to 1) stops the
    run early with the reason on the result.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    state = BoostState.initial(ts)
    records: list[IterationRecord] = []
    terminated: str | None = None
    best = math.inf
    for k in range(iterations):
        w = state.weights
        scores = ts.margins.T @ w
        j = int(np.argmax(scores))
        value = float(scores[j])
        _, grad = log_exp_loss(ts, state.coefficients)
        grad_norm = float(np.abs(grad).max())
        try:
            alpha = schedule.step_size(k, value=value, grad=ts.margins[:, j])
        except UndefinedStepError as exc:
            terminated = str(exc)
            break
        state = adaboost_step(state, ts, alpha)
        lam = state.normalized_coefficients()
        dval = margin(ts, lam) if lam is not None else None
        if value < best:
            best = value
        rec = IterationRecord(
            k=k,
            algorithm="adaboost",
            index=j,
            sign=1.0,
            alpha=alpha,
            primal=value,
            best_primal=best,
            dual=dval,
            grad_norm=grad_norm,
            x=w,
        )
        records.append(rec)
        if sink is not None:
            sink(rec)
    return RunResult(records=records, state=state, terminated=terminated)
