"""Mirror descent for minmax objectives over a payoff matrix.

The objective is f(x) = max over lam in Q of x^T A lam. The dual response
oracle returns a maximizing vertex of Q, which is simultaneously the
subgradient oracle: g = A lam. Running the engine accumulates a step-size
weighted average of the dual responses, whose value certifies the primal
progress through weak duality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .prox import ProxFunction, prox_solve
from .trace import IterationRecord, RunResult

PRIMAL_SIMPLEX = "simplex"
PRIMAL_RESIDUAL = "residual-space"
DUAL_SIMPLEX = "simplex"
DUAL_L1_BALL = "l1-ball"


class UndefinedStepError(RuntimeError):
    """A schedule cannot produce a valid step at the current iterate."""


@dataclass(frozen=True)
class MinmaxProblem:
    """min over the primal domain of max_{lam in Q} x^T A lam.

    primal_domain "simplex" pairs with the l1 norm (compact, so the dual value
    min_i (A lam)_i exists); "residual-space" is an affine subspace measured in
    l2 (unbounded, no dual value). dual_domain "simplex" restricts lam to
    probability vectors, "l1-ball" to vectors of l1 norm at most one.
    """

    payoff: np.ndarray
    primal_domain: str = PRIMAL_SIMPLEX
    dual_domain: str = DUAL_SIMPLEX

    def __post_init__(self) -> None:
        payoff = np.asarray(self.payoff, dtype=float)
        if payoff.ndim != 2 or payoff.size == 0:
            raise ValueError("payoff must be a nonempty 2-D matrix")
        if not np.all(np.isfinite(payoff)):
            raise ValueError("payoff entries must be finite")
        object.__setattr__(self, "payoff", payoff)
        if self.primal_domain not in (PRIMAL_SIMPLEX, PRIMAL_RESIDUAL):
            raise ValueError(f"unknown primal domain: {self.primal_domain!r}")
        if self.dual_domain not in (DUAL_SIMPLEX, DUAL_L1_BALL):
            raise ValueError(f"unknown dual domain: {self.dual_domain!r}")

    @property
    def m(self) -> int:
        return self.payoff.shape[0]

    @property
    def n(self) -> int:
        return self.payoff.shape[1]

    def lipschitz(self) -> float:
        """Bound on the dual norm of any subgradient A lam, lam in Q.

        Simplex primal domain: the reference norm is l1, its dual is the max
        norm, and every response is a signed column, so the constant is the
        largest entry magnitude. Residual-space primal domain: the reference
        norm is l2 and the constant is the largest column l2 norm.
        """
        if self.primal_domain == PRIMAL_SIMPLEX:
            return float(np.abs(self.payoff).max())
        return float(np.linalg.norm(self.payoff, axis=0).max())


@dataclass(frozen=True)
class DualResponse:
    index: int
    sign: float
    value: float
    lam: np.ndarray
    grad: np.ndarray


def dual_response(problem: MinmaxProblem, x) -> DualResponse:
    """Maximize x^T A lam over Q; ties resolve to the lowest column index.

    Returns the maximizing vertex lam (a signed coordinate vector), the
    achieved value f(x), and the subgradient g = A lam.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.m,):
        raise ValueError(f"x must have shape ({problem.m},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    if problem.primal_domain == PRIMAL_SIMPLEX:
        if float(x.min()) < -1e-9 or abs(float(x.sum()) - 1.0) > 1e-6:
            raise ValueError("x must lie on the probability simplex")
    scores = problem.payoff.T @ x
    lam = np.zeros(problem.n)
    if problem.dual_domain == DUAL_SIMPLEX:
        j = int(np.argmax(scores))
        sign = 1.0
        value = float(scores[j])
        grad = problem.payoff[:, j]
    else:
        magnitudes = np.abs(scores)
        j = int(np.argmax(magnitudes))
        sign = float(np.sign(scores[j]))
        value = float(magnitudes[j])
        grad = sign * problem.payoff[:, j]
    lam[j] = sign
    return DualResponse(index=j, sign=sign, value=value, lam=lam, grad=grad)


def dual_value(problem: MinmaxProblem, lam) -> float | None:
    """min over the primal domain of x^T A lam; None when the domain is unbounded."""
    if problem.primal_domain != PRIMAL_SIMPLEX:
        return None
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (problem.n,):
        raise ValueError(f"lam must have shape ({problem.n},), got {lam.shape}")
    return float(np.min(problem.payoff @ lam))


@dataclass
class MirrorDescentState:
    """Iterate, dual running sums, and the best primal value seen so far."""

    k: int
    x: np.ndarray
    dual_weighted_sum: np.ndarray
    step_sum: float
    best_value: float
    best_index: int

    @classmethod
    def initial(cls, x0, dual_dim: int) -> "MirrorDescentState":
        x0 = np.asarray(x0, dtype=float)
        return cls(
            k=0,
            x=x0,
            dual_weighted_sum=np.zeros(dual_dim),
            step_sum=0.0,
            best_value=math.inf,
            best_index=-1,
        )

    @property
    def dual_average(self) -> np.ndarray | None:
        """Step-size weighted average of dual responses; None before the first
        nonzero step, where the average would be 0/0."""
        if self.step_sum <= 0.0:
            return None
        return self.dual_weighted_sum / self.step_sum


def md_step(state: MirrorDescentState, grad, alpha: float, prox_fn: ProxFunction,
            lam_tilde=None, value: float | None = None) -> MirrorDescentState:
    """One prox step from the current iterate.

    `lam_tilde` (the dual response that produced `grad`) feeds the dual running
    sums; `value` (the primal objective at the current iterate) feeds the
    best-so-far tracking. Both are optional so the step can be driven manually.
    """
    alpha = float(alpha)
    if alpha < 0.0 or not math.isfinite(alpha):
        raise ValueError("alpha must be a finite nonnegative step size")
    grad = np.asarray(grad, dtype=float)
    if not np.all(np.isfinite(grad)):
        raise ValueError("grad must be finite")
    new_x = prox_solve(prox_fn, grad, state.x, alpha)
    dual_sum = state.dual_weighted_sum
    step_sum = state.step_sum
    if lam_tilde is not None:
        dual_sum = dual_sum + alpha * np.asarray(lam_tilde, dtype=float)
        step_sum = step_sum + alpha
    best_value = state.best_value
    best_index = state.best_index
    if value is not None and value < best_value:
        best_value = float(value)
        best_index = state.k
    return MirrorDescentState(
        k=state.k + 1,
        x=new_x,
        dual_weighted_sum=dual_sum,
        step_sum=step_sum,
        best_value=best_value,
        best_index=best_index,
    )


@dataclass(frozen=True)
class StepSchedule:
    """Step-size rule; emitted steps are always nonnegative.

    Kinds: "constant" (tuned to a fixed number of planned steps), "dynamic"
    (horizon-free decay), "polyak" (requires the optimal value), "fixed"
    (a plain constant value), "edge-linesearch" (the classical boosting
    line-search step computed from the current edge), and "sequence"
    (user-supplied values).
    """

    kind: str
    alpha: float | None = None
    lipschitz: float | None = None
    diameter: float | None = None
    f_star: float | None = None
    edge_cap: float = 1e-12
    sequence: tuple[float, ...] | None = None

    @classmethod
    def constant(cls, lipschitz: float, diameter: float, num_steps: int) -> "StepSchedule":
        """Constant step tuned for a planned run of `num_steps` iterations."""
        if lipschitz <= 0.0 or diameter <= 0.0 or num_steps < 1:
            raise ValueError("constant schedule needs lipschitz > 0, diameter > 0, num_steps >= 1")
        alpha = math.sqrt(2.0 * diameter / num_steps) / lipschitz
        return cls(kind="constant", alpha=alpha, lipschitz=float(lipschitz),
                   diameter=float(diameter))

    @classmethod
    def dynamic(cls, lipschitz: float, diameter: float) -> "StepSchedule":
        if lipschitz <= 0.0 or diameter <= 0.0:
            raise ValueError("dynamic schedule needs lipschitz > 0 and diameter > 0")
        return cls(kind="dynamic", lipschitz=float(lipschitz), diameter=float(diameter))

    @classmethod
    def polyak(cls, f_star: float | None) -> "StepSchedule":
        if f_star is None:
            raise ValueError("the polyak schedule requires the optimal value f_star")
        return cls(kind="polyak", f_star=float(f_star))

    @classmethod
    def fixed(cls, alpha: float) -> "StepSchedule":
        if alpha < 0.0:
            raise ValueError("fixed step size must be nonnegative")
        return cls(kind="fixed", alpha=float(alpha))

    @classmethod
    def edge_linesearch(cls, edge_cap: float = 1e-12) -> "StepSchedule":
        return cls(kind="edge-linesearch", edge_cap=float(edge_cap))

    @classmethod
    def from_sequence(cls, alphas) -> "StepSchedule":
        seq = tuple(float(a) for a in alphas)
        if any(a < 0.0 for a in seq):
            raise ValueError("step sizes must be nonnegative")
        return cls(kind="sequence", sequence=seq)

    def step_size(self, k: int, value: float | None = None, grad=None) -> float:
        if self.kind in ("constant", "fixed"):
            return self.alpha
        if self.kind == "dynamic":
            return math.sqrt(2.0 * self.diameter / (k + 1.0)) / self.lipschitz
        if self.kind == "polyak":
            if value is None or grad is None:
                raise ValueError("polyak step needs the objective value and subgradient")
            g = np.asarray(grad, dtype=float)
            gsq = float(g @ g)
            if gsq == 0.0:
                return 0.0
            return max(0.0, (float(value) - self.f_star) / gsq)
        if self.kind == "edge-linesearch":
            if value is None:
                raise ValueError("edge line-search needs the current edge value")
            r = float(value)
            if r >= 1.0:
                raise UndefinedStepError(
                    "edge reached 1 (a single column is perfect); line-search step undefined"
                )
            if r <= -1.0 or r < 0.0:
                raise UndefinedStepError(
                    "edge is negative; line-search step undefined without negation closure"
                )
            r = min(r, 1.0 - self.edge_cap)
            return 0.5 * math.log((1.0 + r) / (1.0 - r))
        if self.kind == "sequence":
            if k >= len(self.sequence):
                raise ValueError(f"step sequence exhausted at iteration {k}")
            return self.sequence[k]
        raise ValueError(f"unknown schedule kind: {self.kind!r}")

    def describe(self) -> dict:
        out = {"kind": self.kind}
        for name in ("alpha", "lipschitz", "diameter", "f_star"):
            v = getattr(self, name)
            if v is not None:
                out[name] = float(v)
        if self.kind == "edge-linesearch":
            out["edge_cap"] = self.edge_cap
        if self.sequence is not None:
            out["length"] = len(self.sequence)
        return out


def run(problem: MinmaxProblem, schedule: StepSchedule, prox_fn: ProxFunction,
        iterations: int, x0=None, sink=None) -> RunResult:
    """Run mirror descent, emitting one record per iteration.

    Each record carries the pre-step iterate values (objective, chosen column)
    and the post-step dual average value when it exists. A schedule that cannot
    produce a step stops the run early and the reason is reported on the
    result; records produced so far are kept.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    if prox_fn.dim != problem.m:
        raise ValueError("prox dimension must match the primal dimension")
    if x0 is None:
        if problem.primal_domain != PRIMAL_SIMPLEX:
            raise ValueError("x0 is required for a residual-space primal domain")
        x0 = np.full(problem.m, 1.0 / problem.m)
    else:
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (problem.m,):
            raise ValueError(f"x0 must have shape ({problem.m},), got {x0.shape}")
    state = MirrorDescentState.initial(x0, problem.n)
    records: list[IterationRecord] = []
    terminated: str | None = None
    for k in range(iterations):
        x = state.x
        resp = dual_response(problem, x)
        try:
            alpha = schedule.step_size(k, value=resp.value, grad=resp.grad)
        except UndefinedStepError as exc:
            terminated = str(exc)
            break
        state = md_step(state, resp.grad, alpha, prox_fn,
                        lam_tilde=resp.lam, value=resp.value)
        avg = state.dual_average
        dval = dual_value(problem, avg) if avg is not None else None
        rec = IterationRecord(
            k=k,
            algorithm="mirror-descent",
            index=resp.index,
            sign=resp.sign,
            alpha=alpha,
            primal=resp.value,
            best_primal=state.best_value,
            dual=dval,
            grad_norm=None,
            x=x,
        )
        records.append(rec)
        if sink is not None:
            sink(rec)
    return RunResult(records=records, state=state, terminated=terminated)
