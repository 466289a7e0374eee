"""Runtime convergence certificates.

Every bound the runners are entitled to is evaluated numerically against the
observed trace, one certificate record per (iteration, bound). A record
passes when observed <= bound + TOLERANCE; when a bound cannot be evaluated
(missing constants, undefined dual average, unreached horizon) the record is
marked not evaluable rather than silently passed. The checker is a pure
function of the trace and the problem constants, so re-running it on a
serialized trace reproduces the report exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

TOLERANCE = 1e-9

# certificate tags
WEAK_DUALITY = "weak-duality"          # dual average value <= best primal value
GAP_RUNNING = "gap-running"            # duality gap vs the step-sum bound
GAP_CONSTANT = "gap-constant"          # duality gap vs the tuned-constant closed form
GAP_DYNAMIC = "gap-dynamic"            # duality gap vs the dynamic-schedule closed form
OPT_RUNNING = "opt-running"            # best value minus f* vs the step-sum bound
OPT_POLYAK = "opt-polyak"              # best value minus f* vs the polyak closed form
OPT_HORIZON = "opt-horizon"            # best value minus f* vs the tuned-shrinkage closed form
SPARSITY_L1 = "sparsity-l1"            # coefficient l1 norm vs iteration count times shrinkage
SPARSITY_L0 = "sparsity-l0"            # coefficient support size vs iteration count


def _ratio_bound(offset: float, lipschitz: float, step_sum: float, step_sq_sum: float) -> float:
    return (offset + 0.5 * lipschitz * lipschitz * step_sq_sum) / step_sum


def md_gap_bound(diameter: float, lipschitz: float, steps) -> float:
    """Step-sum bound (diameter + L^2/2 * sum a_i^2) / sum a_i.

    `diameter` is the Bregman diameter of the primal domain for duality-gap
    certificates, or the Bregman distance from the start to a reference point
    when the bound is used against a known optimal value.
    """
    sa = 0.0
    sa2 = 0.0
    for a in steps:
        sa += a
        sa2 += a * a
    if sa <= 0.0:
        raise ValueError("the step-sum bound is undefined for a zero step-size sum")
    return _ratio_bound(diameter, lipschitz, sa, sa2)


def constant_bound(diameter: float, lipschitz: float, num_steps: int) -> float:
    """Closed form of the step-sum bound under the tuned constant schedule."""
    if num_steps < 1:
        raise ValueError("num_steps must be at least 1")
    return lipschitz * math.sqrt(2.0 * diameter / num_steps)


def dynamic_bound(diameter: float, lipschitz: float, k: int) -> float:
    """Closed-form bound for the dynamic schedule, covering iterates 0..k."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return (lipschitz * math.sqrt(0.5 * diameter) * (2.0 + math.log(k + 1.0))
            / (2.0 * (math.sqrt(k + 2.0) - 1.0)))


def polyak_bound(lipschitz: float, dist0: float, k: int) -> float:
    """Closed-form bound for the polyak schedule, covering iterates 0..k;
    dist0 is the l2 distance from the start to an optimum."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return lipschitz * dist0 / math.sqrt(k + 1.0)


@dataclass(frozen=True)
class RunConstants:
    """Problem constants a trace needs for certificate evaluation."""

    algorithm: str
    schedule_kind: str
    lipschitz: float | None = None
    diameter: float | None = None
    f_star: float | None = None
    dist0: float | None = None
    eps: float | None = None
    horizon: int | None = None
    dual_defined: bool = True

    @classmethod
    def from_header(cls, header) -> "RunConstants":
        return cls(
            algorithm=header.algorithm,
            schedule_kind=header.schedule_kind,
            lipschitz=header.lipschitz,
            diameter=header.diameter,
            f_star=header.f_star,
            dist0=header.dist0,
            eps=header.eps,
            horizon=header.horizon,
            dual_defined=header.dual_defined,
        )


@dataclass(frozen=True)
class CertificateRecord:
    k: int
    tag: str
    observed: float | None
    bound: float | None
    slack: float | None
    passed: bool | None
    note: str = ""

    @property
    def evaluable(self) -> bool:
        return self.passed is not None

    def to_dict(self) -> dict:
        return {
            "k": int(self.k),
            "tag": self.tag,
            "observed": None if self.observed is None else float(self.observed),
            "bound": None if self.bound is None else float(self.bound),
            "slack": None if self.slack is None else float(self.slack),
            "passed": self.passed,
            "note": self.note,
        }


def _evaluated(k: int, tag: str, observed: float, bound: float) -> CertificateRecord:
    slack = bound - observed
    return CertificateRecord(k=k, tag=tag, observed=observed, bound=bound,
                             slack=slack, passed=bool(observed <= bound + TOLERANCE))


def _not_evaluable(k: int, tag: str, note: str) -> CertificateRecord:
    return CertificateRecord(k=k, tag=tag, observed=None, bound=None,
                             slack=None, passed=None, note=note)


@dataclass
class CertificateReport:
    records: list[CertificateRecord] = field(default_factory=list)

    def summary(self) -> dict:
        passed = sum(1 for r in self.records if r.passed is True)
        failed = sum(1 for r in self.records if r.passed is False)
        skipped = sum(1 for r in self.records if r.passed is None)
        return {
            "total": len(self.records),
            "passed": passed,
            "failed": failed,
            "not_evaluable": skipped,
            "all_passed": failed == 0,
        }

    @property
    def all_passed(self) -> bool:
        return all(r.passed is not False for r in self.records)

    def failures(self) -> list[CertificateRecord]:
        return [r for r in self.records if r.passed is False]

    def by_tag(self) -> dict[str, dict]:
        out: dict[str, dict] = {}
        for r in self.records:
            entry = out.setdefault(r.tag, {"total": 0, "passed": 0, "failed": 0,
                                           "not_evaluable": 0, "min_slack": None})
            entry["total"] += 1
            if r.passed is True:
                entry["passed"] += 1
            elif r.passed is False:
                entry["failed"] += 1
            else:
                entry["not_evaluable"] += 1
            if r.slack is not None:
                if entry["min_slack"] is None or r.slack < entry["min_slack"]:
                    entry["min_slack"] = r.slack
        return out

    def slacks_by_iteration(self) -> dict[int, dict[str, float]]:
        out: dict[int, dict[str, float]] = {}
        for r in self.records:
            if r.slack is not None:
                out.setdefault(r.k, {})[r.tag] = r.slack
        return out

    def to_dict(self) -> dict:
        return {
            "summary": self.summary(),
            "by_tag": self.by_tag(),
            "records": [r.to_dict() for r in self.records],
        }


def check(records, constants: RunConstants) -> CertificateReport:
    """Evaluate every applicable bound against an iteration trace.

    The record produced at iteration k pairs the best pre-step value over
    iterations 0..k with the post-step dual average (or the known optimal
    value) and with the bound built from step sizes 0..k. Closed forms tied
    to a planned horizon yield a single record at the final planned iteration.
    """
    records = list(records)
    if not records:
        raise ValueError("cannot check an empty trace")
    report = CertificateReport()
    algo = constants.algorithm
    missing_dl = constants.diameter is None or constants.lipschitz is None

    step_sum = 0.0
    step_sq_sum = 0.0
    best_grad_norm = math.inf
    dual_ref = " (dual average undefined: zero step-size mass)"

    for rec in records:
        t = rec.k
        step_sum += rec.alpha
        step_sq_sum += rec.alpha * rec.alpha
        if rec.grad_norm is not None and rec.grad_norm < best_grad_norm:
            best_grad_norm = rec.grad_norm
        # best observed value the gap certificates refer to: for boosting the
        # loss-gradient norm, otherwise the primal objective
        gap_ref = best_grad_norm if algo == "adaboost" else rec.best_primal

        if constants.dual_defined:
            if rec.dual is None:
                report.records.append(_not_evaluable(t, WEAK_DUALITY, "no dual value" + dual_ref))
            else:
                report.records.append(_evaluated(t, WEAK_DUALITY, rec.dual, rec.best_primal))
            if missing_dl:
                report.records.append(_not_evaluable(
                    t, GAP_RUNNING, "missing diameter or lipschitz constant"))
            elif rec.dual is None:
                report.records.append(_not_evaluable(t, GAP_RUNNING, "no dual value" + dual_ref))
            else:
                bound = _ratio_bound(constants.diameter, constants.lipschitz,
                                     step_sum, step_sq_sum)
                report.records.append(_evaluated(t, GAP_RUNNING, gap_ref - rec.dual, bound))
            if constants.schedule_kind == "dynamic":
                if missing_dl:
                    report.records.append(_not_evaluable(
                        t, GAP_DYNAMIC, "missing diameter or lipschitz constant"))
                elif rec.dual is None:
                    report.records.append(_not_evaluable(t, GAP_DYNAMIC, "no dual value" + dual_ref))
                else:
                    bound = dynamic_bound(constants.diameter, constants.lipschitz, t)
                    report.records.append(_evaluated(t, GAP_DYNAMIC, gap_ref - rec.dual, bound))

        if constants.f_star is not None:
            observed = rec.best_primal - constants.f_star
            if missing_dl:
                report.records.append(_not_evaluable(
                    t, OPT_RUNNING, "missing diameter or lipschitz constant"))
            elif step_sum <= 0.0:
                report.records.append(_not_evaluable(t, OPT_RUNNING, "zero step-size sum"))
            else:
                bound = _ratio_bound(constants.diameter, constants.lipschitz,
                                     step_sum, step_sq_sum)
                report.records.append(_evaluated(t, OPT_RUNNING, observed, bound))
            if constants.schedule_kind in ("polyak", "linesearch"):
                if constants.dist0 is None or constants.lipschitz is None:
                    report.records.append(_not_evaluable(
                        t, OPT_POLYAK, "missing dist0 or lipschitz constant"))
                else:
                    bound = polyak_bound(constants.lipschitz, constants.dist0, t)
                    report.records.append(_evaluated(t, OPT_POLYAK, observed, bound))

        if algo == "stagewise":
            if rec.l0 is not None:
                report.records.append(_evaluated(t, SPARSITY_L0, float(rec.l0), float(t)))
            if rec.l1 is not None:
                if constants.eps is None:
                    report.records.append(_not_evaluable(
                        t, SPARSITY_L1, "no constant shrinkage for this run"))
                else:
                    report.records.append(_evaluated(t, SPARSITY_L1, rec.l1, t * constants.eps))

    # horizon-tied closed forms: one record per run, at the planned final iteration
    final = records[-1]
    if constants.dual_defined and constants.schedule_kind == "constant":
        if constants.horizon is None:
            report.records.append(_not_evaluable(-1, GAP_CONSTANT, "no planned horizon"))
        elif final.k != constants.horizon - 1:
            report.records.append(_not_evaluable(
                constants.horizon - 1, GAP_CONSTANT, "run ended before the planned horizon"))
        elif missing_dl:
            report.records.append(_not_evaluable(
                final.k, GAP_CONSTANT, "missing diameter or lipschitz constant"))
        elif final.dual is None:
            report.records.append(_not_evaluable(final.k, GAP_CONSTANT, "no dual value" + dual_ref))
        else:
            gap_ref = best_grad_norm if algo == "adaboost" else final.best_primal
            bound = constant_bound(constants.diameter, constants.lipschitz, constants.horizon)
            report.records.append(_evaluated(final.k, GAP_CONSTANT, gap_ref - final.dual, bound))
    if constants.f_star is not None and constants.schedule_kind == "optimal":
        if constants.horizon is None:
            report.records.append(_not_evaluable(-1, OPT_HORIZON, "no planned horizon"))
        elif final.k != constants.horizon - 1:
            report.records.append(_not_evaluable(
                constants.horizon - 1, OPT_HORIZON, "run ended before the planned horizon"))
        elif constants.dist0 is None or constants.lipschitz is None:
            report.records.append(_not_evaluable(
                final.k, OPT_HORIZON, "missing dist0 or lipschitz constant"))
        else:
            observed = final.best_primal - constants.f_star
            bound = polyak_bound(constants.lipschitz, constants.dist0, constants.horizon - 1)
            report.records.append(_evaluated(final.k, OPT_HORIZON, observed, bound))
    return report
