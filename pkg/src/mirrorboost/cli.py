"""Command-line harness: run experiments, re-check saved traces, generate data.

Exit codes: 0 success, 1 at least one certificate failed, 2 usage or
configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import bounds, datagen, md_core, prox
from .boosting import TrainingSet, run_adaboost
from .stagewise import RegressionProblem, least_squares_norm, optimal_shrinkage, run_fs
from .trace import TraceHeader, read_trace, write_trace

EXIT_OK = 0
EXIT_CERTIFICATE = 1
EXIT_USAGE = 2
EXIT_IO = 3

OUTDIR_ENV = "MIRRORBOOST_OUTDIR"

TASKS = ("adaboost", "fs", "minmax-game")
_TASK_SCHEDULES = {
    "adaboost": ("constant", "dynamic", "linesearch"),
    "fs": ("constant", "optimal", "linesearch"),
    "minmax-game": ("constant", "dynamic", "polyak"),
}


class ConfigError(Exception):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    task: str
    data: str
    schedule: str = "constant"
    iterations: int = 100
    epsilon: float | None = None
    f_star: float | None = None
    use_response_bound: bool = False
    center: bool = False
    scale: bool = False
    out_dir: str | None = None
    prefix: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def experiment_dict(self) -> dict:
        """The config without output-location fields, so identical experiments
        produce byte-identical traces regardless of where they are written."""
        out = asdict(self)
        del out["out_dir"]
        del out["prefix"]
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "task" not in obj or "data" not in obj:
            raise ConfigError("config must define 'task' and 'data'")
        return cls(**obj)

    def validate(self) -> None:
        if self.task not in TASKS:
            raise ConfigError(f"unknown task: {self.task!r}")
        if self.schedule not in _TASK_SCHEDULES[self.task]:
            raise ConfigError(
                f"task {self.task!r} supports schedules {_TASK_SCHEDULES[self.task]}, "
                f"got {self.schedule!r}")
        if self.iterations < 1:
            raise ConfigError("iterations must be at least 1")
        if self.task == "fs" and self.schedule == "constant":
            if self.epsilon is None or self.epsilon <= 0.0:
                raise ConfigError("fs with the constant schedule needs --epsilon > 0")
        if self.task == "minmax-game" and self.schedule == "polyak" and self.f_star is None:
            raise ConfigError("the polyak schedule needs --f-star")


def parse_data_spec(spec: str):
    """'synthetic:KIND:seed=N[:key=val...]' or 'csv:PATH' or a bare *.csv path."""
    if spec.startswith("csv:"):
        return ("csv", spec[4:])
    if spec.endswith(".csv"):
        return ("csv", spec)
    if not spec.startswith("synthetic:"):
        raise ConfigError(f"cannot parse data spec {spec!r}")
    parts = spec.split(":")
    if len(parts) < 2 or not parts[1]:
        raise ConfigError(f"data spec {spec!r} is missing the synthetic kind")
    kind = parts[1]
    if kind not in datagen._KIND_ALIASES:
        raise ConfigError(f"unknown synthetic kind: {kind!r}")
    seed = None
    sizes: dict[str, float | int] = {}
    for token in parts[2:]:
        if "=" not in token:
            raise ConfigError(f"bad data spec token {token!r}, expected key=value")
        key, _, raw = token.partition("=")
        try:
            value: float | int = int(raw)
        except ValueError:
            try:
                value = float(raw)
            except ValueError:
                raise ConfigError(f"bad numeric value in data spec token {token!r}") from None
        if key == "seed":
            seed = int(value)
        else:
            sizes[key] = value
    if seed is None:
        raise ConfigError(f"data spec {spec!r} must set seed=N")
    return ("synthetic", kind, seed, sizes)


def _build_instance(config: ExperimentConfig):
    parsed = parse_data_spec(config.data)
    if parsed[0] == "csv":
        path = parsed[1]
        if config.task == "fs":
            return datagen.load_regression_csv(path)
        return datagen.load_classification_csv(path)
    _, kind, seed, sizes = parsed
    canonical = datagen._KIND_ALIASES[kind]
    if config.task == "fs" and canonical != "regression":
        raise ConfigError(f"task 'fs' needs regression data, got kind {kind!r}")
    if config.task != "fs" and canonical == "regression":
        raise ConfigError(f"task {config.task!r} needs classification data, got kind {kind!r}")
    try:
        return datagen.generate_synthetic(kind, seed, **sizes)
    except TypeError as exc:
        raise ConfigError(f"bad size parameters for kind {kind!r}: {exc}") from None


def _prepare_boost_run(config: ExperimentConfig, ts: TrainingSet):
    m = ts.num_examples
    lipschitz = ts.lipschitz
    diameter = prox.diameter_bound(prox.entropy(m), np.full(m, 1.0 / m))
    if config.schedule == "constant":
        schedule = md_core.StepSchedule.constant(lipschitz, diameter, config.iterations)
        horizon = config.iterations
    elif config.schedule == "dynamic":
        schedule = md_core.StepSchedule.dynamic(lipschitz, diameter)
        horizon = None
    elif config.schedule == "linesearch":
        schedule = md_core.StepSchedule.edge_linesearch()
        horizon = None
    else:  # polyak, minmax-game only
        schedule = md_core.StepSchedule.polyak(config.f_star)
        horizon = None
    constants = bounds.RunConstants(
        algorithm="adaboost" if config.task == "adaboost" else "mirror-descent",
        schedule_kind=config.schedule,
        lipschitz=lipschitz,
        diameter=diameter,
        f_star=config.f_star,
        horizon=horizon,
        dual_defined=True,
    )
    shape = {"m": m, "n": ts.num_classifiers}
    return schedule, constants, shape


def _prepare_fs_run(config: ExperimentConfig, rp: RegressionProblem):
    lipschitz = rp.design_norm
    if config.use_response_bound:
        projection_norm = float(np.linalg.norm(rp.response))
    else:
        projection_norm = least_squares_norm(rp)
    eps = None
    horizon = None
    if config.schedule == "constant":
        eps = float(config.epsilon)
        schedule = md_core.StepSchedule.fixed(eps)
    elif config.schedule == "optimal":
        eps = optimal_shrinkage(rp, config.iterations, projection_norm=projection_norm)
        horizon = config.iterations
        schedule = md_core.StepSchedule.fixed(eps)
    else:  # linesearch: the polyak step with the known optimal value 0
        schedule = md_core.StepSchedule.polyak(0.0)
    constants = bounds.RunConstants(
        algorithm="stagewise",
        schedule_kind=config.schedule,
        lipschitz=lipschitz,
        diameter=0.5 * projection_norm * projection_norm,
        f_star=0.0,
        dist0=projection_norm,
        eps=eps,
        horizon=horizon,
        dual_defined=False,
    )
    shape = {"n": rp.num_samples, "p": rp.num_columns}
    return schedule, constants, shape, eps


def _render_report_text(header: TraceHeader, report: bounds.CertificateReport) -> str:
    lines = [
        f"certificate report: {header.algorithm}, schedule {header.schedule_kind}, "
        f"{header.iterations} iterations requested",
    ]
    for tag, entry in sorted(report.by_tag().items()):
        slack = ("" if entry["min_slack"] is None
                 else f", min slack {entry['min_slack']:.6e}")
        lines.append(
            f"  {tag:<14} {entry['passed']}/{entry['total']} passed, "
            f"{entry['failed']} failed, {entry['not_evaluable']} not evaluable{slack}")
    s = report.summary()
    lines.append(
        f"summary: {s['total']} checked, {s['passed']} passed, {s['failed']} failed, "
        f"{s['not_evaluable']} not evaluable")
    for rec in report.failures():
        lines.append(
            f"  FAILED {rec.tag} at k={rec.k}: observed {rec.observed!r} "
            f"> bound {rec.bound!r}")
    return "\n".join(lines) + "\n"


def _write_outputs(out_dir: Path, prefix: str, header: TraceHeader, result,
                   report: bounds.CertificateReport) -> dict[str, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "trace": out_dir / f"{prefix}.trace.jsonl",
        "report_json": out_dir / f"{prefix}.report.json",
        "report_txt": out_dir / f"{prefix}.report.txt",
        "plot": out_dir / f"{prefix}.plot.csv",
    }
    write_trace(paths["trace"], header, result.records, terminated=result.terminated,
                slacks=report.slacks_by_iteration())
    _write_report_files(paths["report_json"], paths["report_txt"], header, report)
    running = {}
    for rec in report.records:
        if rec.tag in (bounds.GAP_RUNNING, bounds.OPT_RUNNING):
            running[rec.k] = (rec.observed, rec.bound)
    with open(paths["plot"], "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "objective", "best_objective", "dual", "gap", "bound"])
        for rec in result.records:
            observed, bound = running.get(rec.k, (None, None))
            writer.writerow([
                rec.k,
                repr(float(rec.primal)),
                repr(float(rec.best_primal)),
                "" if rec.dual is None else repr(float(rec.dual)),
                "" if observed is None else repr(float(observed)),
                "" if bound is None else repr(float(bound)),
            ])
        fh.flush()
    return paths


def _write_report_files(json_path: Path, txt_path: Path, header: TraceHeader,
                        report: bounds.CertificateReport) -> None:
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
        fh.flush()
    with open(txt_path, "w", encoding="utf-8") as fh:
        fh.write(_render_report_text(header, report))
        fh.flush()


def _config_from_args(args) -> ExperimentConfig:
    if args.config is not None:
        if args.task is not None or args.data is not None:
            raise ConfigError("--config replaces the task and data arguments")
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {args.config} is not valid JSON: {exc}") from None
        config = ExperimentConfig.from_dict(obj)
    else:
        if args.task is None:
            raise ConfigError("a task (or --config) is required")
        if args.data is None:
            raise ConfigError("--data is required")
        config = ExperimentConfig(
            task=args.task,
            data=args.data,
            schedule=args.schedule,
            iterations=args.iters,
            epsilon=args.epsilon,
            f_star=args.f_star,
            use_response_bound=args.use_response_bound,
            center=args.center,
            scale=args.scale,
            out_dir=args.out,
            prefix=args.prefix,
        )
    config.validate()
    return config


def _resolve_out_dir(configured: str | None) -> Path:
    if configured:
        return Path(configured)
    return Path(os.environ.get(OUTDIR_ENV, "."))


def _cmd_run(args) -> int:
    config = _config_from_args(args)
    instance = _build_instance(config)
    if config.task == "fs":
        if config.center or config.scale:
            instance = datagen.center_scale(instance, center=config.center,
                                            scale=config.scale)
        schedule, constants, shape, eps = _prepare_fs_run(config, instance)
        result = run_fs(instance, schedule, config.iterations)
    else:
        schedule, constants, shape = _prepare_boost_run(config, instance)
        if config.task == "adaboost":
            result = run_adaboost(instance, schedule, config.iterations)
        else:
            problem = instance.to_minmax()
            prox_fn = prox.entropy(problem.m)
            result = md_core.run(problem, schedule, prox_fn, config.iterations)
    if not result.records:
        raise ConfigError(f"run produced no iterations: {result.terminated}")
    header = TraceHeader(
        algorithm=constants.algorithm,
        schedule_kind=config.schedule,
        schedule=schedule.describe(),
        iterations=config.iterations,
        shape=shape,
        lipschitz=constants.lipschitz,
        diameter=constants.diameter,
        f_star=constants.f_star,
        dist0=constants.dist0,
        eps=constants.eps,
        horizon=constants.horizon,
        dual_defined=constants.dual_defined,
        config=config.experiment_dict(),
    )
    report = bounds.check(result.records, constants)
    out_dir = _resolve_out_dir(config.out_dir)
    prefix = config.prefix or config.task
    paths = _write_outputs(out_dir, prefix, header, result, report)
    summary = report.summary()
    print(f"{config.task}: {len(result.records)} iterations"
          + (f" (stopped early: {result.terminated})" if result.terminated else ""))
    print(f"certificates: {summary['passed']} passed, {summary['failed']} failed, "
          f"{summary['not_evaluable']} not evaluable")
    print(f"wrote {paths['trace']}")
    return EXIT_OK if summary["failed"] == 0 else EXIT_CERTIFICATE


def _cmd_check(args) -> int:
    header, records, _ = read_trace(args.trace)
    if not records:
        raise ConfigError(f"trace {args.trace} has no iteration records")
    constants = bounds.RunConstants.from_header(header)
    report = bounds.check(records, constants)
    trace_path = Path(args.trace)
    out_dir = Path(args.out) if args.out else trace_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = trace_path.name
    for suffix in (".trace.jsonl", ".jsonl"):
        if stem.endswith(suffix):
            stem = stem[: -len(suffix)]
            break
    _write_report_files(out_dir / f"{stem}.report.json", out_dir / f"{stem}.report.txt",
                        header, report)
    print(_render_report_text(header, report), end="")
    summary = report.summary()
    return EXIT_OK if summary["failed"] == 0 else EXIT_CERTIFICATE


def _cmd_gen(args) -> int:
    parsed = parse_data_spec(args.spec)
    if parsed[0] != "synthetic":
        raise ConfigError("gen needs a synthetic:... data spec")
    _, kind, seed, sizes = parsed
    canonical = datagen._KIND_ALIASES[kind]
    if canonical == "game":
        raise ConfigError("kind 'game' is matrix-level and has no CSV form; "
                          "use separable, nonseparable, or regression")
    try:
        instance = datagen.generate_synthetic(kind, seed, **sizes)
    except TypeError as exc:
        raise ConfigError(f"bad size parameters for kind {kind!r}: {exc}") from None
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    if canonical == "regression":
        datagen.write_regression_csv(out, instance.design, instance.response)
    else:
        datagen.write_classification_csv(out, instance.features, instance.labels)
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mirrorboost",
        description="mirror descent runs with per-iteration convergence certificates")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment and write trace/report/plot files")
    p_run.add_argument("task", nargs="?", choices=TASKS, default=None)
    p_run.add_argument("--data", default=None,
                       help="synthetic:KIND:seed=N[:key=val...] or a CSV path")
    p_run.add_argument("--schedule", default="constant",
                       choices=("constant", "dynamic", "linesearch", "optimal", "polyak"))
    p_run.add_argument("--iters", type=int, default=100)
    p_run.add_argument("--epsilon", type=float, default=None,
                       help="shrinkage for fs with the constant schedule")
    p_run.add_argument("--f-star", dest="f_star", type=float, default=None,
                       help="known optimal value (minmax-game polyak schedule)")
    p_run.add_argument("--use-response-bound", action="store_true",
                       help="bound the projection norm by the response norm (fs)")
    p_run.add_argument("--center", action="store_true", help="center columns and response (fs)")
    p_run.add_argument("--scale", action="store_true", help="scale columns to unit norm (fs)")
    p_run.add_argument("--out", default=None,
                       help=f"output directory (default: ${OUTDIR_ENV} or '.')")
    p_run.add_argument("--prefix", default=None, help="output file prefix (default: the task)")
    p_run.add_argument("--config", default=None, help="JSON experiment config file")
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check", help="re-verify the certificates of a saved trace")
    p_check.add_argument("trace")
    p_check.add_argument("--out", default=None,
                         help="directory for the regenerated report (default: next to the trace)")
    p_check.set_defaults(func=_cmd_check)

    p_gen = sub.add_parser("gen", help="write a synthetic data set to CSV")
    p_gen.add_argument("spec", help="synthetic:KIND:seed=N[:key=val...]")
    p_gen.add_argument("--out", required=True, help="CSV path to write")
    p_gen.set_defaults(func=_cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return EXIT_OK
        return code if isinstance(code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
