"""Command-line front end: ``simulate``, ``sweep`` and ``feasibility``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from .analysis import feasibility_report, rate_consistency_test
from .attacks import attack_kind
from .config import DEFAULTS, ExperimentSpec, build_spec, load_config
from .errors import ConfigurationError, DomainError, UnsupportedConfigurationError
from .protocol import SessionResult, expected_conclusive_rate, run_session

SIMULATE_COLUMNS = ["n_slots", "clicks", "conclusive", "conclusive_rate", "qber",
                    "attack", "seed"]
SWEEP_COLUMNS = ["sweep_param", "sweep_value", "repetition", "seed", "n_slots", "clicks",
                 "conclusive", "conclusive_rate", "qber", "verdict_rejected"]
FEASIBILITY_COLUMNS = ["p_succ", "required_db", "min_separation_km",
                       "configured_separation_km", "feasible", "throttle_keep",
                       "timing_slack_s", "notes"]


def _summary(result: SessionResult) -> dict:
    return {
        "n_slots": result.n_slots,
        "clicks": result.click_count,
        "conclusive": result.conclusive_count,
        "conclusive_rate": result.conclusive_rate,
        "qber": result.qber,
        "attack": attack_kind(result.config.attack),
        "seed": result.config.seed,
    }


def _verdict(result: SessionResult, significance: float) -> bool | None:
    """Bob's rate check against what an untouched line would deliver."""
    try:
        expected = expected_conclusive_rate(result.config.honest())
        return rate_consistency_test(result.conclusive_count, result.n_slots, expected,
                                     significance).rejected
    except (DomainError, UnsupportedConfigurationError):
        return None


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return " | ".join(value)
    return str(value)


def render(rows: list[dict], columns: list[str], fmt: str, single: bool = False) -> str:
    if fmt == "json":
        payload = rows[0] if single else rows
        return json.dumps(payload, indent=2, allow_nan=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue()


def cmd_simulate(spec: ExperimentSpec) -> str:
    if spec.sweep_param is not None:
        raise ConfigurationError("simulate runs a single session; use 'sweep'",
                                 "sweep_param")
    result = run_session(spec.session)
    return render([_summary(result)], SIMULATE_COLUMNS, spec.output_format, single=True)


def _sweep_row(job: tuple[ExperimentSpec, str, float, int]) -> dict:
    spec, param, value, rep = job
    if param == "seed":
        base = spec.with_value("seed", int(value))
    else:
        base = spec.with_value(param, value)
    seed = int(base.values["seed"]) + rep
    result = run_session(base.with_value("seed", seed).session)
    row = _summary(result)
    del row["attack"]
    row.update(sweep_param=param, sweep_value=value, repetition=rep,
               verdict_rejected=_verdict(result, spec.significance))
    return row


def sweep_jobs(spec: ExperimentSpec) -> list[tuple]:
    if spec.sweep_param is None:
        raise ConfigurationError("sweep needs a sweep parameter", "sweep_param")
    jobs = [(spec, spec.sweep_param, value, rep)
            for value in spec.sweep_values for rep in range(spec.repetitions)]
    # validate every configuration before spending time on sessions
    for s, param, value, rep in jobs:
        s.with_value(param, int(value) if param == "seed" else value).session
    return jobs


def cmd_sweep(spec: ExperimentSpec, workers: int = 1) -> str:
    jobs = sweep_jobs(spec)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(job) for job in jobs]
    return render(rows, SWEEP_COLUMNS, spec.output_format)


def cmd_feasibility(spec: ExperimentSpec) -> str:
    try:
        report = feasibility_report(spec.session)
    except UnsupportedConfigurationError:
        raise ConfigurationError("feasibility needs attack = two_point", "attack") from None
    return render([report.as_dict()], FEASIBILITY_COLUMNS, spec.output_format, single=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="b92sim", description="B92 over fiber: sessions, sweeps and two-point attack feasibility.")
    sub = parser.add_subparsers(dest="cmd", required=True)
    for name, help_text in (("simulate", "run one session and print a summary row"),
                            ("sweep", "run a parameter sweep"),
                            ("feasibility", "analytic two-point attack feasibility report")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--out", help="output path (default: standard output)")
        p.add_argument("--workers", type=int, default=1, help="sweep worker processes")
        for key in DEFAULTS:
            flags = [f"--{key}"]
            if "_" in key:
                flags.append(f"--{key.replace('_', '-')}")
            p.add_argument(*flags, dest=key, default=None, metavar="VALUE")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        values = load_config(args.config) if args.config else {}
        values.update({k: getattr(args, k) for k in DEFAULTS if getattr(args, k) is not None})
        spec = build_spec(values)
        if args.cmd == "simulate":
            text = cmd_simulate(spec)
        elif args.cmd == "sweep":
            text = cmd_sweep(spec, args.workers)
        else:
            text = cmd_feasibility(spec)
    except ConfigurationError as exc:
        where = f"{exc.field}: " if exc.field else ""
        print(f"b92sim {args.cmd}: error: {where}{exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"b92sim {args.cmd}: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
