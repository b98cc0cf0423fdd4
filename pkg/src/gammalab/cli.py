"""Command-line runner: ``gammalab <subcommand> [--config PATH] [--seed N] [--jobs K]``.

Exit status is 0 when every non-exploratory row passes, 1 when a check fails
or a report cannot be written, and 2 for usage, configuration or hypothesis
errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

from . import __version__
from .config import ConfigError, ExperimentConfig, load_config
from .distributions import MomentHypothesisError
from .gaussian_channel import HypothesisError
from .identity_lab import (
    IdentityCheckRow,
    Job,
    alpha_half_asymptotics,
    bounds_report,
    channel_rows,
    db_mmse_check,
    debruijn_gamma_check,
    debruijn_integrated_check,
    debruijn_mc_check,
    explore_alpha_above_half,
    gaussian_rows,
    gsv_gamma_check,
    mi_decomposition_check,
    relative_entropy_flow,
    run_jobs,
    stein_rows,
)

__all__ = ["main", "build_jobs", "emit_csv", "emit_json", "row_to_dict", "SUBCOMMANDS", "CSV_HEADER"]

CSV_HEADER = ["identity_id", "input_id", "alpha", "lambda", "r", "lhs", "rhs", "lhs_se", "rhs_se", "tolerance", "pass"]

SUBCOMMANDS = (
    "stein-check",
    "gaussian-baseline",
    "channel-sweep",
    "debruijn-check",
    "gsv-check",
    "bounds-report",
    "asymptotics",
    "explore-alpha",
    "all",
)


def _one(func, *args, **kwargs):
    return [func(*args, **kwargs)]


def _jobs_for(cmd: str, cfg: ExperimentConfig) -> list[Job]:
    dist = cfg.input
    n, seed, h = cfg.mc_samples, cfg.seed, cfg.fd_step
    jobs: list[Job] = []
    if cmd == "stein-check":
        jobs.append(Job("stein", stein_rows, (min(n, 10**5), seed, cfg.alphas[0], cfg.lam)))
    elif cmd == "gaussian-baseline":
        for r in cfg.r_values:
            if r > 0:
                jobs.append(Job(f"gaussian:r={r:g}", gaussian_rows, ([r], dist)))
    for a in cfg.alphas:
        grid = cfg.params_grid(a)
        positive = [p for p in grid if p.r > 0]
        tag = f"alpha={a:g}"
        if cmd == "channel-sweep":
            for p in grid:
                jobs.append(Job(f"channel:{tag}:r={p.r:g}", channel_rows, (dist, [p], n, seed)))
        elif cmd == "debruijn-check":
            jobs.append(Job(f"relative-entropy:{tag}", relative_entropy_flow, (dist, grid)))
            for p in positive:
                jobs.append(Job(f"debruijn:{tag}:r={p.r:g}", _one, (debruijn_gamma_check, dist, p, h),
                                {"mean_correction": cfg.mean_correction}))
                jobs.append(Job(f"debruijn-mc:{tag}:r={p.r:g}", _one, (debruijn_mc_check, dist, p, n, seed, cfg.bins)))
            jobs.append(Job(f"debruijn-integrated:{tag}", _one,
                            (debruijn_integrated_check, dist, grid[0].with_r(1.0), cfg.debruijn_r_max),
                            {"mean_correction": cfg.mean_correction}))
        elif cmd == "gsv-check":
            for p in positive:
                jobs.append(Job(f"gsv:{tag}:r={p.r:g}", gsv_gamma_check, (dist, p, n, seed, h)))
                jobs.append(Job(f"db-mmse:{tag}:r={p.r:g}", _one, (db_mmse_check, dist, p)))
                jobs.append(Job(f"mi-decomposition:{tag}:r={p.r:g}", _one, (mi_decomposition_check, dist, p)))
        elif cmd == "bounds-report":
            for p in grid:
                jobs.append(Job(f"bounds:{tag}:r={p.r:g}", bounds_report, (dist, [p], n, seed)))
    if cmd == "asymptotics":
        jobs.append(Job("asymptotics", alpha_half_asymptotics, (cfg.asym_lambda, list(cfg.asym_r_grid), n, seed)))
    elif cmd == "explore-alpha":
        jobs.append(Job("explore-alpha", explore_alpha_above_half,
                        (list(cfg.explore_alphas), cfg.lam, list(cfg.explore_r_grid), n, seed)))
    return jobs


def build_jobs(cmd: str, cfg: ExperimentConfig) -> list[Job]:
    if cmd == "all":
        return [job for sub in SUBCOMMANDS[:-1] for job in _jobs_for(sub, cfg)]
    return _jobs_for(cmd, cfg)


# ------------------------------------------------------------------ serialization


def _num(x):
    """12 significant digits; non-finite values become None."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, (int, float)):
        x = float(x)
        return float(f"{x:.12g}") if math.isfinite(x) else None
    return x


def _csv_num(x) -> str:
    x = float(x)
    return f"{x:.12g}" if math.isfinite(x) else ""


def _pass_text(p) -> str:
    return "null" if p is None else ("true" if p else "false")


def row_to_dict(row: IdentityCheckRow) -> dict:
    return {
        "identity_id": row.identity_id,
        "input_id": row.input_id,
        "alpha": _num(row.alpha),
        "lambda": _num(row.lam),
        "r": _num(row.r),
        "lhs": _num(row.lhs),
        "rhs": _num(row.rhs),
        "lhs_se": _num(row.lhs_se),
        "rhs_se": _num(row.rhs_se),
        "tolerance": _num(row.tolerance),
        "pass": row.passed,
        "kind": row.kind,
        "margin": _num(row.margin),
        "notes": {k: _num(v) for k, v in sorted(row.notes.items())},
    }


def emit_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in rows:
            w.writerow([
                row.identity_id, row.input_id, _csv_num(row.alpha), _csv_num(row.lam), _csv_num(row.r),
                _csv_num(row.lhs), _csv_num(row.rhs), _csv_num(row.lhs_se), _csv_num(row.rhs_se),
                _csv_num(row.tolerance), _pass_text(row.passed),
            ])


def emit_json(report: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")


def make_report(cmd: str, cfg: ExperimentConfig, rows) -> dict:
    failed = [r for r in rows if r.passed is False]
    return {
        "metadata": {
            "code_version": __version__,
            "config_hash": cfg.digest,
            "seed": cfg.seed,
            "subcommand": cmd,
        },
        "rows": [row_to_dict(r) for r in rows],
        "verdict": {
            "pass": not failed,
            "rows": len(rows),
            "failed": len(failed),
            "exploratory": sum(r.passed is None for r in rows),
            "failed_rows": [f"{r.identity_id}|{r.input_id}|r={_csv_num(r.r)}" for r in failed],
        },
    }


# ------------------------------------------------------------------ entry point


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gammalab", description="Gamma-channel identity checks and sweeps.")
    p.add_argument("subcommand", nargs="?", choices=SUBCOMMANDS, help="check or sweep to run")
    p.add_argument("--config", metavar="PATH", help="INI configuration file (defaults are embedded)")
    p.add_argument("--seed", type=int, help="override estimation.seed")
    p.add_argument("--jobs", type=int, default=1, metavar="K", help="parallel worker processes")
    p.add_argument("--print-config", action="store_true", help="print the effective configuration and exit")
    p.add_argument("--version", action="version", version=f"gammalab {__version__}")
    return p


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed)
    except ConfigError as exc:
        print(f"gammalab: configuration error: {exc}", file=sys.stderr)
        return 2
    if args.print_config:
        sys.stdout.write(cfg.text)
        return 0
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        print("gammalab: error: a subcommand is required", file=sys.stderr)
        return 2
    if args.jobs < 1:
        print("gammalab: error: --jobs must be >= 1", file=sys.stderr)
        return 2

    try:
        rows, timings = run_jobs(build_jobs(args.subcommand, cfg), args.jobs)
    except (MomentHypothesisError, HypothesisError) as exc:
        print(f"gammalab: refused: {exc}", file=sys.stderr)
        return 2

    report = make_report(args.subcommand, cfg, rows)
    try:
        if cfg.csv_path:
            emit_csv(rows, cfg.csv_path)
        if cfg.json_path:
            emit_json(report, cfg.json_path)
        if cfg.timings_path:
            with open(cfg.timings_path, "w") as fh:
                json.dump({k: round(v, 3) for k, v in sorted(timings.items())}, fh, indent=2)
                fh.write("\n")
    except OSError as exc:
        print(f"gammalab: cannot write report: {exc}", file=sys.stderr)
        return 1

    for row in rows:
        status = {True: "PASS", False: "FAIL", None: "info"}[row.passed]
        print(f"{status:4s} {row.identity_id:<30s} {row.input_id:<44s} r={_csv_num(row.r):<8s} "
              f"lhs={_csv_num(row.lhs):<16s} rhs={_csv_num(row.rhs)}")
    v = report["verdict"]
    print(f"{v['rows']} rows, {v['failed']} failed, {v['exploratory']} exploratory")
    return 0 if v["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
