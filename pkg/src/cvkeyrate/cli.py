"""Command-line interface.

Subcommands: ``rate`` (single point), ``sweep`` (loss or block size),
``optimize-v``, ``validate-pe`` (Monte Carlo PE validation) and
``show-config``.  Exit status is 0 on success, 1 if any sweep row
errored, 2 on configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import (
    ConfigError,
    RunConfig,
    apply_overrides,
    load_config,
    resolve_config,
    sweep_points,
)
from .estimation import TailBound
from .montecarlo import SimConfig, validate_tail_coverage, validate_variances
from .pipeline import evaluate_optimized, run_points
from .report import format_table, write_reports

_SUMMARY_FIELDS = (
    "loss_db",
    "n_total",
    "mod_variance",
    "rate_asym",
    "rate_ub",
    "rate_lb",
    "rate_legacy",
    "eps_total",
    "error",
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, default=None, help="JSON config file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY.PATH=VALUE",
        help="override any config leaf (repeatable); values parse as JSON",
    )
    parser.add_argument("--output", type=str, default=None, help="result file path")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--workers", type=int, default=None, help="parallel workers")
    parser.add_argument("--seed", type=int, default=None, help="64-bit reproducibility seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvkeyrate",
        description="Composable finite-size secret-key rates for CV-QKD",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_rate = sub.add_parser("rate", help="evaluate a single configuration")
    _add_common(p_rate)

    p_sweep = sub.add_parser("sweep", help="sweep channel loss or block size")
    _add_common(p_sweep)
    p_sweep.add_argument(
        "--plot",
        type=str,
        default=None,
        help="also render the sweep figure to this file",
    )

    p_opt = sub.add_parser("optimize-v", help="report the optimal modulation variance")
    _add_common(p_opt)

    p_val = sub.add_parser("validate-pe", help="Monte Carlo validation of the PE statistics")
    _add_common(p_val)

    p_show = sub.add_parser("show-config", help="echo the resolved configuration")
    _add_common(p_show)

    return parser


def _resolve(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config)
    apply_overrides(config, args.overrides)
    if args.output is not None:
        config["output"]["path"] = args.output
    if args.format is not None:
        config["output"]["format"] = args.format
    if args.workers is not None:
        config["workers"] = args.workers
    if args.seed is not None:
        config["seed"] = args.seed
    if getattr(args, "plot", None) is not None:
        config["output"]["plot"] = args.plot
    return resolve_config(config)


def _emit(run: RunConfig, reports) -> int:
    print(format_table(reports, _SUMMARY_FIELDS))
    if run.output_path:
        path = write_reports(run.output_path, reports, run.output_format)
        print(f"wrote {path}")
    return 1 if any(r.error for r in reports) else 0


def _cmd_rate(run: RunConfig) -> int:
    points = sweep_points(run)
    if len(points) != 1:
        raise ConfigError("sweep", "rate evaluates a single point; use the sweep command")
    return _emit(run, run_points(points, run.workers))


def _cmd_sweep(run: RunConfig) -> int:
    if run.sweep_loss_db is None and run.sweep_block_size is None:
        raise ConfigError("sweep", "set sweep.loss_db or sweep.block_size")
    reports = run_points(sweep_points(run), run.workers)
    status = _emit(run, reports)
    if run.plot_path:
        from .plots import plot_sweep

        x_field = "loss_db" if run.sweep_loss_db is not None else "n_total"
        print(f"wrote {plot_sweep(reports, run.plot_path, x_field)}")
    return status


def _cmd_optimize_v(run: RunConfig) -> int:
    report, result = evaluate_optimized(
        run.scenario, run.channel, run.block, run.v_range, run.target
    )
    print(f"v_opt={result.v_opt:.6g}")
    print(f"rate_opt={result.rate_opt:.17g}")
    print(f"evaluations={result.evaluations}")
    print(f"bracket=[{result.bracket[0]:.6g}, {result.bracket[1]:.6g}]")
    if run.output_path:
        path = write_reports(run.output_path, [report], run.output_format)
        print(f"wrote {path}")
    return 0


def _cmd_validate_pe(run: RunConfig) -> int:
    mc = run.raw["montecarlo"]
    trials = int(mc["trials"])
    if trials < 1:
        raise ConfigError("montecarlo.trials", f"must be >= 1, got {trials}")
    n_pe = int(mc["n_pe"])
    if n_pe < 2:
        raise ConfigError("montecarlo.n_pe", f"must be >= 2, got {n_pe}")
    eps_pe = float(mc["eps_pe"])
    if not 0.0 < eps_pe < 1.0:
        raise ConfigError("montecarlo.eps_pe", f"must be in (0, 1), got {eps_pe}")
    c_pe = int(mc["c_pe"])
    coverage_c_pe = int(mc["coverage_c_pe"])
    if c_pe not in (0, 2) or coverage_c_pe not in (0, 2):
        raise ConfigError("montecarlo.c_pe", "variance branches must be 0 or 2")
    tail_name = mc["tail"]
    if tail_name not in ("gaussian", "chi2"):
        raise ConfigError("montecarlo.tail", f"must be gaussian or chi2, got {tail_name!r}")
    tail = TailBound.GAUSSIAN if tail_name == "gaussian" else TailBound.CHI_SQUARED

    channel = run.channel
    if channel.mod_variance <= 0.0:
        channel = channel.with_mod_variance(30.0)
    cfg = SimConfig(
        channel=channel,
        detection=run.scenario.detection,
        n_pe=n_pe,
        trials=trials,
        seed=run.seed,
        workers=run.workers,
    )
    variances = validate_variances(cfg, c_pe=c_pe)
    coverage = validate_tail_coverage(cfg, eps_pe=eps_pe, tail=tail, c_pe=coverage_c_pe)

    print(variances.to_text(), end="")
    print(coverage.to_text(), end="")
    if run.output_path:
        payload = {"variances": variances.to_dict(), "coverage": coverage.to_dict()}
        path = Path(run.output_path)
        with open(path, "w") as handle:
            json.dump(payload, handle, indent=2)
            handle.write("\n")
        print(f"wrote {path}")
    if variances.passed is False:
        return 1
    return 0


def _cmd_show_config(run: RunConfig) -> int:
    print(json.dumps(run.raw, indent=2))
    return 0


_COMMANDS = {
    "rate": _cmd_rate,
    "sweep": _cmd_sweep,
    "optimize-v": _cmd_optimize_v,
    "validate-pe": _cmd_validate_pe,
    "show-config": _cmd_show_config,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = _resolve(args)
        return _COMMANDS[args.command](run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
