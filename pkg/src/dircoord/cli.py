"""Command-line interface for the benchmark studies.

Subcommands::

    dircoord single-correction --out DIR [--config FILE] [--seed N] [--trials N]
    dircoord dynamic           --out DIR [--config FILE] [--seed N] [--trials N]
    dircoord replay --log FILE --out DIR [--config FILE] [--seed N] [--trial N]
    dircoord example-config PATH

Exit codes: 0 success, 2 configuration/input errors, 1 runtime failures.
The DIRCOORD_THREADS environment variable overrides the worker count.
"""

from __future__ import annotations

import argparse
import sys

from .config import ScenarioConfig, load_config, write_example_config
from .errors import ConfigError, DircoordError, NonMonotoneTimeError, ParseError
from .outputs import (
    emit_dynamic_outputs,
    emit_replay_outputs,
    emit_single_correction_outputs,
)
from .replay import run_replay
from .studies import run_dynamic_study, run_single_correction_study


def _add_common(sub: argparse.ArgumentParser, needs_out: bool = True) -> None:
    sub.add_argument("--config", help="scenario configuration file")
    if needs_out:
        sub.add_argument("--out", required=True, help="output directory")
    sub.add_argument("--seed", type=int, help="override the configured seed")
    sub.add_argument("--trials", type=int, help="override the configured trial count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dircoord",
        description="Range/direction localization filters: Monte Carlo benchmarks",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    single = subs.add_parser(
        "single-correction",
        help="one-shot range-correction consistency study",
    )
    _add_common(single)

    dynamic = subs.add_parser("dynamic", help="dynamic tracking study")
    _add_common(dynamic)

    replay = subs.add_parser("replay", help="drive the filters from a CSV log")
    replay.add_argument("--log", required=True, help="replay log file")
    _add_common(replay)
    replay.add_argument(
        "--trial", type=int,
        help="trial index the replay re-derives its prior for",
    )

    example = subs.add_parser(
        "example-config", help="write a commented example configuration file"
    )
    example.add_argument("path", help="destination path")
    return parser


def _load(args) -> ScenarioConfig:
    config = load_config(args.config) if args.config else ScenarioConfig()
    if args.seed is not None:
        config.seed = args.seed
    if getattr(args, "trials", None) is not None:
        config.trials = args.trials
    if getattr(args, "trial", None) is not None:
        config.trial_index = args.trial
    config.validate()
    return config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "example-config":
            write_example_config(args.path)
            print(f"wrote example configuration to {args.path}")
            return 0
        config = _load(args)
        if args.command == "single-correction":
            results = run_single_correction_study(config)
            out = emit_single_correction_outputs(results, config, args.out)
            med = results.medians()
            print(f"single-correction study, {config.trials} trials -> {out}")
            print(
                "median mahalanobis: directional "
                f"{med['mahal_dckf']:.3f} vs Cartesian {med['mahal_ekf']:.3f}"
            )
            print(
                "median divergence:  directional "
                f"{med['kl_dckf']:.3f} vs Cartesian {med['kl_ekf']:.3f}"
            )
        elif args.command == "dynamic":
            results = run_dynamic_study(config)
            out = emit_dynamic_outputs(results, config, args.out)
            print(f"dynamic study, {config.trials} trials -> {out}")
            if results.summary.err_reduction_pct is not None:
                print(
                    "error reduction vs Cartesian EKF: "
                    f"{results.summary.err_reduction_pct:.1f}%"
                )
        elif args.command == "replay":
            results = run_replay(args.log, config)
            out = emit_replay_outputs(results, config, args.out)
            print(f"replayed {args.log} -> {out}")
            for name, values in results.rmse.items():
                print(
                    f"{name} RMSE: {values['pos']:.3f} m position, "
                    f"{values['vel']:.3f} m/s velocity"
                )
    except (ConfigError, ParseError, NonMonotoneTimeError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except DircoordError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
