"""Command-line entry point.

Subcommands: ``sweep-azimuth``, ``sweep-nr``, ``bench-iters``,
``validate``. Each reads an optional flat-text config (defaults apply
without one), takes ``--seed`` and ``--out``, and writes a CSV with a
fixed column order. Exit codes: 0 success, 2 input/config error, 3
validation failure.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (
    ConfigError,
    ScenarioConfig,
    benchmark_iterations,
    default_config,
    load_config,
    sweep_ring_size,
    sweep_uav_azimuth,
    validate_bounds,
)

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_VALIDATION_FAILED = 3


def parse_value_list(spec: str) -> list[float]:
    """Parse '0,5,10' or an inclusive 'start:stop:step' range."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range must be start:stop:step, got {spec!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError(f"range step must be > 0, got {step}")
        values = []
        x = start
        while x <= stop + 1e-9:
            values.append(round(x, 9))
            x += step
        return values
    try:
        return [float(p) for p in spec.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse list {spec!r}") from None


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="scenario config file (defaults if omitted)")
    sub.add_argument("--seed", type=int, help="override the config seed")
    sub.add_argument("--out", required=True, help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cylris",
        description="Cylindrical-RIS phase-shift optimization experiments.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("sweep-azimuth",
                        help="SE bounds vs UAV azimuth (ITV mirrored about the BS)")
    _add_common(p)
    p.add_argument("--azimuths", default="0:90:5",
                   help="degrees, 'a,b,c' or 'start:stop:step' (default 0:90:5)")

    p = subs.add_parser("sweep-nr", help="SE bounds vs ring size")
    _add_common(p)
    p.add_argument("--nr-list", default="8,16,32,64",
                   help="comma-separated ring sizes (default 8,16,32,64)")

    p = subs.add_parser("bench-iters",
                        help="iteration counts of both architectures vs azimuth")
    _add_common(p)
    p.add_argument("--azimuths", default="10:80:5",
                   help="degrees, 'a,b,c' or 'start:stop:step' (default 10:80:5)")
    p.add_argument("--trials", type=int, default=100,
                   help="optimization trials per azimuth (default 100)")

    p = subs.add_parser("validate",
                        help="Monte Carlo validation of the closed-form bounds")
    _add_common(p)
    p.add_argument("--trials", type=int,
                   help="Monte Carlo trials (default from config)")
    return parser


def _load(args) -> ScenarioConfig:
    return load_config(args.config) if args.config else default_config()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load(args)
        if args.command == "sweep-azimuth":
            table = sweep_uav_azimuth(config, parse_value_list(args.azimuths),
                                      seed=args.seed)
        elif args.command == "sweep-nr":
            nr_list = [int(v) for v in parse_value_list(args.nr_list)]
            table = sweep_ring_size(config, nr_list, seed=args.seed)
        elif args.command == "bench-iters":
            table = benchmark_iterations(config, parse_value_list(args.azimuths),
                                         trials=args.trials, seed=args.seed)
        else:
            report = validate_bounds(config, trials=args.trials, seed=args.seed)
            report.table.write(args.out)
            print(report.summary())
            return EXIT_OK if report.passed else EXIT_VALIDATION_FAILED
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    table.write(args.out)
    print(f"wrote {len(table.rows)} rows to {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
