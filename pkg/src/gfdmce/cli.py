"""Command line: ``run`` sweeps, ``plot`` curves, ``validate`` self-checks.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .config import ConfigError, load_config
from .link import EqualizationError
from .montecarlo import SimulationError, monte_carlo, write_csv

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

log = logging.getLogger("gfdmce")


def _seed(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return seed


def _cmd_run(args) -> int:
    cfg = load_config(args.config, seed=args.seed)
    workers = args.workers or cfg.workers
    out = args.out or cfg.out_path
    points = monte_carlo(cfg.spec, workers=workers)
    text = write_csv(points, out)
    if out is None:
        sys.stdout.write(text)
    else:
        log.info("wrote %d curve points to %s", len(points), out)
    return EXIT_OK


def _cmd_plot(args) -> int:
    from .plot import plot_curves

    try:
        plot_curves(args.inp, args.out, args.metric)
    except (OSError, KeyError) as err:
        raise ConfigError(f"cannot plot {args.inp}: {err}") from None
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .checks import run_checks

    cfg = load_config(args.config, seed=args.seed)
    results = run_checks(cfg.spec, samples=args.samples)
    for result in results:
        print(result.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors, not argparse's default status 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gfdmce", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="Monte Carlo sweep to CSV")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=_seed)
    run.add_argument("--out")
    run.add_argument("--workers", type=int, help="worker processes (output does not depend on it)")
    run.set_defaults(func=_cmd_run)

    plot = sub.add_parser("plot", help="log-scale SVG chart of a sweep CSV")
    plot.add_argument("--in", dest="inp", required=True)
    plot.add_argument("--out", required=True)
    plot.add_argument("--metric", choices=("mse", "ser"), default="mse")
    plot.set_defaults(func=_cmd_plot)

    val = sub.add_parser("validate", help="numerical self-checks for a config")
    val.add_argument("--config", required=True)
    val.add_argument("--seed", type=_seed)
    val.add_argument("--samples", type=int, default=20000,
                     help="draws for the interference covariance oracle")
    val.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, EqualizationError, np.linalg.LinAlgError, FloatingPointError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
