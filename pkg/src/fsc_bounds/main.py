"""Entry point for the fsc-bounds command line."""

from __future__ import annotations

import argparse
from collections.abc import Sequence
import logging
import sys

from injector import Injector

from fsc_bounds.__version__ import __version__
from fsc_bounds.app import EXIT_ERROR, FscBoundsApp, RuntimeConfig
from fsc_bounds.di_module import FscBoundsModule
from fsc_bounds.solver.types import SolverOptions
from fsc_bounds.utils.exceptions import FscBoundsError
from fsc_bounds.utils.logging_config import setup_logging

logger = logging.getLogger(__name__)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--tol", type=float, help="Bellman residual tolerance (default: 1e-10)"
    )
    common.add_argument(
        "--max-iters", type=int, help="iteration cap (default: 100000)"
    )
    common.add_argument("--grid", type=int, help="coarse grid points (default: 64)")
    common.add_argument(
        "--restarts", type=int, help="Nelder-Mead restarts (default: 8)"
    )
    common.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    common.add_argument("--out", help="write the report or CSV here (default: stdout)")
    common.add_argument("--log-file", help="write logs here (default: stderr)")
    return common


def _channel_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--channel", help="channel-spec JSON file")
    parser.add_argument(
        "--family", choices=["bsc", "bec"], help="built-in constrained DMC"
    )
    parser.add_argument(
        "--d", type=int, default=0, help="minimum run of zeros (default: 0)"
    )
    parser.add_argument("--k", default="inf", help="maximum run of zeros, or inf")
    parser.add_argument("--p", type=float, help="BSC crossover probability")
    parser.add_argument("--eps", type=float, help="BEC erasure probability")


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="fsc-bounds",
        description="Capacity lower bounds for input-driven finite-state channels.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    bound = commands.add_parser("bound", parents=[common], help="evaluate one bound")
    _channel_options(bound)
    bound.add_argument(
        "--method", choices=["dp", "closed_form", "vgraph"], default="dp"
    )
    bound.add_argument(
        "--vgraph",
        default="constraint",
        help="trivial, memory:M, constraint, or a V-graph JSON file",
    )

    sweep = commands.add_parser(
        "sweep", parents=[common], help="CSV over a parameter grid"
    )
    sweep.add_argument("--family", choices=["bsc", "bec"], required=True)
    sweep.add_argument("--d", default="0", help="comma list of d values")
    sweep.add_argument(
        "--k", default="inf", help="comma list of k values (inf allowed)"
    )
    sweep.add_argument("--param", choices=["p", "eps"], required=True)
    sweep.add_argument("--from", dest="start", type=float, default=0.0)
    sweep.add_argument("--to", dest="stop", type=float, default=0.5)
    sweep.add_argument("--points", type=int, default=51)
    sweep.add_argument(
        "--method", default="dp", help="comma list of dp,closed_form,vgraph"
    )
    sweep.add_argument("--vgraph", default="constraint")

    verify = commands.add_parser("verify", parents=[common], help="Bellman certificate")
    _channel_options(verify)
    verify.add_argument("--h", help="comma list of relative values, one per state")
    verify.add_argument("--rho", type=float, help="average reward to check")
    verify.add_argument("--rho-offset", type=float, default=0.0)
    verify.add_argument(
        "--oracle", action="store_true", help="also run the conservation suite"
    )
    return parser


def _options(args: argparse.Namespace) -> SolverOptions:
    return SolverOptions().with_overrides(
        tolerance=args.tol,
        max_iterations=args.max_iters,
        grid_points=args.grid,
        restarts=args.restarts,
        seed=args.seed,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, wire the injector and run one command.

    Returns the exit code: 0 when every check passes, 1 when a check fails
    and 2 on invalid input.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(logging.WARNING, args.log_file)
    if args.command != "sweep" and not args.channel and not args.family:
        parser.error("give --channel FILE or --family bsc|bec")
    try:
        config = RuntimeConfig.from_env(out=args.out, log_file=args.log_file)
        injector = Injector([FscBoundsModule(_options(args), config)])
        app = injector.get(FscBoundsApp)
        command = {
            "bound": app.cmd_bound,
            "sweep": app.cmd_sweep,
            "verify": app.cmd_verify,
        }[args.command]
        return command(args)
    except (FscBoundsError, ValueError) as e:
        logger.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
