import argparse
import logging
import sys
from pprint import pformat
from typing import Optional

from cli.controller import Controller
from src.errors import ConfigError, InfeasibleConstraintsError, NumericalError, StageError

logger = logging.getLogger("stagectl")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INFEASIBLE = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stagectl",
        description="Design, simulate and analyze position-dependent flexible-mode control.",
    )
    parser.add_argument("--config", default="config.yaml", help="YAML configuration file.")
    parser.add_argument("--out", default="out", help="Output directory.")
    parser.add_argument("--seed", type=int, default=None, help="Noise seed (overrides sim.seed).")
    parser.add_argument(
        "--strict-constraints",
        action="store_true",
        help="Fail with exit code 4 when the interpolation constraints cannot hold exactly.",
    )
    parser.add_argument("--log-level", default="INFO", help="Logging level.")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("design", help="Observer bank, anchored weights and both controllers.")

    fit = commands.add_parser("fit-weights", help="Fit the observer weights on a training trace.")
    fit.add_argument("--design", required=True, help="Design file to refit.")
    fit.add_argument("--training-trace", default=None, help="Recorded trace CSV to fit on.")

    simulate = commands.add_parser("simulate", help="Closed-loop scan of the five-die layout.")
    simulate.add_argument("--design", required=True, help="Design file to run.")
    simulate.add_argument("--flex", choices=["on", "off", "ab"], default=None)

    frf = commands.add_parser("frf", help="Equivalent-mechanics FRFs, flexible loop off and on.")
    frf.add_argument("--design", required=True, help="Design file to analyze.")
    frf.add_argument("--points", choices=["grid", "list"], default="grid")

    metrics = commands.add_parser("metrics", help="MA/MSD/cPS of recorded traces.")
    metrics.add_argument("traces", nargs="+", help="Trace CSV files.")

    commands.add_parser("demo", help="Full design, fit, A/B scan and analysis report.")

    reference = commands.add_parser("reference", help="Markdown page of every config key.")
    reference.add_argument("--path", default=None, help="Output file; defaults to OUT/config.md")
    return parser


def dispatch(args: argparse.Namespace) -> dict:
    if args.command == "reference":
        return Controller.write_reference(args.path or f"{args.out}/config.md")
    settings = Controller.load_settings(
        args.config,
        seed=args.seed,
        flex=getattr(args, "flex", None),
        strict_constraints=args.strict_constraints,
    )
    if args.command == "design":
        return Controller.run_design(settings, args.out)
    if args.command == "fit-weights":
        return Controller.run_fit_weights(settings, args.design, args.out, args.training_trace)
    if args.command == "simulate":
        return Controller.run_simulate(settings, args.design, args.out)
    if args.command == "frf":
        return Controller.run_frf(settings, args.design, args.out, args.points)
    if args.command == "metrics":
        return Controller.run_metrics(settings, args.traces, args.out)
    return Controller.run_demo(settings, args.out)


def _failure(e: StageError) -> str:
    where = f" in {e.stage}" if e.stage else ""
    return f"{type(e).__name__}{where}: {e}"


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    try:
        summary = dispatch(args)
    except InfeasibleConstraintsError as e:
        logger.error(_failure(e))
        return EXIT_INFEASIBLE
    except NumericalError as e:
        logger.error(_failure(e))
        return EXIT_NUMERICAL
    except ConfigError as e:
        logger.error(_failure(e))
        return EXIT_CONFIG
    except (ValueError, OSError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_CONFIG
    logger.info("%s finished:\n%s", args.command, pformat(summary))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
