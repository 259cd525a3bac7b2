"""
Project Name: Faithlab
Copyright (c) 2024 Faithlab contributors

Permission is hereby granted under MIT license.

Main Module
"""

import sys
import argparse
import signal
import logging

try:
    from .config import open_config
    from .utils import set_verbose
    from .__init__ import __version__ as version
    from .catalog import init_catalog, list_catalog
    from .commands import (
        EXPERIMENTS,
        check_faithful_model,
        configure,
        dsep,
        experiment,
        interpolate,
        project,
    )
    from .errors import FaithlabError, ModelInvariantError, SizeLimitError
    from .output import FORMATS
    from .typicality import FAMILIES
except ImportError:
    from config import open_config
    from utils import set_verbose
    from __init__ import __version__ as version
    from catalog import init_catalog, list_catalog
    from commands import (
        EXPERIMENTS,
        check_faithful_model,
        configure,
        dsep,
        experiment,
        interpolate,
        project,
    )
    from errors import FaithlabError, ModelInvariantError, SizeLimitError
    from output import FORMATS
    from typicality import FAMILIES

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_MODEL = 2
EXIT_SIZE = 3


class UsageError(Exception): ...


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with code 1 instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def add_output_arguments(parser):
    parser.add_argument(
        "--format",
        dest="fmt",
        choices=FORMATS,
        default="json",
        help="Report format, defaults to json.",
    )
    parser.add_argument("-o", "--out", type=str, help="Write the report to a file (optional)")


def build_parser():
    parser = ArgumentParser(
        prog="faithlab",
        description="Separation oracles, exact Bayesian networks and faithfulness experiments.",
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Enable verbose mode"
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"Faithlab version: {version}",
        help="Show the Faithlab version and exit.",
    )

    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    # Separation query
    dsep_parser = subparsers.add_parser("dsep", help="Decides d-/m-separation in a graph.")
    dsep_parser.add_argument("graph", type=str, help="Graph JSON file or catalog name.")
    dsep_parser.add_argument("--a", required=True, help="First vertex (or comma separated list)")
    dsep_parser.add_argument("--b", required=True, help="Second vertex (or comma separated list)")
    dsep_parser.add_argument("--c", default="", help="Conditioning vertices, comma separated")

    # Latent projection
    project_parser = subparsers.add_parser("project", help="Projects out latent vertices.")
    project_parser.add_argument("graph", type=str, help="Graph JSON file or catalog name.")
    project_parser.add_argument(
        "--latent", type=str, help="Latent vertices, defaults to the graph's 'latent' list"
    )
    project_parser.add_argument("-o", "--out", type=str, help="Write the ADMG to a file (optional)")

    # Faithfulness check
    check_parser = subparsers.add_parser(
        "check-faithful", help="Classifies every statement of a model."
    )
    check_parser.add_argument("model", type=str, help="Model JSON file or catalog name.")
    add_output_arguments(check_parser)

    # Interpolation
    interpolate_parser = subparsers.add_parser(
        "interpolate", help="Mixes two discrete models vertex by vertex."
    )
    interpolate_parser.add_argument("model0", type=str, help="Start model (λ = 0).")
    interpolate_parser.add_argument("model1", type=str, help="End model (λ = 1).")
    interpolate_parser.add_argument(
        "-l", "--lambda", dest="lam", required=True, help="Mixing weight p/q in [0, 1]"
    )
    interpolate_parser.add_argument("--a", help="Statement vertices for dependence polynomials")
    interpolate_parser.add_argument("--b", help="Statement vertices for dependence polynomials")
    interpolate_parser.add_argument("--c", default="", help="Conditioning vertices")
    add_output_arguments(interpolate_parser)

    # Experiments
    experiment_parser = subparsers.add_parser("experiment", help="Runs a typicality experiment.")
    experiment_parser.add_argument("kind", choices=EXPERIMENTS, help="Experiment to run.")
    experiment_parser.add_argument("--graph", type=str, help="Graph JSON file or catalog name.")
    experiment_parser.add_argument(
        "--model", type=str, help="Starting model for denseness, openness and line-scan."
    )
    experiment_parser.add_argument(
        "--family", choices=FAMILIES, default="discrete", help="Parameter family, defaults to discrete."
    )
    experiment_parser.add_argument("-n", "--samples", type=int, default=100, help="Draws per setting.")
    experiment_parser.add_argument(
        "-s", "--seed", type=int, default=0, help="Experiment seed, defaults to 0."
    )
    experiment_parser.add_argument("--epsilons", type=str, help="Decreasing p/q thresholds, comma separated")
    experiment_parser.add_argument("--radii", type=str, help="Decreasing p/q radii, comma separated")
    experiment_parser.add_argument("--radius", type=str, help="Probe radius for openness, p/q")
    experiment_parser.add_argument("--grid", type=int, default=100, help="Line-scan grid intervals.")
    experiment_parser.add_argument("--probes", type=int, default=100, help="Openness probes.")
    experiment_parser.add_argument("--directions", type=int, default=1, help="Line-scan directions.")
    experiment_parser.add_argument(
        "--latent", type=str, help="Latent vertices, defaults to the graph's 'latent' list"
    )
    experiment_parser.add_argument("--resolution", type=int, help="Sampling resolution M (optional)")
    experiment_parser.add_argument(
        "--cardinality", type=int, default=2, help="States per discrete vertex, defaults to 2."
    )
    add_output_arguments(experiment_parser)

    # List command
    subparsers.add_parser("list", help="Lists the named graphs and models.")

    config_parser = subparsers.add_parser("config", help="Handles CONFIGURATION values.")
    config_parser.add_argument(
        "--max-vertices", type=int, help="Enumeration size limit, -1 restores the default."
    )
    config_parser.add_argument(
        "--resolution", type=int, help="Sampling resolution M, -1 restores the default."
    )
    config_parser.add_argument(
        "--retry-budget", type=int, help="Draws allowed to find a dependent network, -1 restores the default."
    )
    config_parser.add_argument(
        "--root-precision", type=str, help="Width p/q of the λ* isolating interval, -1 restores the default."
    )
    return parser


def dispatch(args):
    if args.command == "dsep":
        return dsep(args.graph, args.a, args.b, args.c)
    elif args.command == "project":
        return project(args.graph, latent=args.latent, out=args.out)
    elif args.command == "check-faithful":
        return check_faithful_model(args.model, fmt=args.fmt, out=args.out)
    elif args.command == "interpolate":
        return interpolate(
            args.model0,
            args.model1,
            args.lam,
            a=args.a,
            b=args.b,
            c=args.c,
            fmt=args.fmt,
            out=args.out,
        )
    elif args.command == "experiment":
        return experiment(
            args.kind,
            graph=args.graph,
            model=args.model,
            family=args.family,
            samples=args.samples,
            seed=args.seed,
            epsilons=args.epsilons,
            radii=args.radii,
            radius=args.radius,
            grid=args.grid,
            probes=args.probes,
            directions=args.directions,
            latent=args.latent,
            resolution=args.resolution,
            cardinality=args.cardinality,
            fmt=args.fmt,
            out=args.out,
        )
    elif args.command == "list":
        return list_catalog()
    elif args.command == "config":
        return configure(
            {
                "max-vertices": args.max_vertices,
                "resolution": args.resolution,
                "retry-budget": args.retry_budget,
                "root-precision": args.root_precision,
            }
        )
    return EXIT_OK


def run(argv=None):
    """
    Parses `argv`, runs the subcommand and maps errors to exit codes:
    1 for input and usage errors, 2 for model invariant violations, 3 for
    size limits.
    """
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        parser.print_help()
        return EXIT_INPUT
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_INPUT

    open_config()
    init_catalog()
    set_verbose(args.verbose)
    logger.info(f"Faithlab version: {version}")

    try:
        return dispatch(args)
    except ModelInvariantError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_MODEL
    except SizeLimitError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_SIZE
    except FaithlabError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT


def main():
    signal.signal(signal.SIGINT, exit_gracefully)
    return run()


def exit_gracefully(signum, frame):
    print("\n", file=sys.stderr)
    print("Process interrupted.", file=sys.stderr)
    sys.exit(1)


if __name__ == "__main__":
    sys.exit(main())
