"""Entry point for the command-line front end.

This module parses the command line into a ``JobSpec``, sets up logging
and hands the job to the runner.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, NoReturn, Optional, Sequence

from amenable_pressure.exceptions import InputError
from amenable_pressure.runner import COMMANDS, EXIT_INPUT, JobSpec, run

# Configure root logger for terminal output
root_logger = logging.getLogger()
root_logger.setLevel(logging.INFO)

# Create console handler for terminal output
console_handler = logging.StreamHandler(sys.stderr)
console_handler.setFormatter(logging.Formatter("%(message)s"))
root_logger.addHandler(console_handler)

# Get module logger
logger = logging.getLogger(__name__)

PACKAGE_LOGGER = "amenable_pressure"


class JobArgumentParser(argparse.ArgumentParser):
    """Parser whose usage errors exit with the input-error status."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    """Command-line flags; defaults mirror ``JobSpec``."""
    parser = JobArgumentParser(
        prog="amenable-pressure",
        description=(
            "Cover-relative pressure, entropy and variational checks for "
            "symbolic systems over Z^d"
        ),
    )
    parser.add_argument(
        "--system", required=True, help="system-description JSON file"
    )
    parser.add_argument("--command", required=True, choices=COMMANDS)
    parser.add_argument("--n-max", type=int, default=8)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--mode", choices=("exact", "greedy"), default="exact"
    )
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--tolerance", type=float, default=1e-6)
    parser.add_argument("--cover", default=None, help="name of a cover")
    parser.add_argument("--restarts", type=int, default=3)
    parser.add_argument("--samples", type=int, default=500)
    parser.add_argument(
        "--verbose", action="store_true", help="log at DEBUG level"
    )
    return parser


def job_from_args(args: argparse.Namespace) -> JobSpec:
    return JobSpec(
        system=Path(args.system),
        command=args.command,
        n_max=args.n_max,
        seed=args.seed,
        mode=args.mode,
        out=Path(args.out) if args.out else None,
        tolerance=args.tolerance,
        cover=args.cover,
        restarts=args.restarts,
        samples=args.samples,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments and run one job.

    Returns:
        int: Exit status of the job
    """
    args = build_parser().parse_args(
        list(argv) if argv is not None else None
    )
    if args.verbose:
        logging.getLogger(PACKAGE_LOGGER).setLevel(logging.DEBUG)
    try:
        job = job_from_args(args)
    except InputError as e:
        logger.error("Invalid job: %s", str(e))
        return EXIT_INPUT
    return run(job)


def main_entry(argv: Optional[List[str]] = None) -> None:
    """Console-script entry point."""
    try:
        status = main(argv)
    except KeyboardInterrupt:
        logger.info("Stopped by user")
        status = EXIT_INPUT
    sys.exit(status)


if __name__ == "__main__":
    main_entry()
