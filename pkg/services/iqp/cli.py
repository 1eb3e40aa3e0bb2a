"""
Command-line entry point.

Reports go to standard output as one `key=value` line; diagnostics go to
standard error. Exit codes: 0 accept/success, 1 reject, 2 inconclusive,
3 usage or malformed input, 4 infeasible size.
"""

import argparse
import logging
import sys
from typing import List, NoReturn, Optional

from shared.utils.logging import setup_logging

from .commands import analysis, alice, bob
from .config import CLISettings
from .errors import EXIT_ACCEPT, EXIT_USAGE, IQPError, UsageError

logger = logging.getLogger(__name__)


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser that raises UsageError instead of exiting with code 2."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def create_parser() -> ArgumentParser:
    """Build the parser with every subcommand registered."""
    parser = ArgumentParser(
        prog="iqp",
        description="IQP X-program simulation, challenge protocol and reductions",
    )
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    parser.add_argument("--threads", type=int, default=1, help="worker threads for enumeration")
    parser.add_argument("--max-qubits", type=int, default=24, help="Fourier backend qubit cap")
    parser.add_argument("--max-rows", type=int, default=20, help="path-sum backend row cap")
    parser.add_argument("--max-rank", type=int, default=28, help="weight enumeration rank cap")
    parser.add_argument("--max-statevector", type=int, default=20, help="dense statevector qubit cap")
    parser.add_argument("--max-calibration", type=int, default=16, help="exact verifier calibration qubit cap")

    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)
    alice.register(subparsers)
    bob.register(subparsers)
    analysis.register(subparsers)
    return parser


def build_settings(args: argparse.Namespace) -> CLISettings:
    try:
        return CLISettings(
            fourier_max_qubits=args.max_qubits,
            pathsum_max_rows=args.max_rows,
            enumeration_max_rank=args.max_rank,
            statevector_max_qubits=args.max_statevector,
            calibration_max_qubits=args.max_calibration,
            threads=args.threads,
            log_level=args.log_level,
        )
    except ValueError as e:
        raise UsageError(f"invalid settings: {e}") from e


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, dispatch to the command handler, return the exit code."""
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
        setup_logging(level=args.log_level)
        settings = build_settings(args)
    except SystemExit as e:
        return int(e.code or 0)
    except IQPError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code

    try:
        return args.handler(args, settings)
    except IQPError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"Unexpected failure in {args.command}: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> NoReturn:
    sys.exit(run())


__all__ = ["create_parser", "run", "main", "EXIT_ACCEPT"]
