"""
Command-line entry point.

    python -m bbm_voting.cli <command> [flags]

Exit status: 0 success, 1 invalid input, 2 runtime or resource failure,
3 a `compare --assert` disagreement.
"""

import argparse
import logging
import re
import sys
from typing import List, Optional, Sequence

from rich.console import Console
from rich.logging import RichHandler

from bbm_voting import settings
from bbm_voting.commands import compare, models, simulate, solve
from bbm_voting.errors import BBMVotingError, RuntimeFailure

logger = logging.getLogger('bbm_voting')

# argparse reads "-2:2:9" as an option; these flags take such values
_SIGNED_VALUE_FLAGS = ('--x', '--window', '--x-min', '--x-max')
_SIGNED_VALUE = re.compile(r'^-[\d.]')


def _join_signed_values(argv: Sequence[str]) -> List[str]:
    out: List[str] = []
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg in _SIGNED_VALUE_FLAGS and i + 1 < len(argv) and _SIGNED_VALUE.match(argv[i + 1]):
            out.append(f"{arg}={argv[i + 1]}")
            i += 2
            continue
        out.append(arg)
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='bbm-voting',
        description='Voting models on branching Brownian motion: compile, simulate, solve, compare',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    # Compile Fisher-KPP into a monotone voting table
    python -m bbm_voting.cli compile --f "[0,1,-1]" --monotone

    # Expanded nonlinearity of a model document
    python -m bbm_voting.cli nonlinearity --model efp.json

    # Monte Carlo vs PDE for Allen-Cahn
    python -m bbm_voting.cli compare --f allen-cahn --t 1 --x -2:2:9 --n 100000 --seed 7 --assert
        """,
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {settings.VERSION}")
    parser.add_argument('--log-level', default=None,
                        help='Logging level (default from BBM_VOTING_LOG_LEVEL or INFO)')
    subparsers = parser.add_subparsers(dest='command', required=True, metavar='command')
    # Register subcommands (one module per command group).
    models.register(subparsers)
    simulate.register(subparsers)
    solve.register(subparsers)
    compare.register(subparsers)
    return parser


def configure_logging(level: Optional[str] = None) -> None:
    name = (level or settings.log_level()).upper()
    logging.basicConfig(
        level=getattr(logging, name, logging.INFO),
        format='%(message)s',
        datefmt='[%X]',
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, dispatch, and map failures to exit codes."""
    parser = build_parser()
    argv = _join_signed_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # usage errors are invalid input
        return 0 if e.code in (0, None) else 1
    configure_logging(args.log_level)

    try:
        return args.handler(args)
    except BBMVotingError as e:
        print(f"\nERROR: {e}", file=sys.stderr)
        return e.exit_code
    except Exception:
        logger.exception("unexpected failure")
        return RuntimeFailure.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == '__main__':
    main()
