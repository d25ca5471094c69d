"""Environment configuration.

The ``.env`` file at the repository root is loaded before anything reads the
environment, so local overrides work the same way for the CLI and for tests.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

parent_dir = str(Path(__file__).resolve().parent.parent)
dotenv_path = os.path.join(parent_dir, '.env')
load_dotenv(dotenv_path)

VERSION = "1.0.0"

DEFAULT_POPULATION_CAP = 1_000_000


def _int_from_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        value = int(raw)
    except ValueError:
        print(f"Warning: ignoring non-integer {name}={raw!r}")
        return default
    return value if value > 0 else default


def default_workers() -> int:
    """Worker count used when ``--workers`` is not given."""
    return _int_from_env('BBM_VOTING_WORKERS', 1)


def population_cap() -> int:
    return _int_from_env('BBM_VOTING_POPULATION_CAP', DEFAULT_POPULATION_CAP)


def log_level() -> str:
    return os.getenv('BBM_VOTING_LOG_LEVEL', 'INFO').upper()
