"""Exception types for ghostphase and the exit codes the CLI maps them to."""

import copy
from typing import Optional

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3
EXIT_IO = 4


class GhostPhaseError(Exception):
    """Base class for all errors raised by the simulator."""

    exit_code = 1
    category = "error"


class ConfigurationError(GhostPhaseError, ValueError):
    """Invalid configuration: bad value, unknown key, inconsistent grids."""

    exit_code = EXIT_CONFIG
    category = "configuration"

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class PreconditionError(ConfigurationError):
    """A numerical precondition failed (aliasing, under-resolved grid)."""

    exit_code = EXIT_PRECONDITION
    category = "numerical precondition"


class DataError(GhostPhaseError, ValueError):
    """Invalid data values, e.g. a negative or mismatched envelope."""

    exit_code = EXIT_CONFIG
    category = "data"


class OutputError(GhostPhaseError, OSError):
    """Reading or writing a file failed."""

    exit_code = EXIT_IO
    category = "I/O"


def with_context(err: GhostPhaseError, context: str) -> GhostPhaseError:
    """Return a copy of ``err`` (same class) with ``context`` prefixed to its message."""
    new = copy.copy(err)
    new.args = (f"{context}: {err}",)
    return new
