"""Utility functions for ghostphase."""

import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Union

import psutil

PREFIX = "[ghostphase]"

# Silences progress lines (warnings are always printed)
QUIET = False

# Rows per work unit for blocked matrix evaluation
ROW_BLOCK = 64

_UNITS = {
    "NM": 1e-9,
    "UM": 1e-6,
    "MM": 1e-3,
    "CM": 1e-2,
    "M": 1.0,
}


def parse_length(value: Union[str, float, int]) -> float:
    """
    Convert lengths like '1.4mm', '300um', '812nm', '1.17m' into meters.
    Bare numbers are taken as meters.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a length: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    s = str(value).strip().upper().replace("µ", "U")
    # longest suffix first so 'MM' is not read as 'M'
    for suffix in sorted(_UNITS, key=len, reverse=True):
        if s.endswith(suffix):
            return float(s[: -len(suffix)].strip()) * _UNITS[suffix]
    return float(s)


def format_length(meters: float) -> str:
    """Render a length with a readable unit (for log lines, not for data files)."""
    a = abs(meters)
    if a >= 1.0:
        return f"{meters:.3g} m"
    if a >= 1e-3:
        return f"{meters * 1e3:.4g} mm"
    if a >= 1e-6:
        return f"{meters * 1e6:.4g} um"
    return f"{meters * 1e9:.4g} nm"


def log(message: str) -> None:
    if not QUIET:
        print(f"{PREFIX} {message}")


def warn(message: str) -> None:
    print(f"{PREFIX} Warning: {message}", file=sys.stderr)


def default_workers() -> int:
    """Physical core count, falling back to the logical count, then 1."""
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


def map_row_blocks(
    n_rows: int, fn: Callable[[int, int], None], workers: Optional[int] = None
) -> None:
    """
    Call ``fn(start, stop)`` for consecutive blocks of ROW_BLOCK rows.

    Blocks are fixed regardless of ``workers``, and each block writes its own
    rows, so results do not depend on the worker count.
    """
    spans = [(s, min(s + ROW_BLOCK, n_rows)) for s in range(0, n_rows, ROW_BLOCK)]
    workers = workers or default_workers()
    if workers <= 1 or len(spans) == 1:
        for start, stop in spans:
            fn(start, stop)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for fut in [pool.submit(fn, start, stop) for start, stop in spans]:
            fut.result()
