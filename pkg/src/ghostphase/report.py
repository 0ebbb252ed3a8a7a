"""CSV output of run reports and coincidence maps, and envelope file input."""

from pathlib import Path
from typing import TYPE_CHECKING, List

import numpy as np

from .config import config_to_mapping
from .engine import CoincidenceMap
from .errors import DataError, OutputError
from .grid import interpolate_real

if TYPE_CHECKING:
    from .core import RunReport

CSV_HEADER = "x2_m,coincidence_raw,coincidence_corrected,singles_d2"
FLOAT_FMT = "%.9g"

# config keys left out of the echo; they do not change the numbers
_NOT_ECHOED = ("workers",)


def _fmt(v: float) -> str:
    return FLOAT_FMT % v


def _echo_lines(mapping, indent: str = "") -> List[str]:
    lines = []
    for key, value in mapping.items():
        if isinstance(value, dict):
            lines.append(f"{indent}{key}:")
            lines.extend(_echo_lines(value, indent + "  "))
        elif isinstance(value, float):
            lines.append(f"{indent}{key}: {_fmt(value)}")
        elif isinstance(value, list):
            lines.append(f"{indent}{key}: [{', '.join(_fmt(v) if isinstance(v, float) else str(v) for v in value)}]")
        else:
            lines.append(f"{indent}{key}: {value}")
    return lines


def csv_text(report: "RunReport") -> str:
    mapping = {k: v for k, v in config_to_mapping(report.config).items() if k not in _NOT_ECHOED}
    out = [f"# ghostphase scenario: {report.config.name}"]
    out += [f"# {line}" for line in _echo_lines(mapping)]
    out.append(f"# normalize: {report.normalize}")
    out.append(f"# scale: {_fmt(report.scale)}")
    out.append(f"# pair_peak: {_fmt(report.pair_peak)}")
    out.append(f"# collection_factor: {_fmt(report.collection_factor)}")
    out.append(f"# collected_peak: {_fmt(float(report.collected.max()))}")
    out.append(CSV_HEADER)
    s = report.scan
    for row in zip(s.x2, s.coincidence, s.corrected, s.singles_d2):
        out.append(",".join(_fmt(v) for v in row))
    return "\n".join(out) + "\n"


def _write(path, text: str) -> None:
    p = Path(path)
    try:
        with open(p, "w", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise OutputError(f"cannot write {p}: {e.strerror or e}") from None


def emit_csv(report: "RunReport", path) -> None:
    _write(path, csv_text(report))


def emit_g2(m: CoincidenceMap, path) -> None:
    """
    Full G2 matrix: the first row holds the D2 coordinates, every following
    row starts with its D1 coordinate.
    """
    rows = ["x1_m\\x2_m," + ",".join(_fmt(v) for v in m.grid2.coordinates)]
    for x1, values in zip(m.grid1.coordinates, m.g2):
        rows.append(_fmt(x1) + "," + ",".join(_fmt(v) for v in values))
    _write(path, "\n".join(rows) + "\n")


def read_envelope(path):
    """
    Two-column CSV (x2_m, weight). Lines starting with '#' and a single
    header line are skipped; positions must increase and weights be >= 0.
    """
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise OutputError(f"cannot read envelope {p}: {e.strerror or e}") from None
    xs, ws = [], []
    seen_header = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [c.strip() for c in line.split(",")]
        try:
            x, w = (float(c) for c in parts)
        except ValueError:
            if not xs and not seen_header:
                seen_header = True
                continue
            raise DataError(f"{p}:{lineno}: expected two numbers, got '{line}'") from None
        if w < 0:
            raise DataError(f"{p}:{lineno}: negative envelope weight {w}")
        xs.append(x)
        ws.append(w)
    if len(xs) < 2:
        raise DataError(f"{p}: envelope needs at least two rows")
    x = np.array(xs)
    if np.any(np.diff(x) <= 0):
        raise DataError(f"{p}: envelope positions must increase")
    return x, np.array(ws)


def load_envelope(path, x2: np.ndarray) -> np.ndarray:
    """Envelope weights interpolated onto the scan points (zero outside the file's range)."""
    x, w = read_envelope(path)
    return interpolate_real(x, w, np.asarray(x2, dtype=float))
