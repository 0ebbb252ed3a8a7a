"""
Coincidence engine: the biphoton amplitude between the two detector planes,
pinhole-integrated scans, singles rates, envelope correction and the
advanced-wave (point source at D1) cross-check.

The amplitude is the matrix product A = H1 . Phi . H2^T . pitch^2 over the
crystal plane; g2 = |A|^2.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import ConfigurationError, DataError
from .grid import GRID_RTOL, ComplexField, Grid1D, interpolate_real
from .optics import SlitWindow, window_mask
from .propagation import TransferKernel
from .source import BiphotonState
from .utils import map_row_blocks


@dataclass(frozen=True, eq=False)
class TwoArmSystem:
    """h1 maps the crystal plane to D1 (object included); h2 maps it to D2."""

    h1: TransferKernel
    h2: TransferKernel

    def __post_init__(self):
        if not self.h1.grid_in.matches(self.h2.grid_in):
            raise ConfigurationError("both arms must start on the same source grid")

    @property
    def source_grid(self) -> Grid1D:
        return self.h1.grid_in


@dataclass(frozen=True, eq=False)
class CoincidenceMap:
    grid1: Grid1D
    grid2: Grid1D
    amplitude: np.ndarray

    @cached_property
    def g2(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def total(self) -> float:
        """Sum of g2 over both detector planes (with quadrature weights)."""
        return float(np.sum(self.g2) * self.grid1.pitch * self.grid2.pitch)


@dataclass(frozen=True, eq=False)
class ScanResult:
    x2: np.ndarray
    coincidence: np.ndarray
    singles_d2: np.ndarray
    corrected: np.ndarray
    envelope: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        n = len(self.x2)
        for name in ("coincidence", "singles_d2", "corrected"):
            if len(getattr(self, name)) != n:
                raise DataError(f"scan column '{name}' has {len(getattr(self, name))} values, expected {n}")


@dataclass(frozen=True)
class ProfileMetrics:
    peak: float
    peak_x: float
    center_value: float
    visibility: float
    dip_width: float
    rms_width: float


def coincidence_amplitude(
    state: BiphotonState, sys: TwoArmSystem, workers: Optional[int] = None
) -> CoincidenceMap:
    if not state.grid.matches(sys.source_grid):
        raise ConfigurationError("state grid does not match the system source grid")
    h1, h2 = sys.h1, sys.h2
    p = state.grid.pitch
    h2t = h2.h.T
    out = np.empty((h1.grid_out.n, h2.grid_out.n), dtype=np.complex128)

    if state.is_diagonal:
        weight = state.values * p

        def fill(start: int, stop: int) -> None:
            out[start:stop] = (_rows(h1, start, stop) * weight[None, :]) @ h2t

    else:
        phi = state.values

        def fill(start: int, stop: int) -> None:
            out[start:stop] = ((_rows(h1, start, stop) @ phi) @ h2t) * (p * p)

    map_row_blocks(h1.grid_out.n, fill, workers)
    return CoincidenceMap(h1.grid_out, h2.grid_out, out)


def _rows(k: TransferKernel, start: int, stop: int) -> np.ndarray:
    if k.diagonal:
        rows = np.zeros((stop - start, k.grid_in.n), dtype=np.complex128)
        idx = np.arange(start, stop)
        rows[idx - start, idx] = np.diagonal(k.h)[start:stop]
        return rows
    return k.h[start:stop]


def singles_rate(m: CoincidenceMap, at: str) -> np.ndarray:
    """Singles at one detector plane: g2 summed over the other plane."""
    if at == "d2":
        return np.sum(m.g2, axis=0) * m.grid1.pitch
    if at == "d1":
        return np.sum(m.g2, axis=1) * m.grid2.pitch
    raise ConfigurationError(f"unknown detector '{at}' (use 'd1' or 'd2')")


def window_average(values: np.ndarray, grid: Grid1D, width: float) -> np.ndarray:
    """
    Moving average over a centred box of ``width`` (odd sample count, zero
    outside the grid). A width of one pitch leaves the profile unchanged.
    """
    half = int(np.floor(width / 2 / grid.pitch + GRID_RTOL))
    m = 2 * half + 1
    if m == 1:
        return np.array(values, dtype=float)
    return np.convolve(values, np.full(m, 1.0 / m), mode="same")


def scan_coincidence(
    m: CoincidenceMap, p1: SlitWindow, p2: SlitWindow, x2: Optional[np.ndarray] = None
) -> ScanResult:
    """
    C(x2): g2 integrated over P1, then averaged along x2 over the P2 acceptance.
    With ``x2`` the profile is linearly interpolated onto those scan points;
    otherwise it is returned on the D2 grid.
    """
    mask1 = window_mask(m.grid1, p1)
    window_mask(m.grid2, p2)
    raw = np.sum(m.g2[mask1], axis=0) * m.grid1.pitch
    coincidence = window_average(raw, m.grid2, p2.width)
    singles = window_average(singles_rate(m, "d2"), m.grid2, p2.width)
    if x2 is None:
        x2 = np.array(m.grid2.coordinates)
    else:
        x2 = np.asarray(x2, dtype=float)
        coincidence = interpolate_real(m.grid2.coordinates, coincidence, x2)
        singles = interpolate_real(m.grid2.coordinates, singles, x2)
    return ScanResult(x2, coincidence, singles, coincidence.copy())


def collection_factor(m: CoincidenceMap, p1: SlitWindow) -> float:
    """Fraction of the D1 singles that falls inside P1."""
    s1 = singles_rate(m, "d1")
    total = float(np.sum(s1))
    if total == 0:
        return 0.0
    return float(np.sum(s1[window_mask(m.grid1, p1)]) / total)


def envelope_correct(scan: ScanResult, envelope: np.ndarray) -> ScanResult:
    env = np.asarray(envelope, dtype=float)
    if env.shape != scan.x2.shape:
        raise DataError(f"envelope has {env.size} values but the scan has {scan.x2.size} points")
    if np.any(env < 0) or not np.all(np.isfinite(env)):
        raise DataError("envelope values must be finite and >= 0")
    top = env.max()
    if top == 0:
        raise DataError("envelope is zero everywhere")
    return replace(scan, corrected=scan.coincidence * env / top, envelope=env)


def klyshko_image(
    state: BiphotonState, sys: TwoArmSystem, x1: float
) -> ComplexField:
    """
    Field at D2 from a point source at x1 on D1 sent backward through arm 1,
    reflected by the crystal with weight phi(x, x), and forward through arm 2.
    """
    if not state.is_diagonal:
        raise ConfigurationError("the point-source picture needs a diagonal (thin-crystal) state")
    if not state.grid.matches(sys.source_grid):
        raise ConfigurationError("state grid does not match the system source grid")
    i = sys.h1.grid_out.index_of(x1)
    # backward through arm 1: a unit impulse at x1 picks out row i of h1
    back = _rows(sys.h1, i, i + 1)[0]
    at_crystal = back * state.values
    amp = (sys.h2.h @ at_crystal) * state.grid.pitch
    return ComplexField(sys.h2.grid_out, amp)


def profile_metrics(x: np.ndarray, y: np.ndarray) -> ProfileMetrics:
    """
    Peak, centre value, dip visibility, full dip width at half depth and RMS
    width of a scan profile. The centre is the sample nearest the middle of
    the scan range.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ip = int(np.argmax(y))
    peak = float(y[ip])
    ic = int(np.argmin(np.abs(x - 0.5 * (x[0] + x[-1]))))
    center = float(y[ic])
    visibility = (peak - center) / (peak + center) if peak + center > 0 else 0.0
    total = float(np.sum(y))
    if total > 0:
        mean = float(np.sum(x * y) / total)
        rms = float(np.sqrt(np.sum(y * (x - mean) ** 2) / total))
    else:
        rms = 0.0
    return ProfileMetrics(peak, float(x[ip]), center, visibility, dip_width(x, y, ic, peak), rms)


def dip_width(x: np.ndarray, y: np.ndarray, ic: int, peak: float) -> float:
    """Distance between the half-depth crossings found walking out from ``ic``."""
    level = 0.5 * (peak + y[ic])
    if y[ic] >= level:
        return 0.0
    left = _crossing(x, y, ic, level, -1)
    right = _crossing(x, y, ic, level, +1)
    if left is None or right is None:
        return 0.0
    return right - left


def _crossing(x, y, start, level, step):
    j = start
    while 0 <= j + step < len(y):
        nxt = j + step
        if y[nxt] >= level:
            t = (level - y[j]) / (y[nxt] - y[j])
            return float(x[j] + t * (x[nxt] - x[j]))
        j = nxt
    return None


def local_maxima(y: np.ndarray, rel: float = 0.5) -> np.ndarray:
    """Indices of interior local maxima at least ``rel`` times the global peak."""
    y = np.asarray(y, dtype=float)
    inner = (y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]) & (y[1:-1] >= rel * y.max())
    return np.nonzero(inner)[0] + 1
