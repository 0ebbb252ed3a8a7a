"""Two-photon state functions: the thin-crystal delta limit and the full pump/phase-matching model."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import fft as sp_fft

from .errors import ConfigurationError, PreconditionError
from .grid import EDGE_TOLERANCE, GRID_RTOL, Grid1D, Wavelength
from .utils import warn

DIAGONAL = "diagonal-thin-crystal"
FULL = "full"

PUMP_PROFILES = ("plane-wave", "gaussian")

# |q| / k_pump above which the paraxial mismatch formula is flagged
PARAXIAL_LIMIT = 0.1


@dataclass(frozen=True)
class SourceSpec:
    """
    Down-conversion source. ``pump_aperture`` bounds the illuminated region of
    the thin-crystal state (None means the whole grid); ``waist`` is the 1/e
    amplitude radius of a Gaussian pump E_p(y) = exp(-y^2 / waist^2).
    """

    lam_pump: Wavelength
    crystal_length: float
    pump_profile: str = "plane-wave"
    waist: Optional[float] = None
    pump_aperture: Optional[float] = None

    def __post_init__(self):
        if not (self.crystal_length >= 0 and math.isfinite(self.crystal_length)):
            raise ConfigurationError(
                f"crystal_length must be >= 0, got {self.crystal_length!r}", key="crystal_length"
            )
        if self.pump_profile not in PUMP_PROFILES:
            raise ConfigurationError(f"unknown pump profile '{self.pump_profile}'", key="envelope")
        if self.pump_profile == "gaussian" and not (self.waist and self.waist > 0):
            raise ConfigurationError(f"gaussian pump needs a positive waist, got {self.waist!r}", key="waist")
        if self.pump_aperture is not None and not self.pump_aperture > 0:
            raise ConfigurationError(f"pump aperture must be positive, got {self.pump_aperture!r}")


@dataclass(frozen=True, eq=False)
class BiphotonState:
    """
    phi(x, x') on a grid shared by both photons. Diagonal states keep only
    their diagonal in ``values``; full states keep the whole matrix.
    """

    grid: Grid1D
    values: np.ndarray
    form: str

    @property
    def is_diagonal(self) -> bool:
        return self.form == DIAGONAL

    @property
    def phi(self) -> np.ndarray:
        if self.is_diagonal:
            return np.diag(self.values)
        return self.values

    def norm(self) -> float:
        """Discrete version of the double integral of |phi|^2."""
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.pitch ** 2)

    def marginal(self) -> np.ndarray:
        """Probability density of the first photon: sum_j |phi[i, j]|^2 * pitch."""
        if self.is_diagonal:
            return np.abs(self.values) ** 2 * self.grid.pitch
        return np.sum(np.abs(self.values) ** 2, axis=1) * self.grid.pitch

    def edge_fraction(self) -> float:
        """Largest edge value of the marginal relative to its peak (0 for a zero state)."""
        m = self.marginal()
        peak = m.max()
        if peak == 0:
            return 0.0
        return float(max(m[0], m[-1]) / peak)


def check_state_edges(state: BiphotonState) -> None:
    """Warn when the state has not decayed at the grid edges."""
    frac = state.edge_fraction()
    if frac > EDGE_TOLERANCE:
        warn(f"source state edge density is {frac:.3g} of peak; source grid may be too small")


def longitudinal_mismatch(q1, q2, k_pump: float):
    """Paraxial degenerate collinear mismatch (q1 - q2)^2 / (2 k_pump), rad/m."""
    dq = np.subtract(q1, q2)
    return dq * dq / (2 * k_pump)


def phase_matching(q1, q2, spec: SourceSpec):
    """
    sinc(l*Delta / 2pi) * exp(-i l Delta / 2), with sinc(u) = sin(pi u)/(pi u),
    i.e. sin(l Delta / 2)/(l Delta / 2) times the propagation phase.
    """
    k_p = spec.lam_pump.k
    if max(np.max(np.abs(q1)), np.max(np.abs(q2))) > PARAXIAL_LIMIT * k_p:
        warn("transverse momenta are not small against the pump wavenumber; mismatch is paraxial")
    delta = longitudinal_mismatch(q1, q2, k_p)
    l = spec.crystal_length
    return np.sinc(l * delta / (2 * math.pi)) * np.exp(-0.5j * l * delta)


def build_thin_crystal_state(spec: SourceSpec, grid: Grid1D) -> BiphotonState:
    aperture = grid.extent if spec.pump_aperture is None else spec.pump_aperture
    if aperture > grid.extent * (1 + GRID_RTOL):
        raise ConfigurationError(
            f"pump aperture {aperture:.6g} m exceeds the crystal grid extent {grid.extent:.6g} m"
        )
    mask = np.abs(grid.coordinates - grid.center) <= aperture / 2 + GRID_RTOL * grid.pitch
    m = int(np.count_nonzero(mask))
    if m == 0:
        raise ConfigurationError(f"pump aperture {aperture:.6g} m covers no grid samples")
    diag = np.where(mask, 1.0 / (grid.pitch * math.sqrt(m)), 0.0).astype(np.complex128)
    return BiphotonState(grid, diag, DIAGONAL)


def build_full_state(spec: SourceSpec, grid: Grid1D) -> BiphotonState:
    """
    phi(x, x') = integral of E_p(y) xi(x - y, x' - y) dy, evaluated in the
    transverse-momentum domain where it is Ep~(q1 + q2) * xi~(q1, q2).
    """
    if spec.pump_profile != "gaussian":
        raise ConfigurationError("the full state model needs a gaussian pump", key="envelope")
    if spec.crystal_length <= 0:
        raise ConfigurationError("the full state model needs crystal_length > 0", key="crystal_length")
    q_support = math.sqrt(4 * math.pi * spec.lam_pump.k / spec.crystal_length)
    nyquist = math.pi / grid.pitch
    if q_support > nyquist:
        raise PreconditionError(
            f"grid pitch {grid.pitch:.6g} m is too coarse for the phase-matching support "
            f"({q_support:.4g} rad/m > {nyquist:.4g} rad/m)",
            key="envelope",
        )
    if 3 * spec.waist > grid.extent / 2:
        raise PreconditionError(
            f"pump waist {spec.waist:.6g} m does not fit the source grid "
            f"(extent {grid.extent:.6g} m)",
            key="envelope",
        )
    n = grid.n
    q = 2 * math.pi * sp_fft.fftfreq(n, d=grid.pitch)
    q1, q2 = q[:, None], q[None, :]
    pump = np.exp(-((q1 + q2) ** 2) * spec.waist ** 2 / 4)
    spectrum = pump * phase_matching(q1, q2, spec)
    # place x = 0 on the grid centre
    shift = np.exp(1j * q * (grid.lo - grid.center))
    spectrum = spectrum * shift[:, None] * shift[None, :]
    phi = sp_fft.ifft2(spectrum)
    phi = 0.5 * (phi + phi.T)
    phi /= math.sqrt(np.sum(np.abs(phi) ** 2) * grid.pitch ** 2)
    return BiphotonState(grid, phi, FULL)


def correlation_width(state: BiphotonState) -> float:
    """RMS of x - x' weighted by |phi|^2 (zero for the diagonal state)."""
    if state.is_diagonal:
        return 0.0
    x = state.grid.coordinates
    dx = x[:, None] - x[None, :]
    w = np.abs(state.values) ** 2
    return float(math.sqrt(np.sum(w * dx * dx) / np.sum(w)))
