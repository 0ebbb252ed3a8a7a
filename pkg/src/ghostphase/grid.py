"""Sample grids, complex fields and wavelengths shared by every optical plane."""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError

# Relative tolerance used when deciding whether two grids describe the same plane
GRID_RTOL = 1e-9

# Edge intensity (relative to peak) above which a field or state is flagged as truncated
EDGE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Wavelength:
    """Vacuum wavelength in meters."""

    lam: float

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ConfigurationError(f"wavelength must be positive, got {self.lam!r}")

    @property
    def k(self) -> float:
        return 2 * math.pi / self.lam


@dataclass(frozen=True)
class Grid1D:
    """
    Uniform 1-D lattice: coordinate(i) = center + (i - (n-1)/2) * pitch.

    Grids are plain values; fields and kernels carry the grids they live on.
    """

    n: int
    pitch: float
    center: float = 0.0

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 2:
            raise ConfigurationError(f"grid needs n >= 2 samples, got {self.n!r}")
        if not (self.pitch > 0 and math.isfinite(self.pitch)):
            raise ConfigurationError(f"grid pitch must be positive, got {self.pitch!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def extent(self) -> float:
        return self.n * self.pitch

    @property
    def half_index(self) -> float:
        return (self.n - 1) / 2

    def coordinate(self, i: int) -> float:
        return self.center + (i - self.half_index) * self.pitch

    @cached_property
    def coordinates(self) -> np.ndarray:
        x = self.center + (np.arange(self.n) - self.half_index) * self.pitch
        x.flags.writeable = False
        return x

    @property
    def lo(self) -> float:
        return self.coordinate(0)

    @property
    def hi(self) -> float:
        return self.coordinate(self.n - 1)

    def matches(self, other: "Grid1D") -> bool:
        """True when both grids sample the same points (within GRID_RTOL of a pitch)."""
        if self.n != other.n:
            return False
        if abs(self.pitch - other.pitch) > GRID_RTOL * self.pitch:
            return False
        return abs(self.center - other.center) <= GRID_RTOL * self.pitch

    def index_of(self, x: float) -> int:
        """Index of the sample nearest to ``x``; off-grid positions are an error."""
        i = int(round((x - self.center) / self.pitch + self.half_index))
        if i < 0 or i >= self.n or abs(self.coordinate(i) - x) > 0.5 * self.pitch * (1 + GRID_RTOL):
            raise ConfigurationError(
                f"position {x:.6g} m is not on the grid [{self.lo:.6g}, {self.hi:.6g}] m"
            )
        return i

    def dual(self, distance: float, wavelength: Wavelength, center: float = 0.0) -> "Grid1D":
        """
        Grid on which a Fresnel transform over ``distance`` from this grid is an
        exact discrete Fourier transform: pitch_out = lambda*d / (n*pitch).
        """
        return Grid1D(self.n, wavelength.lam * distance / (self.n * self.pitch), center)


def make_grid(n: int, pitch: float, center: float = 0.0) -> Grid1D:
    return Grid1D(n, pitch, center)


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex transverse field sampled on a grid (amplitude per sample)."""

    grid: Grid1D
    amp: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amp, dtype=np.complex128)
        if amp.ndim != 1 or amp.shape[0] != self.grid.n:
            raise ConfigurationError(
                f"field has {amp.size} samples but its grid has {self.grid.n}"
            )
        amp.flags.writeable = False
        object.__setattr__(self, "amp", amp)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amp) ** 2

    def scaled(self, factor: complex) -> "ComplexField":
        return ComplexField(self.grid, self.amp * factor)

    def edge_fraction(self) -> float:
        """Largest edge-sample intensity relative to the peak intensity (0 for a zero field)."""
        inten = self.intensity
        peak = inten.max()
        if peak == 0:
            return 0.0
        return float(max(inten[0], inten[-1]) / peak)


def field_power(f: ComplexField) -> float:
    """Discrete L2 norm: sum |amp|^2 * pitch."""
    return float(np.vdot(f.amp, f.amp).real * f.grid.pitch)


def resample(f: ComplexField, target: Grid1D) -> ComplexField:
    """
    Linear interpolation of the real and imaginary parts onto ``target``.
    Target samples outside the source extent are zero.
    """
    if target.matches(f.grid):
        return ComplexField(target, f.amp)
    src = f.grid
    if target.hi < src.lo or target.lo > src.hi:
        raise ConfigurationError(
            f"target grid [{target.lo:.6g}, {target.hi:.6g}] m does not overlap "
            f"source grid [{src.lo:.6g}, {src.hi:.6g}] m"
        )
    xs = src.coordinates
    xt = target.coordinates
    re = np.interp(xt, xs, f.amp.real, left=0.0, right=0.0)
    im = np.interp(xt, xs, f.amp.imag, left=0.0, right=0.0)
    return ComplexField(target, re + 1j * im)


def interpolate_real(x_src: np.ndarray, values: np.ndarray, x_dst: np.ndarray) -> np.ndarray:
    """Linear interpolation of a real profile; zero outside the source range."""
    return np.interp(x_dst, x_src, values, left=0.0, right=0.0)
