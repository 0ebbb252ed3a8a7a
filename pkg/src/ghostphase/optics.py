"""
Reflective phase objects (micro-mirror array model), binary apertures and
slit windows.

The reflective aperture is the span of ``n_columns * column_width`` centred on
the grid, split into columns of exactly ``column_width`` with edges at
``-W/2 + j*w``. Named layouts put their lines as strips centred on the axis,
laid over that lattice.
"""

import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from .errors import ConfigurationError
from .grid import GRID_RTOL, ComplexField, Grid1D, Wavelength

# Minimum samples per column for the object to count as resolved
SAMPLES_PER_COLUMN = 8


@dataclass(frozen=True, eq=False)
class PhaseObject:
    """Complex reflectance aperture * exp(i*theta) sampled on ``grid``."""

    grid: Grid1D
    theta: np.ndarray
    aperture: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        aperture = np.array(self.aperture, dtype=bool)
        if theta.shape != (self.grid.n,) or aperture.shape != (self.grid.n,):
            raise ConfigurationError("phase object arrays must match the grid size")
        theta.flags.writeable = False
        aperture.flags.writeable = False
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "aperture", aperture)

    @property
    def reflectance(self) -> np.ndarray:
        return np.where(self.aperture, np.exp(1j * self.theta), 0.0)


@dataclass(frozen=True)
class Strip:
    """A line of mirrors at ``center`` (from the grid centre), pulled by ``depth`` or absorbing."""

    center: float
    width: float
    depth: float = 0.0
    blocked: bool = False

    def __post_init__(self):
        if not (self.width > 0 and math.isfinite(self.width)):
            raise ConfigurationError(f"strip width must be positive, got {self.width!r}", key="object")
        if self.depth < 0 or not math.isfinite(self.depth):
            raise ConfigurationError("strip depth must be finite and >= 0", key="object")


@dataclass(frozen=True)
class MirrorArraySpec:
    """
    One row of the micro-mirror array.

    ``pull_depth`` holds one depth per column (meters); a column pulled by d
    adds a round-trip phase 2*pi*(2d/lambda). ``blocked`` marks absorbing
    columns (binary amplitude objects); it defaults to all reflective.
    ``strips`` override the columns they cover, inside the aperture only.
    """

    n_columns: int
    column_width: float
    pull_depth: Tuple[float, ...]
    lam: Wavelength
    blocked: Tuple[bool, ...] = field(default=())
    strips: Tuple[Strip, ...] = field(default=())

    def __post_init__(self):
        if isinstance(self.n_columns, bool) or int(self.n_columns) != self.n_columns or self.n_columns < 1:
            raise ConfigurationError(f"n_columns must be >= 1, got {self.n_columns!r}", key="n_columns")
        if not (self.column_width > 0 and math.isfinite(self.column_width)):
            raise ConfigurationError(
                f"column_width must be positive, got {self.column_width!r}", key="column_width"
            )
        depths = tuple(float(d) for d in self.pull_depth)
        if len(depths) != self.n_columns:
            raise ConfigurationError(
                f"expected {self.n_columns} pull depths, got {len(depths)}", key="object"
            )
        if any(d < 0 or not math.isfinite(d) for d in depths):
            raise ConfigurationError("pull depths must be finite and >= 0", key="object")
        blocked = tuple(bool(b) for b in self.blocked) or (False,) * self.n_columns
        if len(blocked) != self.n_columns:
            raise ConfigurationError(
                f"expected {self.n_columns} blocked flags, got {len(blocked)}", key="object"
            )
        object.__setattr__(self, "n_columns", int(self.n_columns))
        object.__setattr__(self, "pull_depth", depths)
        object.__setattr__(self, "blocked", blocked)
        object.__setattr__(self, "strips", tuple(self.strips))

    @property
    def width(self) -> float:
        return self.n_columns * self.column_width

    def column_phases(self) -> np.ndarray:
        return 4 * math.pi * np.asarray(self.pull_depth) / self.lam.lam


def depth_for_phase(theta: float, lam: Wavelength) -> float:
    """Pull depth that produces round-trip phase ``theta``."""
    return theta * lam.lam / (4 * math.pi)


@dataclass(frozen=True)
class SlitWindow:
    """Integration or scan aperture of a detector unit."""

    center: float
    width: float

    def __post_init__(self):
        if not (self.width > 0 and math.isfinite(self.width)):
            raise ConfigurationError(f"window width must be positive, got {self.width!r}")


def column_index(spec: MirrorArraySpec, grid: Grid1D) -> np.ndarray:
    """Column number for every grid sample; the closing edge of the span belongs to the last column."""
    rel = (grid.coordinates - grid.center + spec.width / 2) / spec.column_width
    j = np.floor(rel + GRID_RTOL).astype(int)
    return np.clip(j, 0, spec.n_columns - 1)


def build_phase_object(spec: MirrorArraySpec, grid: Grid1D) -> PhaseObject:
    if grid.extent < spec.width * (1 - GRID_RTOL):
        raise ConfigurationError(
            f"object ({spec.width:.6g} m) is larger than the grid extent ({grid.extent:.6g} m)",
            key="grid",
        )
    if grid.pitch > spec.column_width / SAMPLES_PER_COLUMN * (1 + GRID_RTOL):
        raise ConfigurationError(
            f"grid pitch {grid.pitch:.6g} m does not resolve {spec.column_width:.6g} m columns "
            f"(need pitch <= column_width/{SAMPLES_PER_COLUMN})",
            key="grid",
        )
    rel = grid.coordinates - grid.center
    inside = np.abs(rel) <= spec.width / 2 + GRID_RTOL * grid.pitch
    cols = column_index(spec, grid)
    reflective = ~np.asarray(spec.blocked, dtype=bool)
    theta = np.where(inside, spec.column_phases()[cols], 0.0)
    aperture = inside & reflective[cols]
    for strip in spec.strips:
        hit = inside & (np.abs(rel - strip.center) <= strip.width / 2 + GRID_RTOL * grid.pitch)
        theta[hit] = 4 * math.pi * strip.depth / spec.lam.lam
        aperture[hit] = not strip.blocked
    return PhaseObject(grid, theta, aperture)


def flat_object(grid: Grid1D) -> PhaseObject:
    """Full-aperture object with zero phase everywhere."""
    return PhaseObject(grid, np.zeros(grid.n), np.ones(grid.n, dtype=bool))


def apply_object(f: ComplexField, obj: PhaseObject) -> ComplexField:
    if not f.grid.matches(obj.grid):
        raise ConfigurationError("field and phase object are sampled on different grids")
    return ComplexField(f.grid, f.amp * obj.reflectance)


def window_mask(grid: Grid1D, w: SlitWindow) -> np.ndarray:
    mask = np.abs(grid.coordinates - w.center) <= w.width / 2 + GRID_RTOL * grid.pitch
    if not mask.any():
        raise ConfigurationError(
            f"window centred at {w.center:.6g} m (width {w.width:.6g} m) selects no samples "
            f"of the grid [{grid.lo:.6g}, {grid.hi:.6g}] m"
        )
    return mask


def column_layout(
    kind: str, n_columns: int, column_width: float, depth_pi: float
) -> Tuple[Tuple[bool, ...], Tuple[Strip, ...]]:
    """
    Lattice blocked flags and centred strips for the named object layouts.
    Slits are one column wide on the axis; the double layouts put one either
    side of a zero-phase line, centred at +-column_width.
    """
    w = column_width
    blocked = [False] * n_columns
    if kind == "flat":
        strips = ()
    elif kind == "phase-slit":
        strips = (Strip(0.0, w, depth_pi),)
    elif kind == "double-phase-slit":
        _need_neighbours(kind, n_columns)
        strips = (Strip(-w, w, depth_pi), Strip(w, w, depth_pi))
    elif kind == "amplitude-slit":
        blocked = [True] * n_columns
        strips = (Strip(0.0, w),)
    elif kind == "double-strip":
        _need_neighbours(kind, n_columns)
        strips = (Strip(-w, w, blocked=True), Strip(w, w, blocked=True))
    else:
        raise ConfigurationError(f"unknown object kind '{kind}'", key="object")
    return tuple(blocked), strips


def _need_neighbours(kind: str, n_columns: int) -> None:
    if n_columns < 3:
        raise ConfigurationError(f"'{kind}' needs at least 3 columns, got {n_columns}", key="n_columns")


def selected_width(grid: Grid1D, mask: Sequence[bool]) -> float:
    return float(np.count_nonzero(mask)) * grid.pitch
