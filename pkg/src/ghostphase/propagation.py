"""
Paraxial Fresnel propagation between sampled planes.

Two realizations of the same operator are provided: a dense kernel matrix
evaluated by direct quadrature (the reference path) and a single-transform
chirp/DFT/chirp evaluation whose output grid is the Fresnel dual of the
input grid. On dual grids both give the same numbers to round-off.

Kernel convention:
    h_d(x_out, x_in) = exp(ikd) / sqrt(i*lambda*d) * exp(ik (x_out - x_in)^2 / 2d)
with sqrt(i) = exp(i*pi/4). Output samples are out_m = sum_i h[m, i] amp_i pitch_in.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import fft as sp_fft

from .errors import ConfigurationError, PreconditionError
from .grid import EDGE_TOLERANCE, GRID_RTOL, ComplexField, Grid1D, Wavelength, resample
from .optics import PhaseObject
from .utils import log, map_row_blocks, warn

# Largest grid for which "auto" builds kernels by direct quadrature
DIRECT_MAX_N = 4096

METHODS = ("auto", "direct", "fast")


@dataclass(frozen=True)
class FresnelSpec:
    distance: float
    lam: Wavelength

    def __post_init__(self):
        if not (self.distance > 0 and math.isfinite(self.distance)):
            raise ConfigurationError(f"propagation distance must be positive, got {self.distance!r}")


@dataclass(frozen=True, eq=False)
class TransferKernel:
    """
    Linear map between two planes: h has shape (grid_out.n, grid_in.n) and
    units of 1/m. ``diagonal`` marks kernels that only scale samples
    (objects, identity) so composition can skip the dense product.
    """

    grid_in: Grid1D
    grid_out: Grid1D
    h: np.ndarray
    diagonal: bool = False

    def __post_init__(self):
        if self.h.shape != (self.grid_out.n, self.grid_in.n):
            raise ConfigurationError(
                f"kernel shape {self.h.shape} does not match grids "
                f"({self.grid_out.n}, {self.grid_in.n})"
            )


def check_sampling(spec: FresnelSpec, grid_in: Grid1D, grid_out: Grid1D) -> None:
    """Each side must sample the kernel chirp: pitch <= lambda*d / extent_other."""
    lam_d = spec.lam.lam * spec.distance
    for side, grid, other in (("input", grid_in, grid_out), ("output", grid_out, grid_in)):
        limit = lam_d / other.extent
        if grid.pitch > limit * (1 + GRID_RTOL):
            raise PreconditionError(
                f"{side} pitch {grid.pitch:.6g} m aliases the Fresnel kernel over "
                f"{spec.distance:.6g} m (limit {limit:.6g} m for a {other.extent:.6g} m {side} partner)",
                key="grid",
            )


def _prefactor(spec: FresnelSpec, with_phase: bool) -> complex:
    lam_d = spec.lam.lam * spec.distance
    amp = cmath.exp(-1j * math.pi / 4) / math.sqrt(lam_d)
    if with_phase:
        amp *= cmath.exp(1j * spec.lam.k * spec.distance)
    return amp


def fresnel_kernel(
    spec: FresnelSpec,
    grid_in: Grid1D,
    grid_out: Grid1D,
    prefactor: bool = True,
    workers: Optional[int] = None,
) -> TransferKernel:
    """Dense Fresnel kernel by direct evaluation of the impulse response."""
    check_sampling(spec, grid_in, grid_out)
    k = spec.lam.k
    c = _prefactor(spec, prefactor)
    x_in = grid_in.coordinates
    x_out = grid_out.coordinates
    h = np.empty((grid_out.n, grid_in.n), dtype=np.complex128)

    def fill(start: int, stop: int) -> None:
        dx = x_out[start:stop, None] - x_in[None, :]
        h[start:stop] = c * np.exp(1j * k * dx * dx / (2 * spec.distance))

    map_row_blocks(grid_out.n, fill, workers)
    return TransferKernel(grid_in, grid_out, h)


def _chirps(spec: FresnelSpec, grid_in: Grid1D, center_out: float, prefactor: bool):
    """
    Pre- and post-multipliers that turn the Fresnel sum on the dual grid into
    a plain forward DFT over the sample index.
    """
    n = grid_in.n
    out = grid_in.dual(spec.distance, spec.lam, center_out)
    k, d = spec.lam.k, spec.distance
    half = grid_in.half_index
    idx = np.arange(n)
    x_in = grid_in.coordinates
    x_out = out.coordinates
    c_in, c_out = grid_in.center, out.center
    # exp(-ik x_out x_in / d) split into index-only factors around exp(-2 pi i m i / n)
    pre = np.exp(
        1j * k * x_in ** 2 / (2 * d)
        - 1j * k * c_out * (idx - half) * grid_in.pitch / d
        + 2j * math.pi * half * idx / n
    )
    post = np.exp(
        1j * k * x_out ** 2 / (2 * d)
        - 1j * k * (idx - half) * out.pitch * c_in / d
        + 2j * math.pi * half * idx / n
        - 2j * math.pi * half ** 2 / n
        - 1j * k * c_out * c_in / d
    )
    post = post * _prefactor(spec, prefactor) * grid_in.pitch
    return out, pre, post


def apply_fresnel_fast(
    spec: FresnelSpec,
    f: ComplexField,
    target: Optional[Grid1D] = None,
    prefactor: bool = True,
) -> ComplexField:
    """
    Fresnel propagation by one FFT. The result lives on the dual grid
    (pitch lambda*d/(n*pitch_in)) centred on ``target.center``; it is
    resampled onto ``target`` when that grid differs.
    """
    center = target.center if target is not None else 0.0
    out_grid, pre, post = _chirps(spec, f.grid, center, prefactor)
    check_sampling(spec, f.grid, out_grid)
    _check_edges(f)
    out = ComplexField(out_grid, post * sp_fft.fft(f.amp * pre))
    if target is not None and not target.matches(out_grid):
        return resample(out, target)
    return out


def fresnel_kernel_fast(
    spec: FresnelSpec, grid_in: Grid1D, center_out: float = 0.0, prefactor: bool = True
) -> TransferKernel:
    """Kernel matrix of the single-transform path, on the dual output grid."""
    out_grid, pre, post = _chirps(spec, grid_in, center_out, prefactor)
    check_sampling(spec, grid_in, out_grid)
    # column i is the transform of a unit sample at i, scaled so out = h @ amp * pitch_in
    dft = sp_fft.fft(np.diag(pre), axis=0)
    h = post[:, None] * dft / grid_in.pitch
    return TransferKernel(grid_in, out_grid, h)


def build_fresnel(
    spec: FresnelSpec,
    grid_in: Grid1D,
    grid_out: Grid1D,
    method: str = "auto",
    prefactor: bool = True,
    workers: Optional[int] = None,
) -> TransferKernel:
    """
    Kernel between two planes by the requested method. The fast method needs
    ``grid_out`` to be the dual of ``grid_in``; otherwise it falls back to
    direct quadrature.
    """
    if method not in METHODS:
        raise ConfigurationError(f"unknown method '{method}' (choose from {', '.join(METHODS)})", key="method")
    use_fast = method == "fast" or (method == "auto" and grid_in.n > DIRECT_MAX_N)
    if use_fast:
        native = grid_in.dual(spec.distance, spec.lam, grid_out.center)
        if native.matches(grid_out):
            return fresnel_kernel_fast(spec, grid_in, grid_out.center, prefactor)
        log("fast Fresnel path needs a dual output grid; using direct quadrature")
    return fresnel_kernel(spec, grid_in, grid_out, prefactor, workers)


def _check_edges(f: ComplexField) -> None:
    frac = f.edge_fraction()
    if frac > EDGE_TOLERANCE:
        warn(f"field edge intensity is {frac:.3g} of peak; grid may be too small")


def apply_kernel(k: TransferKernel, f: ComplexField) -> ComplexField:
    if not f.grid.matches(k.grid_in):
        raise ConfigurationError("field grid does not match the kernel input grid")
    if k.diagonal:
        return ComplexField(k.grid_out, np.diagonal(k.h) * f.amp * k.grid_in.pitch)
    _check_edges(f)
    return ComplexField(k.grid_out, (k.h @ f.amp) * k.grid_in.pitch)


def compose(k2: TransferKernel, k1: TransferKernel) -> TransferKernel:
    """Kernel of ``k1`` followed by ``k2``: h = h2 @ h1 * pitch_mid."""
    if not k1.grid_out.matches(k2.grid_in):
        raise ConfigurationError("cannot compose kernels: intermediate planes differ")
    pitch = k1.grid_out.pitch
    if k1.diagonal and k2.diagonal:
        h = np.diag(np.diagonal(k2.h) * np.diagonal(k1.h) * pitch)
    elif k1.diagonal:
        h = k2.h * (np.diagonal(k1.h) * pitch)[None, :]
    elif k2.diagonal:
        h = (np.diagonal(k2.h) * pitch)[:, None] * k1.h
    else:
        h = (k2.h @ k1.h) * pitch
    return TransferKernel(k1.grid_in, k2.grid_out, h, k1.diagonal and k2.diagonal)


def identity_kernel(grid: Grid1D) -> TransferKernel:
    return TransferKernel(grid, grid, np.eye(grid.n, dtype=np.complex128) / grid.pitch, True)


def object_kernel(obj: PhaseObject) -> TransferKernel:
    h = np.diag(obj.reflectance.astype(np.complex128)) / obj.grid.pitch
    return TransferKernel(obj.grid, obj.grid, h, True)
