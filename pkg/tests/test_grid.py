"""Tests for grids, fields and resampling."""

import math

import numpy as np
import pytest

from ghostphase.errors import ConfigurationError
from ghostphase.grid import ComplexField, Grid1D, Wavelength, field_power, make_grid, resample


def gaussian_field(grid, sigma):
    return ComplexField(grid, np.exp(-grid.coordinates ** 2 / (2 * sigma ** 2)))


def test_make_grid_rejects_bad_values():
    with pytest.raises(ConfigurationError):
        make_grid(1, 1e-6)
    with pytest.raises(ConfigurationError):
        make_grid(16, 0.0)
    with pytest.raises(ConfigurationError):
        make_grid(16, -4e-6)


def test_coordinates_are_centred():
    g = make_grid(5, 2.0, center=1.0)
    assert list(g.coordinates) == [-3.0, -1.0, 1.0, 3.0, 5.0]
    assert g.extent == 10.0
    assert make_grid(2049, 20e-6).coordinates[1024] == 0.0


def test_wavenumber():
    lam = Wavelength(812e-9)
    assert lam.k * lam.lam == pytest.approx(2 * math.pi, rel=1e-15)
    with pytest.raises(ConfigurationError):
        Wavelength(0.0)


def test_dual_grid_pitch():
    g = make_grid(2049, 20e-6)
    d = g.dual(1.17, Wavelength(812e-9))
    assert d.n == g.n
    assert d.pitch == pytest.approx(812e-9 * 1.17 / (2049 * 20e-6))
    assert g.matches(d.dual(1.17, Wavelength(812e-9)))


def test_index_of():
    g = make_grid(11, 1.0)
    assert g.index_of(0.0) == 5
    assert g.index_of(2.2) == 7
    with pytest.raises(ConfigurationError):
        g.index_of(9.0)


def test_field_size_must_match_grid():
    with pytest.raises(ConfigurationError):
        ComplexField(make_grid(8, 1.0), np.zeros(7))


def test_resample_onto_same_grid_is_identity():
    g = make_grid(101, 1e-5)
    f = ComplexField(g, np.exp(1j * g.coordinates * 1e4))
    out = resample(f, make_grid(101, 1e-5))
    assert np.array_equal(out.amp, f.amp)


def test_resample_preserves_gaussian_power():
    sigma = 0.5e-3
    g = make_grid(6001, 1e-6)
    fine = make_grid(2 * g.n - 1, g.pitch / 2)
    out = resample(gaussian_field(g, sigma), fine)
    assert field_power(out) == pytest.approx(math.sqrt(math.pi) * sigma, rel=1e-6)


def test_resample_is_zero_outside_source():
    src = make_grid(11, 1.0)
    f = ComplexField(src, np.ones(11) * (1 + 1j))
    wide = make_grid(31, 1.0)
    out = resample(f, wide)
    assert np.all(out.amp[:10] == 0)
    assert np.all(out.amp[21:] == 0)
    assert np.allclose(out.amp[10:21], 1 + 1j)


def test_resample_without_overlap_fails():
    f = ComplexField(make_grid(11, 1.0), np.ones(11))
    with pytest.raises(ConfigurationError):
        resample(f, make_grid(11, 1.0, center=100.0))


def test_edge_fraction():
    g = make_grid(201, 1e-5)
    assert gaussian_field(g, 1e-4).edge_fraction() < 1e-6
    assert ComplexField(g, np.ones(201)).edge_fraction() == 1.0
    assert ComplexField(g, np.zeros(201)).edge_fraction() == 0.0
