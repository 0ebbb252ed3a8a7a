"""Tests for the two-photon state builders."""

import math

import numpy as np
import pytest

from ghostphase.errors import ConfigurationError, PreconditionError
from ghostphase.grid import Wavelength, make_grid
from ghostphase.source import (
    FULL,
    BiphotonState,
    SourceSpec,
    build_full_state,
    build_thin_crystal_state,
    check_state_edges,
    correlation_width,
    longitudinal_mismatch,
    phase_matching,
)

PUMP = Wavelength(406e-9)


def test_mismatch_formula():
    k = PUMP.k
    assert longitudinal_mismatch(3e4, 3e4, k) == 0.0
    assert longitudinal_mismatch(2e4, -2e4, k) == pytest.approx(2 * (2e4) ** 2 / k)
    assert longitudinal_mismatch(1e4, 0.0, k) == pytest.approx(3.231, rel=1e-3)


def test_phase_matching_values():
    spec = SourceSpec(PUMP, 1.5e-3)
    assert phase_matching(5e3, 5e3, spec) == 1 + 0j
    q_zero = math.sqrt(4 * math.pi * PUMP.k / spec.crystal_length)
    assert abs(phase_matching(q_zero, 0.0, spec)) < 1e-12
    thin = SourceSpec(PUMP, 0.0)
    assert phase_matching(4e4, -4e4, thin) == 1 + 0j


def test_phase_matching_is_symmetric():
    spec = SourceSpec(PUMP, 1.5e-3)
    q = np.linspace(-3e5, 3e5, 41)
    m = phase_matching(q[:, None], q[None, :], spec)
    np.testing.assert_array_equal(m, m.T)


def test_thin_crystal_state_full_aperture():
    grid = make_grid(2048, 4e-6)
    state = build_thin_crystal_state(SourceSpec(PUMP, 1.5e-3), grid)
    assert state.is_diagonal
    np.testing.assert_allclose(state.values, 1 / (grid.pitch * math.sqrt(grid.n)), rtol=1e-14)
    assert state.norm() == pytest.approx(1.0, abs=1e-10)


def test_thin_crystal_state_aperture():
    grid = make_grid(257, 10e-6)
    state = build_thin_crystal_state(SourceSpec(PUMP, 0.0, pump_aperture=0.5e-3), grid)
    assert np.count_nonzero(state.values) == 51
    phi = state.phi
    assert not (phi - np.diag(np.diagonal(phi))).any()
    assert state.norm() == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ConfigurationError):
        build_thin_crystal_state(SourceSpec(PUMP, 0.0, pump_aperture=1.0), grid)


def full_state(length, waist=0.3e-3, n=513, pitch=4e-6):
    spec = SourceSpec(PUMP, length, "gaussian", waist)
    return build_full_state(spec, make_grid(n, pitch))


def test_full_state_normalized_and_symmetric():
    state = full_state(1.5e-3)
    assert state.norm() == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(state.values, state.values.T, rtol=0, atol=1e-10 * np.abs(state.values).max())


def test_full_state_marginal_follows_pump():
    waist = 0.3e-3
    state = full_state(1.5e-3, waist)
    x = state.grid.coordinates
    marginal = state.marginal()
    marginal = marginal / marginal[state.grid.index_of(0.0)]
    pump = np.exp(-2 * x ** 2 / waist ** 2)
    inside = np.abs(x) <= waist
    np.testing.assert_allclose(marginal[inside], pump[inside], rtol=0.05)


def test_correlation_width_grows_with_crystal_length():
    widths = [correlation_width(full_state(l, waist=0.2e-3)) for l in (0.5e-3, 1.5e-3, 4.5e-3)]
    assert widths[0] <= widths[1] <= widths[2]
    assert correlation_width(build_thin_crystal_state(SourceSpec(PUMP, 0.0), make_grid(65, 1e-5))) == 0.0


def test_full_state_preconditions():
    with pytest.raises(PreconditionError):
        full_state(1.5e-3, n=513, pitch=20e-6)
    with pytest.raises(PreconditionError):
        full_state(1.5e-3, waist=0.5e-3)
    with pytest.raises(ConfigurationError):
        build_full_state(SourceSpec(PUMP, 1.5e-3), make_grid(65, 4e-6))
    with pytest.raises(ConfigurationError):
        SourceSpec(PUMP, 1.5e-3, "gaussian", None)


def gaussian_pair(grid, sigma):
    x = grid.coordinates
    return BiphotonState(grid, np.exp(-(x[:, None] ** 2 + x[None, :] ** 2) / (2 * sigma ** 2)) + 0j, FULL)


def test_state_edge_check(capsys):
    grid = make_grid(65, 1e-5)
    wide = gaussian_pair(grid, 2e-4)
    assert wide.edge_fraction() == pytest.approx(math.exp(-((3.2e-4 / 2e-4) ** 2)), rel=1e-9)
    check_state_edges(wide)
    assert "edge density" in capsys.readouterr().err
    check_state_edges(gaussian_pair(grid, 2e-5))
    assert capsys.readouterr().err == ""


def test_plane_wave_state_fills_its_grid():
    state = build_thin_crystal_state(SourceSpec(PUMP, 0.0), make_grid(65, 1e-5))
    assert state.edge_fraction() == pytest.approx(1.0)
