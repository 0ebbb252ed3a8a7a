"""Tests for coincidence maps, scans, singles, envelopes and the point-source picture."""

from dataclasses import replace

import numpy as np
import pytest

from ghostphase.config import ObjectSpec
from ghostphase.core import ScenarioRunner
from ghostphase.engine import (
    ScanResult,
    TwoArmSystem,
    coincidence_amplitude,
    collection_factor,
    envelope_correct,
    klyshko_image,
    local_maxima,
    profile_metrics,
    scan_coincidence,
    singles_rate,
    window_average,
)
from ghostphase.errors import ConfigurationError, DataError
from ghostphase.grid import Wavelength, make_grid
from ghostphase.optics import PhaseObject, SlitWindow, build_phase_object
from ghostphase.propagation import (
    FresnelSpec,
    TransferKernel,
    compose,
    fresnel_kernel,
    identity_kernel,
    object_kernel,
)
from ghostphase.source import DIAGONAL, BiphotonState, SourceSpec, build_full_state, build_thin_crystal_state

PUMP = Wavelength(406e-9)


def thin_state(grid):
    return build_thin_crystal_state(SourceSpec(PUMP, 0.0), grid)


def maps_for(cfg, kinds):
    out = {}
    for kind in kinds:
        runner = ScenarioRunner(replace(cfg, object=ObjectSpec(kind)), workers=2)
        out[kind] = runner.coincidence_map()
    return out


@pytest.fixture
def small_maps(small_config):
    return maps_for(small_config, ("flat", "phase-slit", "double-phase-slit"))


def rel_max(a, b):
    return np.abs(a - b).max() / np.abs(b).max()


def test_identity_arms_give_diagonal_g2():
    grid = make_grid(65, 1e-5)
    sys = TwoArmSystem(identity_kernel(grid), identity_kernel(grid))
    m = coincidence_amplitude(thin_state(grid), sys)
    g2 = m.g2
    assert not (g2 - np.diag(np.diagonal(g2))).any()
    assert np.all(np.diagonal(g2) > 0)


def test_grid_mismatch_is_rejected():
    a = identity_kernel(make_grid(65, 1e-5))
    b = identity_kernel(make_grid(65, 2e-5))
    with pytest.raises(ConfigurationError):
        TwoArmSystem(a, b)
    with pytest.raises(ConfigurationError):
        coincidence_amplitude(thin_state(make_grid(65, 2e-5)), TwoArmSystem(a, a))


def test_results_do_not_depend_on_worker_count(small_slit_config):
    runner = ScenarioRunner(small_slit_config)
    sys = runner.build_system()
    state = thin_state(runner.grids.crystal)
    one = coincidence_amplitude(state, sys, workers=1)
    four = coincidence_amplitude(state, sys, workers=4)
    assert np.array_equal(one.amplitude, four.amplitude)


def test_klyshko_image_matches_g2_rows(small_slit_config):
    runner = ScenarioRunner(small_slit_config)
    sys = runner.build_system()
    state = thin_state(runner.grids.crystal)
    m = coincidence_amplitude(state, sys)
    rng = np.random.default_rng(11)
    for i in rng.choice(m.grid1.n, size=10, replace=False):
        image = klyshko_image(state, sys, m.grid1.coordinate(i))
        row = m.g2[i]
        np.testing.assert_allclose(image.intensity, row, rtol=1e-10, atol=1e-10 * row.max())


def test_klyshko_image_is_single_path_propagation(small_config):
    """Flat object: the D1 point source, object and crystal act as one coherent path."""
    runner = ScenarioRunner(small_config)
    g = runner.grids
    lam = small_config.wavelength
    sys = runner.build_system()
    state = thin_state(g.crystal)
    image = klyshko_image(state, sys, 0.0)

    obj = build_phase_object(small_config.mirror_spec(), g.object)
    point_to_object = fresnel_kernel(FresnelSpec(small_config.d_b, lam), g.d1, g.object)
    at_object = point_to_object.h[:, g.d1.index_of(0.0)] * obj.reflectance
    crystal_mirror = TransferKernel(g.crystal, g.crystal, np.diag(state.values) / g.crystal.pitch, True)
    path = compose(
        fresnel_kernel(FresnelSpec(small_config.d_2, lam), g.crystal, g.d2),
        compose(crystal_mirror, fresnel_kernel(FresnelSpec(small_config.d_a, lam), g.object, g.crystal)),
    )
    expected = path.h @ at_object * g.object.pitch
    np.testing.assert_allclose(image.amp, expected, rtol=0, atol=1e-10 * np.abs(expected).max())


def test_klyshko_needs_diagonal_state_and_grid_point():
    grid = make_grid(65, 4e-6)
    sys = TwoArmSystem(identity_kernel(grid), identity_kernel(grid))
    full = build_full_state(SourceSpec(PUMP, 1e-4, "gaussian", 2e-5), grid)
    with pytest.raises(ConfigurationError):
        klyshko_image(full, sys, 0.0)
    with pytest.raises(ConfigurationError):
        klyshko_image(thin_state(grid), sys, 1.0)


def test_zero_state_gives_zero_rates():
    grid = make_grid(65, 1e-5)
    zero = BiphotonState(grid, np.zeros(65, dtype=complex), DIAGONAL)
    sys = TwoArmSystem(identity_kernel(grid), identity_kernel(grid))
    m = coincidence_amplitude(zero, sys)
    assert not singles_rate(m, "d1").any()
    assert not singles_rate(m, "d2").any()
    assert not klyshko_image(zero, sys, 0.0).amp.any()


def test_singles_are_object_blind(small_maps):
    flat, slit, double = small_maps["flat"], small_maps["phase-slit"], small_maps["double-phase-slit"]
    for other in (slit, double):
        assert rel_max(singles_rate(other, "d2"), singles_rate(flat, "d2")) <= 1e-6
        assert rel_max(singles_rate(other, "d1"), singles_rate(flat, "d1")) <= 1e-6
        assert other.total() == pytest.approx(flat.total(), rel=1e-3)


@pytest.mark.parametrize("pattern", ["flat", "slit", "random"])
def test_arm1_singles_are_flat_for_unimodular_objects(small_config, pattern):
    runner = ScenarioRunner(small_config, workers=2)
    g, lam = runner.grids, small_config.wavelength
    x = g.object.coordinates
    theta = {
        "flat": np.zeros(g.object.n),
        "slit": np.where(np.abs(x) < 150e-6, np.pi, 0.0),
        "random": np.random.default_rng(5).uniform(0, 2 * np.pi, g.object.n),
    }[pattern]
    obj = PhaseObject(g.object, theta, np.ones(g.object.n, dtype=bool))
    to_object = fresnel_kernel(FresnelSpec(small_config.d_a, lam), g.crystal, g.object)
    to_d1 = fresnel_kernel(FresnelSpec(small_config.d_b, lam), g.object, g.d1)
    h2 = fresnel_kernel(FresnelSpec(small_config.d_2, lam), g.crystal, g.d2)
    system = TwoArmSystem(compose(to_d1, compose(object_kernel(obj), to_object)), h2)
    s1 = singles_rate(coincidence_amplitude(thin_state(g.crystal), system), "d1")
    central = s1[np.abs(g.d1.coordinates) <= g.d1.extent / 4]
    assert np.ptp(central) <= 1e-3 * central.max()


def test_even_object_gives_even_scan(small_maps):
    for kind in ("flat", "phase-slit", "double-phase-slit"):
        m = small_maps[kind]
        scan = scan_coincidence(m, SlitWindow(0.0, 1.4e-3), SlitWindow(0.0, 1.4e-3))
        c = scan.coincidence
        np.testing.assert_allclose(c, c[::-1], rtol=0, atol=1e-9 * c.max())


def test_phase_slit_scan_has_central_dip(small_maps):
    m = small_maps["phase-slit"]
    scan = scan_coincidence(m, SlitWindow(0.0, 1.4e-3), SlitWindow(0.0, 1.4e-3))
    metrics = profile_metrics(scan.x2, scan.coincidence)
    assert metrics.visibility > 0.3
    c = scan.coincidence
    ic = m.grid2.index_of(0.0)
    assert c[ic] < c[ic - 1] and c[ic] < c[ic + 1]
    peaks = local_maxima(c)
    assert len(peaks) >= 2
    assert np.all(np.abs(scan.x2[peaks]) > 1e-3)


def test_one_pitch_p2_leaves_scan_unconvolved(small_maps):
    m = small_maps["phase-slit"]
    narrow = scan_coincidence(m, SlitWindow(0.0, 1.4e-3), SlitWindow(0.0, m.grid2.pitch))
    mask = np.abs(m.grid1.coordinates) <= 0.7e-3 + 1e-9 * m.grid1.pitch
    raw = np.sum(m.g2[mask], axis=0) * m.grid1.pitch
    np.testing.assert_array_equal(narrow.coincidence, raw)
    np.testing.assert_array_equal(narrow.corrected, narrow.coincidence)


def test_window_average():
    g = make_grid(11, 1.0)
    v = np.arange(11, dtype=float)
    np.testing.assert_array_equal(window_average(v, g, 1.0), v)
    avg = window_average(v, g, 3.0)
    assert avg[5] == pytest.approx(5.0)
    assert avg[0] == pytest.approx(1.0 / 3)


def test_scan_interpolates_onto_scan_points(small_maps):
    m = small_maps["flat"]
    x2 = np.linspace(-8e-3, 8e-3, 161)
    scan = scan_coincidence(m, SlitWindow(0.0, 1.4e-3), SlitWindow(0.0, 1.4e-3), x2)
    assert len(scan.x2) == len(scan.coincidence) == len(scan.singles_d2) == 161
    on_grid = scan_coincidence(m, SlitWindow(0.0, 1.4e-3), SlitWindow(0.0, 1.4e-3))
    assert scan.coincidence[80] == pytest.approx(on_grid.coincidence[m.grid2.index_of(0.0)], rel=1e-12)


def test_empty_window_is_rejected(small_maps):
    m = small_maps["flat"]
    with pytest.raises(ConfigurationError):
        scan_coincidence(m, SlitWindow(1.0, 1e-3), SlitWindow(0.0, 1e-3))


def test_collection_factor(small_maps):
    flat, slit = small_maps["flat"], small_maps["phase-slit"]
    everything = SlitWindow(0.0, 10 * flat.grid1.extent)
    assert collection_factor(flat, everything) == pytest.approx(1.0)
    p1 = SlitWindow(0.0, 1.4e-3)
    assert 0 < collection_factor(flat, p1) < 1
    assert collection_factor(slit, p1) == pytest.approx(collection_factor(flat, p1), rel=1e-6)


def test_envelope_correction():
    x = np.linspace(-1, 1, 21)
    c = 1 + x ** 2
    scan = ScanResult(x, c, np.ones(21), c.copy())
    flat = envelope_correct(scan, np.full(21, 3.0))
    np.testing.assert_allclose(flat.corrected, c)
    bump = envelope_correct(scan, np.exp(-(x ** 2)))
    assert profile_metrics(x, bump.corrected).rms_width < profile_metrics(x, c).rms_width
    with pytest.raises(DataError):
        envelope_correct(scan, np.ones(20))
    with pytest.raises(DataError):
        envelope_correct(scan, -np.ones(21))
    with pytest.raises(DataError):
        envelope_correct(scan, np.zeros(21))


def test_profile_metrics_on_a_v_shape():
    x = np.linspace(-1, 1, 201)
    m = profile_metrics(x, np.abs(x))
    assert m.peak == pytest.approx(1.0)
    assert m.center_value == pytest.approx(0.0, abs=1e-12)
    assert m.visibility == pytest.approx(1.0)
    assert m.dip_width == pytest.approx(1.0)
    single = profile_metrics(x, 1 - x ** 2)
    assert single.visibility == 0.0
    assert single.dip_width == 0.0
