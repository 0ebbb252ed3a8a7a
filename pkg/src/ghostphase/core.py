"""Scenario pipeline: grids, object, kernels, source state, coincidence map, scan and report."""

import time
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
import psutil

from .config import ObjectSpec, ScenarioConfig, with_overrides
from .engine import (
    CoincidenceMap,
    ProfileMetrics,
    ScanResult,
    TwoArmSystem,
    coincidence_amplitude,
    collection_factor,
    envelope_correct,
    profile_metrics,
    scan_coincidence,
    singles_rate,
    window_average,
)
from .errors import ConfigurationError, GhostPhaseError, with_context
from .grid import Grid1D, Wavelength, interpolate_real
from .optics import SlitWindow, build_phase_object
from .propagation import FresnelSpec, build_fresnel, compose, identity_kernel, object_kernel
from .report import load_envelope
from .source import SourceSpec, build_full_state, build_thin_crystal_state, check_state_edges
from .utils import default_workers, format_length, log

NORMALIZE_MODES = ("self", "flat")


@dataclass(frozen=True)
class PlaneGrids:
    """Sample grids of the four planes of the two-arm setup."""

    object: Grid1D
    crystal: Grid1D
    d1: Grid1D
    d2: Grid1D


@dataclass(eq=False)
class RunReport:
    """
    Outcome of one run. Coincidence columns are divided by ``scale`` (the
    normalizing peak); ``pair_peak`` is the raw peak after beam-splitter pair
    loss, in the unnormalized units of the coincidence map. ``collected`` is the
    unnormalized raw scan times the arm-1 collection factor, so peaks compare
    across runs.
    """

    config: ScenarioConfig
    scan: ScanResult
    collected: np.ndarray
    collection_factor: float
    scale: float
    pair_peak: float
    normalize: str
    metrics_raw: ProfileMetrics
    metrics_corrected: ProfileMetrics
    grids: PlaneGrids
    coincidence_map: Optional[CoincidenceMap] = None
    timing: Dict[str, float] = field(default_factory=dict)
    resources: Dict[str, float] = field(default_factory=dict)


def plane_grids(cfg: ScenarioConfig) -> PlaneGrids:
    """
    Object grid from the config; crystal and D1 grids are its Fresnel duals
    over d_a and d_b, and D2 is the dual of the crystal grid over d_2.
    """
    lam = cfg.wavelength
    obj = Grid1D(cfg.grid.n, cfg.grid.object_pitch)
    crystal = obj.dual(cfg.d_a, lam)
    return PlaneGrids(obj, crystal, obj.dual(cfg.d_b, lam), crystal.dual(cfg.d_2, lam))


def scan_points(cfg: ScenarioConfig) -> np.ndarray:
    s = cfg.scan
    count = s.count()
    if count is None:
        raise ConfigurationError(
            f"scan step {s.step!r} does not divide the range {s.start!r} .. {s.stop!r}", key="scan.step"
        )
    return np.linspace(s.start, s.stop, count)


class ScenarioRunner:
    """Runs one scenario end to end; each stage is timed."""

    def __init__(self, cfg: ScenarioConfig, workers: Optional[int] = None):
        self.cfg = cfg
        self.workers = workers or cfg.workers or default_workers()
        self.grids = plane_grids(cfg)
        self.timing: Dict[str, float] = {}

    def _stage(self, name: str, fn, *args):
        t0 = time.perf_counter()
        result = fn(*args)
        self.timing[name] = time.perf_counter() - t0
        return result

    def build_system(self) -> TwoArmSystem:
        cfg, g = self.cfg, self.grids
        lam = cfg.wavelength
        obj = build_phase_object(cfg.mirror_spec(), g.object)
        to_object = build_fresnel(FresnelSpec(cfg.d_a, lam), g.crystal, g.object, cfg.method, workers=self.workers)
        to_d1 = build_fresnel(FresnelSpec(cfg.d_b, lam), g.object, g.d1, cfg.method, workers=self.workers)
        h1 = compose(to_d1, compose(object_kernel(obj), to_object))
        h2 = build_fresnel(FresnelSpec(cfg.d_2, lam), g.crystal, g.d2, cfg.method, workers=self.workers)
        return TwoArmSystem(h1, h2)

    def coincidence_map(self) -> CoincidenceMap:
        system = self._stage("kernels", self.build_system)
        source = SourceSpec(Wavelength(self.cfg.lam_pump), self.cfg.crystal_length)
        state = build_thin_crystal_state(source, self.grids.crystal)
        return self._stage("coincidence", coincidence_amplitude, state, system, self.workers)

    def envelope(self, x2: np.ndarray) -> Optional[np.ndarray]:
        env = self.cfg.envelope
        if env.mode == "none":
            return None
        if env.mode == "file":
            return load_envelope(env.path, x2)
        return self._stage("envelope", full_model_envelope, self.cfg, x2, self.workers)

    def run(self, normalize: str = "self", keep_map: bool = False) -> RunReport:
        if normalize not in NORMALIZE_MODES:
            raise ConfigurationError(f"unknown normalization '{normalize}'", key="normalize")
        cfg = self.cfg
        t0 = time.perf_counter()
        log(
            f"{cfg.name}: n={cfg.grid.n}, object pitch {format_length(cfg.grid.object_pitch)}, "
            f"D2 pitch {format_length(self.grids.d2.pitch)}, {self.workers} workers"
        )
        m = self.coincidence_map()
        p1 = SlitWindow(0.0, cfg.p1_width)
        p2 = SlitWindow(0.0, cfg.p2_width)
        x2 = scan_points(cfg)
        scan = self._stage("scan", scan_coincidence, m, p1, p2, x2)
        envelope = self.envelope(x2)
        if envelope is not None:
            scan = envelope_correct(scan, envelope)
        factor = collection_factor(m, p1)

        raw_coincidence = scan.coincidence
        raw_peak = float(raw_coincidence.max())
        if normalize == "flat":
            scale = reference_peak(cfg, self.workers)
        else:
            scale = raw_peak
        if scale <= 0:
            raise ConfigurationError("coincidence profile is zero everywhere; nothing to normalize")
        singles_top = float(scan.singles_d2.max()) or 1.0
        scan = ScanResult(
            scan.x2,
            scan.coincidence / scale,
            scan.singles_d2 / singles_top,
            scan.corrected / scale,
            scan.envelope,
        )
        self.timing["total"] = time.perf_counter() - t0
        report = RunReport(
            config=cfg,
            scan=scan,
            collected=raw_coincidence * factor,
            collection_factor=factor,
            scale=scale,
            pair_peak=raw_peak * cfg.beam_splitter_efficiency,
            normalize=normalize,
            metrics_raw=profile_metrics(scan.x2, scan.coincidence),
            metrics_corrected=profile_metrics(scan.x2, scan.corrected),
            grids=self.grids,
            coincidence_map=m if keep_map else None,
            timing=dict(self.timing),
            resources=process_resources(),
        )
        log(
            f"{cfg.name}: visibility {report.metrics_raw.visibility:.3f}, "
            f"collection factor {factor:.4f}, {self.timing['total']:.1f}s"
        )
        return report


def full_model_envelope(cfg: ScenarioConfig, x2: np.ndarray, workers: Optional[int] = None) -> np.ndarray:
    """
    Reference-arm singles of the finite-pump, finite-crystal state, seen
    through P2 and interpolated onto the scan points. Arm 1 is taken as
    lossless, so the singles are object independent and arm 1 is the identity.
    """
    env = cfg.envelope
    lam = cfg.wavelength
    grid = Grid1D(env.n, env.pitch)
    spec = SourceSpec(Wavelength(cfg.lam_pump), cfg.crystal_length, "gaussian", env.waist)
    state = build_full_state(spec, grid)
    check_state_edges(state)
    d2 = grid.dual(cfg.d_2, lam)
    h2 = build_fresnel(FresnelSpec(cfg.d_2, lam), grid, d2, cfg.method, workers=workers)
    m = coincidence_amplitude(state, TwoArmSystem(identity_kernel(grid), h2), workers)
    s2 = window_average(singles_rate(m, "d2"), d2, cfg.p2_width)
    return interpolate_real(d2.coordinates, s2, x2)


def reference_peak(cfg: ScenarioConfig, workers: Optional[int] = None) -> float:
    """Raw coincidence peak of the same geometry with a flat object."""
    flat = with_overrides(cfg, object=ObjectSpec("flat"), name=f"{cfg.name} (flat reference)")
    runner = ScenarioRunner(flat, workers)
    m = runner.coincidence_map()
    scan = scan_coincidence(m, SlitWindow(0.0, cfg.p1_width), SlitWindow(0.0, cfg.p2_width), scan_points(cfg))
    return float(scan.coincidence.max())


def process_resources() -> Dict[str, float]:
    proc = psutil.Process()
    cpu = proc.cpu_times()
    return {
        "rss_mb": proc.memory_info().rss / (1024 * 1024),
        "cpu_user_s": cpu.user,
        "cpu_system_s": cpu.system,
    }


def run_scenario(
    cfg: ScenarioConfig,
    normalize: str = "self",
    workers: Optional[int] = None,
    keep_map: bool = False,
) -> RunReport:
    try:
        return ScenarioRunner(cfg, workers).run(normalize, keep_map)
    except GhostPhaseError as e:
        raise with_context(e, f"scenario '{cfg.name}'") from e
