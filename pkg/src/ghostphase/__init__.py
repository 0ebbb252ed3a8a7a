"""
ghostphase: coincidence imaging of pure phase objects

Simulates two-photon (ghost) imaging with entangled photon pairs from
down-conversion: the signal photon meets a reflective phase object and is
collected by a fixed detector, while the scanned reference photon never
touches the object. The coincidence scan reveals the object's phase.
"""

__version__ = "0.2.0"

from .config import ScenarioConfig, load_config, load_preset
from .core import RunReport, ScenarioRunner, run_scenario
from .engine import (
    CoincidenceMap,
    ScanResult,
    TwoArmSystem,
    coincidence_amplitude,
    envelope_correct,
    klyshko_image,
    scan_coincidence,
    singles_rate,
)
from .errors import ConfigurationError, DataError, GhostPhaseError, OutputError, PreconditionError
from .grid import ComplexField, Grid1D, Wavelength, make_grid
from .report import emit_csv, emit_g2

__all__ = [
    "ScenarioConfig",
    "load_config",
    "load_preset",
    "RunReport",
    "ScenarioRunner",
    "run_scenario",
    "CoincidenceMap",
    "ScanResult",
    "TwoArmSystem",
    "coincidence_amplitude",
    "envelope_correct",
    "klyshko_image",
    "scan_coincidence",
    "singles_rate",
    "ConfigurationError",
    "DataError",
    "GhostPhaseError",
    "OutputError",
    "PreconditionError",
    "ComplexField",
    "Grid1D",
    "Wavelength",
    "make_grid",
    "emit_csv",
    "emit_g2",
]
