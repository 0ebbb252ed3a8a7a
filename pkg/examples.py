#!/usr/bin/env python3
"""
Example studies with ghostphase.

These use the Python API directly; the same runs are available through
the `ghostphase` command (see README.md).
"""

import math
import os
import sys
from dataclasses import replace

SCRIPT_DIR = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.join(SCRIPT_DIR, "src"))

from ghostphase import load_config, load_preset, run_scenario  # noqa: E402
from ghostphase.config import EnvelopeConfig, GridConfig, ObjectSpec  # noqa: E402
from ghostphase.core import ScenarioRunner  # noqa: E402
from ghostphase.engine import coincidence_amplitude, klyshko_image, profile_metrics  # noqa: E402
from ghostphase.grid import Wavelength  # noqa: E402
from ghostphase.source import SourceSpec, build_thin_crystal_state  # noqa: E402

PRESETS = ("flat", "phase-slit", "double-phase-slit")


def compare_presets():
    """Run the three presets and print their profile metrics side by side."""
    print(f"{'PRESET':20} {'VIS':>7} {'DIP(mm)':>8} {'CENTER':>7} {'COLLECTED PEAK':>15}")
    flat_peak = None
    for name in PRESETS:
        report = run_scenario(load_preset(name))
        m = report.metrics_raw
        collected = float(report.collected.max())
        if flat_peak is None:
            flat_peak = collected
        print(
            f"{name:20} {m.visibility:7.3f} {m.dip_width * 1e3:8.3f} "
            f"{m.center_value / m.peak:7.3f} {collected / flat_peak:15.3f}"
        )


def phase_sweep(steps=9, n=1025):
    """Visibility of a single phase slit as its phase goes from 0 to 2*pi."""
    base = replace(
        load_preset("phase-slit"),
        n_columns=3,
        grid=GridConfig(n=n),
        envelope=EnvelopeConfig(),
    )
    print(f"{'PHASE/PI':>9} {'VISIBILITY':>11}")
    for k in range(steps):
        phase = 2 * math.pi * k / (steps - 1)
        cfg = replace(base, object=ObjectSpec("phase-slit", phase=phase))
        report = run_scenario(cfg)
        vis = profile_metrics(report.scan.x2, report.scan.coincidence).visibility
        print(f"{phase / math.pi:9.2f} {vis:11.4f}")


def point_source(x1_mm=0.0):
    """
    Same D2 pattern two ways: as a row of G2 and as the image of a point
    source at D1 sent back through the object arm and reflected by the crystal.
    """
    cfg = replace(load_preset("phase-slit"), grid=GridConfig(n=513))
    runner = ScenarioRunner(cfg)
    system = runner.build_system()
    state = build_thin_crystal_state(SourceSpec(Wavelength(cfg.lam_pump), 0.0), runner.grids.crystal)
    m = coincidence_amplitude(state, system)
    i = m.grid1.index_of(x1_mm * 1e-3)
    row = m.g2[i]
    image = klyshko_image(state, system, m.grid1.coordinate(i)).intensity
    diff = abs(image - row).max() / row.max()
    print(f"x1 = {m.grid1.coordinate(i) * 1e3:.3f} mm: max relative difference {diff:.2e}")


def quick_look(config_path):
    """Run any scenario file and print where its profile peaks."""
    report = run_scenario(load_config(config_path))
    m = report.metrics_raw
    print(f"{report.config.name}: peak at {m.peak_x * 1e3:.2f} mm, visibility {m.visibility:.3f}")


if __name__ == "__main__":
    if len(sys.argv) < 2:
        print("Usage: python3 examples.py <command>")
        print("\nCommands:")
        print("  compare          - Run the three presets and compare their profiles")
        print("  sweep            - Slit visibility versus slit phase")
        print("  point-source     - Check a G2 row against the point-source picture")
        print("  file <path>      - Run a scenario file")
        print("\nExample:")
        print("  python3 examples.py compare")
        print("  python3 examples.py file config/custom-grating.yaml")
        sys.exit(1)

    command = sys.argv[1]

    if command == "compare":
        compare_presets()
    elif command == "sweep":
        phase_sweep()
    elif command == "point-source":
        point_source(float(sys.argv[2]) if len(sys.argv) > 2 else 0.0)
    elif command == "file" and len(sys.argv) > 2:
        quick_look(sys.argv[2])
    else:
        print(f"Unknown command: {command}")
        print("Run 'python3 examples.py' for usage information")
        sys.exit(1)
