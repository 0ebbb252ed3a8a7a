"""Command-line interface for ghostphase."""

import argparse
import sys

from . import utils
from .config import dump_config, load_config, load_preset, preset_names, with_overrides
from .core import run_scenario
from .errors import EXIT_OK, GhostPhaseError
from .report import csv_text, emit_csv, emit_g2
from .utils import log


def _load(args):
    if args.preset:
        return load_preset(args.preset)
    return load_config(args.config)


def cmd_simulate(args):
    cfg = _load(args)
    cfg = with_overrides(cfg, workers=args.workers, method="direct" if args.oracle else None)
    if not args.out:
        # stdout carries the CSV
        utils.QUIET = True
    report = run_scenario(cfg, normalize=args.normalize, keep_map=bool(args.emit_g2))
    if args.emit_g2:
        emit_g2(report.coincidence_map, args.emit_g2)
        log(f"wrote G2 map to {args.emit_g2}")
    if args.out:
        emit_csv(report, args.out)
        m = report.metrics_raw
        log(f"wrote {len(report.scan.x2)} scan points to {args.out}")
        log(f"  peak {m.peak:.4g} at {m.peak_x * 1e3:.2f} mm, centre {m.center_value:.4g}")
        log(f"  visibility {m.visibility:.4f}, dip width {m.dip_width * 1e3:.3f} mm")
        log(f"  collection factor {report.collection_factor:.4f}")
        log(f"  time {report.timing.get('total', 0.0):.1f}s, rss {report.resources.get('rss_mb', 0.0):.0f} MB")
    else:
        sys.stdout.write(csv_text(report))


def cmd_show(args):
    cfg = _load(args)
    print(dump_config(cfg), end="")


def cmd_presets(args):
    for name in preset_names():
        cfg = load_preset(name)
        print(f"{name:20} object={cfg.object.kind}, n_columns={cfg.n_columns}, envelope={cfg.envelope.mode}")


def _add_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=str, help="Scenario file (YAML or JSON)")
    src.add_argument("--preset", type=str, help="Built-in preset name (see 'ghostphase presets')")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ghostphase",
        description="Coincidence (ghost) imaging of pure phase objects with entangled photon pairs",
    )
    parser.add_argument("--quiet", action="store_true", help="Suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    # simulate
    p_sim = sub.add_parser("simulate", help="Run a scenario and write the coincidence scan")
    _add_source(p_sim)
    p_sim.add_argument("--out", type=str, help="Output CSV (default: stdout)")
    p_sim.add_argument("--oracle", action="store_true", help="Build every kernel by direct quadrature")
    p_sim.add_argument("--normalize", choices=["self", "flat"], default="self",
                       help="Divide by this run's peak or by the flat-object peak (default: self)")
    p_sim.add_argument("--emit-g2", type=str, metavar="PATH", help="Also write the full G2 matrix as CSV")
    p_sim.add_argument("--workers", type=int, help="Worker threads (default: physical cores)")
    p_sim.set_defaults(func=cmd_simulate)

    # show
    p_show = sub.add_parser("show", help="Print the fully populated configuration")
    _add_source(p_show)
    p_show.set_defaults(func=cmd_show)

    # presets
    p_presets = sub.add_parser("presets", help="List built-in presets")
    p_presets.set_defaults(func=cmd_presets)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    utils.QUIET = args.quiet
    if getattr(args, "workers", None) is not None and args.workers < 1:
        parser.error("--workers must be >= 1")
    try:
        args.func(args)
    except GhostPhaseError as e:
        print(f"{utils.PREFIX} Error ({e.category}): {e}", file=sys.stderr)
        return e.exit_code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
