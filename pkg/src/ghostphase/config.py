"""
Scenario configuration: YAML/JSON files, defaults, validation and presets.

Lengths are SI meters; string values with a unit suffix ("1.4mm", "812nm")
are accepted wherever a length is expected. Errors name the offending key
and, when known, its line in the file.
"""

import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml

from .errors import ConfigurationError, OutputError
from .grid import Wavelength
from .optics import MirrorArraySpec, column_layout, depth_for_phase
from .propagation import METHODS
from .utils import parse_length, warn

PRESET_DIR = Path(__file__).parent / "presets"

OBJECT_KINDS = ("flat", "phase-slit", "double-phase-slit", "amplitude-slit", "double-strip", "custom")
ENVELOPE_MODES = ("none", "full-model", "file")

# Allowed drift of (stop - start) / step from a whole number of steps
SCAN_STEP_RTOL = 1e-6


@dataclass(frozen=True)
class ObjectSpec:
    kind: str = "flat"
    depths: Optional[Tuple[float, ...]] = None
    blocked: Optional[Tuple[bool, ...]] = None
    phase: Optional[float] = None


@dataclass(frozen=True)
class GridConfig:
    n: int = 2049
    object_pitch: float = 20e-6


@dataclass(frozen=True)
class EnvelopeConfig:
    mode: str = "none"
    waist: float = 1e-3
    n: int = 2049
    pitch: float = 4e-6
    path: Optional[str] = None


@dataclass(frozen=True)
class ScanConfig:
    start: float = -8e-3
    stop: float = 8e-3
    step: float = 1e-4

    def count(self) -> Optional[int]:
        """Number of scan points, or None when the step does not divide the range."""
        spans = (self.stop - self.start) / self.step
        n = int(round(spans))
        if abs(spans - n) > SCAN_STEP_RTOL * max(n, 1):
            return None
        return n + 1


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully populated scenario. Defaults are the published two-arm geometry."""

    name: str = "custom"
    lam: float = 812e-9
    lam_pump: float = 406e-9
    d_a: float = 1.17
    d_b: float = 1.98
    d_2: float = 3.96
    crystal_length: float = 1.5e-3
    object: ObjectSpec = field(default_factory=ObjectSpec)
    column_width: float = 300e-6
    n_columns: int = 12
    pull_depth_pi: float = 203e-9
    p1_width: float = 1.4e-3
    p2_width: float = 1.4e-3
    grid: GridConfig = field(default_factory=GridConfig)
    envelope: EnvelopeConfig = field(default_factory=EnvelopeConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    beam_splitter_efficiency: float = 0.5
    workers: Optional[int] = None
    method: str = "auto"

    @property
    def wavelength(self) -> Wavelength:
        return Wavelength(self.lam)

    def mirror_spec(self) -> MirrorArraySpec:
        obj = self.object
        depth_pi = self.pull_depth_pi
        if obj.phase is not None:
            depth_pi = depth_for_phase(obj.phase, self.wavelength)
        if obj.kind == "custom":
            depths = obj.depths if obj.depths is not None else (0.0,) * self.n_columns
            return MirrorArraySpec(self.n_columns, self.column_width, depths, self.wavelength, obj.blocked or ())
        blocked, strips = column_layout(obj.kind, self.n_columns, self.column_width, depth_pi)
        if obj.blocked is not None:
            blocked = obj.blocked
        return MirrorArraySpec(
            self.n_columns, self.column_width, (0.0,) * self.n_columns, self.wavelength, blocked, strips
        )


_LENGTH_KEYS = ("lambda", "lambda_pump", "d_a", "d_b", "d_2", "column_width", "pull_depth_pi", "p1_width", "p2_width")
_TOP_KEYS = (
    "name", "lambda", "lambda_pump", "d_a", "d_b", "d_2", "crystal_length", "object",
    "column_width", "n_columns", "pull_depth_pi", "p1_width", "p2_width", "grid",
    "envelope", "scan", "beam_splitter_efficiency", "workers", "method",
)
_ATTR = {"lambda": "lam", "lambda_pump": "lam_pump"}


class _Reader:
    """Pulls typed values out of the parsed mapping, tracking line numbers."""

    def __init__(self, lines: Dict[str, int]):
        self.lines = lines

    def error(self, message: str, key: str) -> ConfigurationError:
        return ConfigurationError(message, key=key, line=self.lines.get(key))

    def check_keys(self, data: Any, allowed: Tuple[str, ...], prefix: str = "") -> Dict[str, Any]:
        if not isinstance(data, dict):
            raise self.error(f"expected a mapping, got {type(data).__name__}", prefix.rstrip(".") or "<root>")
        for key in data:
            if key not in allowed:
                raise self.error(f"unknown key (allowed: {', '.join(allowed)})", f"{prefix}{key}")
        return data

    def length(self, value: Any, key: str, allow_zero: bool = False) -> float:
        try:
            v = parse_length(value)
        except (TypeError, ValueError):
            raise self.error(f"not a length: {value!r}", key) from None
        if not math.isfinite(v) or v < 0 or (v == 0 and not allow_zero):
            raise self.error(f"must be {'>= 0' if allow_zero else 'positive'}, got {value!r}", key)
        return v

    def signed_length(self, value: Any, key: str) -> float:
        try:
            v = parse_length(value)
        except (TypeError, ValueError):
            raise self.error(f"not a length: {value!r}", key) from None
        if not math.isfinite(v):
            raise self.error(f"not a finite length: {value!r}", key)
        return v

    def integer(self, value: Any, key: str, minimum: int) -> int:
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            raise self.error(f"must be an integer >= {minimum}, got {value!r}", key)
        return value

    def number(self, value: Any, key: str) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise self.error(f"must be a number, got {value!r}", key)
        return float(value)


def _line_map(node: yaml.Node, prefix: str = "", out: Optional[Dict[str, int]] = None) -> Dict[str, int]:
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key = f"{prefix}{key_node.value}"
            out[key] = key_node.start_mark.line + 1
            _line_map(value_node, f"{key}.", out)
    return out


def parse_config_text(text: str, source: str = "<config>") -> ScenarioConfig:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigurationError(f"cannot parse {source}: {getattr(e, 'problem', e)}", line=line) from None
    lines = _line_map(node) if node is not None else {}
    return config_from_mapping(data or {}, lines)


def config_from_mapping(data: Dict[str, Any], lines: Optional[Dict[str, int]] = None) -> ScenarioConfig:
    r = _Reader(lines or {})
    data = r.check_keys(data, _TOP_KEYS)
    values: Dict[str, Any] = {}

    for key in _LENGTH_KEYS:
        if key in data:
            values[_ATTR.get(key, key)] = r.length(data[key], key, allow_zero=(key == "pull_depth_pi"))
    if "crystal_length" in data:
        values["crystal_length"] = r.length(data["crystal_length"], "crystal_length", allow_zero=True)
    if "name" in data:
        values["name"] = str(data["name"])
    if "n_columns" in data:
        values["n_columns"] = r.integer(data["n_columns"], "n_columns", 1)
    if "beam_splitter_efficiency" in data:
        eff = r.number(data["beam_splitter_efficiency"], "beam_splitter_efficiency")
        if not 0 < eff <= 1:
            raise r.error(f"must lie in (0, 1], got {eff!r}", "beam_splitter_efficiency")
        values["beam_splitter_efficiency"] = eff
    if data.get("workers") is not None:
        values["workers"] = r.integer(data["workers"], "workers", 1)
    if "method" in data:
        if data["method"] not in METHODS:
            raise r.error(f"must be one of {', '.join(METHODS)}, got {data['method']!r}", "method")
        values["method"] = data["method"]
    if "object" in data:
        values["object"] = _read_object(r, data["object"])
    if "grid" in data:
        g = r.check_keys(data["grid"], ("n", "object_pitch"), "grid.")
        values["grid"] = GridConfig(
            n=r.integer(g.get("n", GridConfig.n), "grid.n", 2),
            object_pitch=r.length(g.get("object_pitch", GridConfig.object_pitch), "grid.object_pitch"),
        )
    if "envelope" in data:
        values["envelope"] = _read_envelope(r, data["envelope"])
    if "scan" in data:
        values["scan"] = _read_scan(r, data["scan"])

    cfg = ScenarioConfig(**values)
    _check_consistency(cfg, r)
    return cfg


def _read_object(r: _Reader, value: Any) -> ObjectSpec:
    if value is None:
        return ObjectSpec()
    if isinstance(value, str):
        if value not in OBJECT_KINDS or value == "custom":
            kinds = ", ".join(OBJECT_KINDS[:-1])
            raise r.error(f"unknown object '{value}' (use one of {kinds} or a mapping)", "object")
        return ObjectSpec(kind=value)
    m = r.check_keys(value, ("kind", "depths", "blocked", "phase"), "object.")
    kind = m.get("kind", "custom")
    if kind not in OBJECT_KINDS:
        raise r.error(f"unknown object kind '{kind}'", "object.kind")
    depths = None
    if "depths" in m:
        if kind != "custom":
            raise r.error("explicit depths need kind 'custom'", "object.depths")
        if not isinstance(m["depths"], list):
            raise r.error("must be a list of lengths", "object.depths")
        depths = tuple(r.length(d, "object.depths", allow_zero=True) for d in m["depths"])
    blocked = None
    if "blocked" in m:
        if not isinstance(m["blocked"], list) or not all(isinstance(b, bool) for b in m["blocked"]):
            raise r.error("must be a list of true/false flags", "object.blocked")
        blocked = tuple(m["blocked"])
    phase = None
    if "phase" in m:
        if kind not in ("phase-slit", "double-phase-slit"):
            raise r.error("a phase override only applies to phase slits", "object.phase")
        phase = r.number(m["phase"], "object.phase")
        if phase < 0:
            raise r.error(f"must be >= 0, got {phase!r}", "object.phase")
    return ObjectSpec(kind=kind, depths=depths, blocked=blocked, phase=phase)


def _read_envelope(r: _Reader, value: Any) -> EnvelopeConfig:
    if value is None or value == "none":
        return EnvelopeConfig()
    if isinstance(value, str):
        if value != "full-model":
            raise r.error(f"unknown envelope '{value}' (use none, full-model or a mapping)", "envelope")
        return EnvelopeConfig(mode="full-model")
    e = r.check_keys(value, ("mode", "waist", "n", "pitch", "path"), "envelope.")
    mode = e.get("mode", "full-model")
    if mode not in ENVELOPE_MODES:
        raise r.error(f"must be one of {', '.join(ENVELOPE_MODES)}, got {mode!r}", "envelope.mode")
    defaults = EnvelopeConfig()
    env = EnvelopeConfig(
        mode=mode,
        waist=r.length(e.get("waist", defaults.waist), "envelope.waist"),
        n=r.integer(e.get("n", defaults.n), "envelope.n", 2),
        pitch=r.length(e.get("pitch", defaults.pitch), "envelope.pitch"),
        path=e.get("path"),
    )
    if mode == "file" and not env.path:
        raise r.error("file envelope needs a 'path'", "envelope.path")
    return env


def _read_scan(r: _Reader, value: Any) -> ScanConfig:
    s = r.check_keys(value, ("start", "stop", "step"), "scan.")
    d = ScanConfig()
    scan = ScanConfig(
        start=r.signed_length(s.get("start", d.start), "scan.start"),
        stop=r.signed_length(s.get("stop", d.stop), "scan.stop"),
        step=r.length(s.get("step", d.step), "scan.step"),
    )
    if scan.stop <= scan.start:
        raise r.error("stop must be greater than start", "scan.stop")
    if scan.count() is None:
        raise r.error(f"step {scan.step!r} does not divide {scan.start!r} .. {scan.stop!r}", "scan.step")
    return scan


def _check_consistency(cfg: ScenarioConfig, r: _Reader) -> None:
    obj = cfg.object
    if obj.depths is not None and len(obj.depths) != cfg.n_columns:
        raise r.error(f"expected {cfg.n_columns} depths, got {len(obj.depths)}", "object.depths")
    if obj.blocked is not None and len(obj.blocked) != cfg.n_columns:
        raise r.error(f"expected {cfg.n_columns} flags, got {len(obj.blocked)}", "object.blocked")
    if obj.kind in ("double-phase-slit", "double-strip") and cfg.n_columns < 3:
        raise r.error(f"'{obj.kind}' needs at least 3 columns", "n_columns")
    if abs(cfg.lam_pump - cfg.lam / 2) > 1e-9 * cfg.lam:
        warn(
            f"lambda_pump ({cfg.lam_pump:.6g} m) is not lambda/2 ({cfg.lam / 2:.6g} m); "
            "the degenerate model is used regardless"
        )


def load_config(path) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise OutputError(f"cannot read config {p}: {e.strerror or e}") from None
    return parse_config_text(text, str(p))


def preset_names() -> Tuple[str, ...]:
    return tuple(sorted(f.stem for f in PRESET_DIR.glob("*.yaml")))


def load_preset(name: str) -> ScenarioConfig:
    path = PRESET_DIR / f"{name}.yaml"
    if not path.is_file():
        raise ConfigurationError(f"unknown preset '{name}' (available: {', '.join(preset_names())})")
    return load_config(path)


def config_to_mapping(cfg: ScenarioConfig) -> Dict[str, Any]:
    """Plain mapping in file-key spelling (round-trips through config_from_mapping)."""
    d = asdict(cfg)
    d["lambda"] = d.pop("lam")
    d["lambda_pump"] = d.pop("lam_pump")
    obj = {k: (list(v) if isinstance(v, tuple) else v) for k, v in d["object"].items() if v is not None}
    d["object"] = obj["kind"] if len(obj) == 1 and obj["kind"] != "custom" else obj
    env = d["envelope"]
    if env["mode"] == "none":
        d["envelope"] = "none"
    elif env["mode"] == "file":
        d["envelope"] = {"mode": "file", "path": env["path"]}
    else:
        env.pop("path")
    order = ["name"] + [k for k in _TOP_KEYS if k != "name"]
    return {k: d[k] for k in order}


def dump_config(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(config_to_mapping(cfg), sort_keys=False, default_flow_style=False)


def with_overrides(cfg: ScenarioConfig, **changes: Any) -> ScenarioConfig:
    """Copy with the given fields replaced (None values are ignored)."""
    return replace(cfg, **{k: v for k, v in changes.items() if v is not None})
