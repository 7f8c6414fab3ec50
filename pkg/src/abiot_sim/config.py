"""Run configuration: defaults, validation, dotted overrides.

All quantities are SI: meters, seconds, watts, joules, hertz, ohms, farads.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

from .acoustics import EmitterSpec, OscillatorConfig, oscillator_frequency
from .errors import ConfigError
from .field_model import FieldSpec, PestSpecies, build_field
from .flight import TricopterParams
from .path_planner import CORNERS, DENSITY_SPACING

# Committed calibration, produced by `abiot-sim calibrate` on the default config.
DEFAULT_K = 0.00318712
DEFAULT_I_REF = 0.001

DEFAULT_CONFIG = {
    "field": {
        "width_m": 30.0,
        "length_m": 30.0,
        "cell_size_m": 0.5,
        "crop_height_m": 1.0,
        "launch_point": [0.0, 0.0],
    },
    "species": {
        "name": "generic_insect",
        "band_lo_hz": 20000.0,
        "band_hi_hz": 65000.0,
        "base_susceptibility": 0.9,
        "habituation_days": 10.0,
        "rf_susceptible": True,
    },
    "emitter": {
        "acoustic_power_w": 1.0,
        # null: take the frequency from the oscillator section
        "frequency_hz": None,
        "rf_enabled": True,
        "effective_range_m": 15.0,
    },
    "oscillator": {"r1_ohm": 10000.0, "r2_ohm": 33000.0, "capacitance_f": 4.7e-10},
    "tricopter": {
        "cruise_speed_mps": 3.0,
        "climb_rate_mps": 1.0,
        "yaw_rate_dps": 180.0,
        "hover_power_w": 90.0,
        "cruise_power_w": 110.0,
        "battery_capacity_j": 400000.0,
        "low_battery_fraction": 0.2,
    },
    "path": {
        "density": "dense",
        "spacing_m": None,
        "laps": 6,
        "start_corner": None,
        "region": None,
    },
    "swarm": {"max_rounds": 10, "negotiate": True, "perturbations": []},
    "sim": {
        "dt_s": 0.5,
        "days": 1,
        "start_day": 0,
        "laps_per_day": None,
        "mode": "standalone",
        "n_agents": 4,
        "rf_on": True,
        "seed": 0,
        "calibration": {"k": DEFAULT_K, "i_ref": DEFAULT_I_REF},
        # uniform: anywhere in the field (whole-system figure);
        # near_path: only within emitter range of a flown path (in-range figure)
        "pests": {"count": 200, "placement": "uniform", "positions": None},
        # repelled pests come back overnight, keeping their habituation
        "repelled_return": False,
        "beacon_steps": 10,
    },
}

_NUMBER = (int, float)


def _is_num(v):
    return isinstance(v, _NUMBER) and not isinstance(v, bool)


def _check_keys(given: dict, allowed: dict, prefix: str):
    if not isinstance(given, dict):
        raise ConfigError(f"expected an object, got {type(given).__name__}", prefix or None)
    for key, value in given.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in allowed:
            raise ConfigError("unknown key", path)
        if isinstance(allowed[key], dict) and key != "crop_height_m":
            _check_keys(value, allowed[key], path)


def merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def parse_override(text: str):
    """Split ``section.key=value``; the value is JSON when it parses, else a string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def apply_overrides(cfg: dict, overrides) -> dict:
    cfg = copy.deepcopy(cfg)
    for item in overrides or ():
        key, value = parse_override(item) if isinstance(item, str) else item
        parts = key.split(".")
        node = cfg
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                raise ConfigError("unknown key", key)
            node = node[part]
        if parts[-1] not in node:
            raise ConfigError("unknown key", key)
        node[parts[-1]] = value
    return cfg


def _num(cfg, section, key, *, positive=False, integer=False, minimum=None):
    value = cfg[section][key] if "." not in section else _dig(cfg, section)[key]
    path = f"{section}.{key}"
    if integer:
        if isinstance(value, bool) or not isinstance(value, int):
            if _is_num(value) and float(value).is_integer():
                value = int(value)
            else:
                raise ConfigError(f"expected an integer, got {value!r}", path)
    elif not _is_num(value):
        raise ConfigError(f"expected a number, got {value!r}", path)
    if positive and not value > 0:
        raise ConfigError(f"must be positive, got {value}", path)
    if minimum is not None and value < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value}", path)
    return value


def _dig(cfg, dotted):
    node = cfg
    for part in dotted.split("."):
        node = node[part]
    return node


def _bool(cfg, section, key):
    value = _dig(cfg, section)[key]
    if not isinstance(value, bool):
        raise ConfigError(f"expected true/false, got {value!r}", f"{section}.{key}")
    return value


def _choice(cfg, section, key, options):
    value = _dig(cfg, section)[key]
    if value not in options:
        raise ConfigError(f"expected one of {sorted(options)}, got {value!r}", f"{section}.{key}")
    return value


@dataclass
class RunConfig:
    """Validated configuration with domain objects built from each section."""

    raw: dict
    field: FieldSpec
    species: PestSpecies
    emitter: EmitterSpec
    oscillator: OscillatorConfig
    tricopter: TricopterParams

    @property
    def sim(self) -> dict:
        return self.raw["sim"]

    @property
    def path(self) -> dict:
        return self.raw["path"]

    @property
    def swarm(self) -> dict:
        return self.raw["swarm"]

    @property
    def spacing_m(self) -> float:
        s = self.path["spacing_m"]
        return float(s) if s is not None else DENSITY_SPACING[self.path["density"]]

    @property
    def k(self) -> float:
        return float(self.sim["calibration"]["k"])

    @property
    def i_ref(self) -> float:
        return float(self.sim["calibration"]["i_ref"])

    @property
    def n_agents(self) -> int:
        return 1 if self.sim["mode"] == "standalone" else int(self.sim["n_agents"])

    def laps_on_day(self, day: int) -> int:
        schedule = self.sim["laps_per_day"]
        if not schedule:
            return int(self.path["laps"])
        return int(schedule[min(day, len(schedule) - 1)])

    def with_overrides(self, overrides) -> "RunConfig":
        return validate(apply_overrides(self.raw, overrides))

    def to_json(self) -> str:
        return json.dumps(self.raw, indent=2, sort_keys=False) + "\n"


def validate(cfg: dict) -> RunConfig:
    """Check a full (merged) config dict and build the domain objects."""
    _check_keys(cfg, DEFAULT_CONFIG, "")
    cfg = merge(DEFAULT_CONFIG, cfg)

    field = build_field(cfg["field"])

    sp = cfg["species"]
    if not isinstance(sp["name"], str) or not sp["name"]:
        raise ConfigError("expected a non-empty string", "species.name")
    for key in ("band_lo_hz", "band_hi_hz"):
        _num(cfg, "species", key, positive=True)
    if not sp["band_lo_hz"] < sp["band_hi_hz"]:
        raise ConfigError("band_lo_hz must be below band_hi_hz", "species.band_lo_hz")
    s = _num(cfg, "species", "base_susceptibility")
    if not 0 <= s <= 1:
        raise ConfigError(f"must be in [0, 1], got {s}", "species.base_susceptibility")
    _num(cfg, "species", "habituation_days", positive=True)
    species = PestSpecies(sp["name"], float(sp["band_lo_hz"]), float(sp["band_hi_hz"]), float(s),
                          float(sp["habituation_days"]), _bool(cfg, "species", "rf_susceptible"))

    for key in ("r1_ohm", "r2_ohm", "capacitance_f"):
        _num(cfg, "oscillator", key, positive=True)
    osc = OscillatorConfig(**{k: float(v) for k, v in cfg["oscillator"].items()})

    em = cfg["emitter"]
    _num(cfg, "emitter", "acoustic_power_w", positive=True)
    _num(cfg, "emitter", "effective_range_m", positive=True)
    freq = em["frequency_hz"]
    if freq is None:
        freq = oscillator_frequency(osc)
    else:
        _num(cfg, "emitter", "frequency_hz", positive=True)
    emitter = EmitterSpec(float(em["acoustic_power_w"]), float(freq),
                          _bool(cfg, "emitter", "rf_enabled"), float(em["effective_range_m"]))

    for key in ("cruise_speed_mps", "climb_rate_mps", "yaw_rate_dps", "hover_power_w",
                "cruise_power_w", "battery_capacity_j"):
        _num(cfg, "tricopter", key, positive=True)
    f = _num(cfg, "tricopter", "low_battery_fraction")
    if not 0 < f < 1:
        raise ConfigError(f"must be in (0, 1), got {f}", "tricopter.low_battery_fraction")
    tri = TricopterParams(**{k: float(v) for k, v in cfg["tricopter"].items()})

    _choice(cfg, "path", "density", set(DENSITY_SPACING))
    if cfg["path"]["spacing_m"] is not None:
        _num(cfg, "path", "spacing_m", positive=True)
    cfg["path"]["laps"] = _num(cfg, "path", "laps", integer=True, minimum=1)
    if cfg["path"]["start_corner"] is not None:
        _choice(cfg, "path", "start_corner", set(CORNERS))
    region = cfg["path"]["region"]
    if region is not None:
        try:
            x0, y0, x1, y1 = (float(v) for v in region)
        except (TypeError, ValueError):
            raise ConfigError(f"expected [x0, y0, x1, y1], got {region!r}", "path.region") from None
        if not (x1 > x0 and y1 > y0):
            raise ConfigError("region has no area", "path.region")
        if x0 < 0 or y0 < 0 or x1 > field.width_m + 1e-9 or y1 > field.length_m + 1e-9:
            raise ConfigError("region extends beyond the field", "path.region")

    cfg["swarm"]["max_rounds"] = _num(cfg, "swarm", "max_rounds", integer=True, minimum=1)
    _bool(cfg, "swarm", "negotiate")
    perts = cfg["swarm"]["perturbations"]
    if not isinstance(perts, list):
        raise ConfigError("expected a list", "swarm.perturbations")
    for i, p in enumerate(perts):
        if not isinstance(p, dict) or set(p) != {"agent_id", "side", "offset_m"} \
                or p["side"] not in ("e", "w", "n", "s") or not _is_num(p["offset_m"]):
            raise ConfigError("expected {agent_id, side: e|w|n|s, offset_m}",
                              f"swarm.perturbations[{i}]")

    _num(cfg, "sim", "dt_s", positive=True)
    cfg["sim"]["days"] = _num(cfg, "sim", "days", integer=True, minimum=1)
    cfg["sim"]["start_day"] = _num(cfg, "sim", "start_day", integer=True, minimum=0)
    sched = cfg["sim"]["laps_per_day"]
    if sched is not None:
        if not isinstance(sched, list) or not sched or not all(
                isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in sched):
            raise ConfigError("expected a non-empty list of integers >= 1", "sim.laps_per_day")
    _choice(cfg, "sim", "mode", {"standalone", "coordinated"})
    cfg["sim"]["n_agents"] = _num(cfg, "sim", "n_agents", integer=True, minimum=1)
    _bool(cfg, "sim", "rf_on")
    _bool(cfg, "sim", "repelled_return")
    cfg["sim"]["seed"] = _num(cfg, "sim", "seed", integer=True, minimum=0)
    cfg["sim"]["beacon_steps"] = _num(cfg, "sim", "beacon_steps", integer=True, minimum=1)
    _num(cfg, "sim.calibration", "k", positive=True)
    _num(cfg, "sim.calibration", "i_ref", positive=True)
    cfg["sim"]["pests"]["count"] = _num(cfg, "sim.pests", "count", integer=True, minimum=0)
    _choice(cfg, "sim.pests", "placement", {"uniform", "near_path"})
    pos = cfg["sim"]["pests"]["positions"]
    if pos is not None:
        try:
            pts = [(float(x), float(y)) for x, y in pos]
        except (TypeError, ValueError):
            raise ConfigError("expected a list of [x, y]", "sim.pests.positions") from None
        for x, y in pts:
            if not field.contains(x, y):
                raise ConfigError(f"pest ({x}, {y}) lies outside the field", "sim.pests.positions")

    return RunConfig(cfg, field, species, emitter, osc, tri)


def default_config(**overrides) -> RunConfig:
    """Validated defaults; keyword overrides use ``section__key`` names."""
    pairs = [(k.replace("__", "."), v) for k, v in overrides.items()]
    return validate(apply_overrides(DEFAULT_CONFIG, pairs))


def load_config(path, overrides=()) -> RunConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    _check_keys(data, DEFAULT_CONFIG, "")
    return validate(apply_overrides(merge(DEFAULT_CONFIG, data), overrides))
