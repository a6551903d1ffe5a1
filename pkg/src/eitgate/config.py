"""Experiment configuration: parsing, validation, canonical form.

Configs are TOML documents whose physical keys carry their unit in the
key name (``tau_us``, ``coupling_detuning_mhz``), so a value can never
be misread by an order of magnitude.  Parsing keeps only known keys;
unknown ones become validation errors rather than silent typos.

The canonical serialization (stable key order, repr-exact floats) feeds
both the round-trip guarantee and the content hash stamped on output
artifacts.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import resources

try:
    import tomllib as tomli
except ModuleNotFoundError:
    import tomli

from .presets import PRESETS
from .units import TWO_PI

PROTOCOLS = ("raman_scan", "eit_spectrum", "cnot_table", "bell", "parity",
             "ghz", "darkstate", "shifts")
SCAN_PROTOCOLS = {"raman_scan": "delta", "eit_spectrum": "coupling_detuning"}
METHODS = ("dense", "trajectories")
GEOMETRY_KINDS = ("line", "right_angle", "star")
MAX_GHZ_TARGETS = 4

# section -> key -> (type, default); physical keys carry units in the name
SCHEMA = {
    "": {
        "protocol": (str, ""),
        "preset": (str, "6p32_table1"),
    },
    "overrides": {
        "probe_power_uw": (float, None),
        "coupling_power_mw": (float, None),
        "waist_um": (float, None),
        "detuning_mhz": (float, None),
        "raman_power_scale": (float, None),
        "coupling_power_scale": (float, None),
        "delta_mhz": (float, None),
        "coupling_detuning_mhz": (float, None),
    },
    "pulse": {
        "tau_us": (float, None),
    },
    "scan": {
        "start_mhz": (float, -0.2),
        "stop_mhz": (float, 0.8),
        "points": (int, 41),
    },
    "geometry": {
        "kind": (str, "line"),
        "spacing_um": (float, None),
    },
    "ghz": {
        "k": (int, 2),
        "suppress_target_target": (bool, True),
    },
    "gate": {
        "coupling_on_control": (bool, False),
        "ideal_control": (bool, False),
        "reduced": (bool, False),
    },
    "parity": {
        "points": (int, 64),
    },
    "integrator": {
        "rtol": (float, 1e-8),
        "atol": (float, 1e-11),
    },
    "run": {
        "method": (str, "dense"),
        "seed": (int, 1234),
        "trajectories": (int, 2500),
        "threads": (int, None),
    },
}


@dataclass
class Diagnostic:
    path: str
    message: str
    severity: str  # "error" or "warning"

    def __str__(self):
        return f"{self.severity}: {self.path}: {self.message}"


@dataclass
class ExperimentConfig:
    """Validated experiment description, flat within named sections."""

    protocol: str
    preset: str
    overrides: dict = field(default_factory=dict)
    pulse: dict = field(default_factory=dict)
    scan: dict = field(default_factory=dict)
    geometry: dict = field(default_factory=dict)
    ghz: dict = field(default_factory=dict)
    gate: dict = field(default_factory=dict)
    parity: dict = field(default_factory=dict)
    integrator: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)

    def to_dict(self):
        out = {"protocol": self.protocol, "preset": self.preset}
        for section in ("overrides", "pulse", "scan", "geometry", "ghz",
                        "gate", "parity", "integrator", "run"):
            values = getattr(self, section)
            if values:
                out[section] = dict(values)
        return out


def _coerce(value, typ):
    if typ is float and isinstance(value, (int, float)) \
            and not isinstance(value, bool):
        return float(value)
    if typ is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if typ is bool and isinstance(value, bool):
        return value
    if typ is str and isinstance(value, str):
        return value
    return None


def parse_config(text, diagnostics=None):
    """Parse TOML text into an ExperimentConfig, collecting diagnostics.

    Returns the config (with defaults filled) even when diagnostics hold
    errors, so callers can report every problem in one pass.
    """
    diags = diagnostics if diagnostics is not None else []
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        diags.append(Diagnostic("(document)", f"not valid TOML: {exc}",
                                "error"))
        raw = {}

    sections = {}
    for section, keys in SCHEMA.items():
        src = raw if section == "" else raw.get(section, {})
        if section and section in raw and not isinstance(raw[section], dict):
            diags.append(Diagnostic(section, "expected a table", "error"))
            src = {}
        out = {}
        for key, (typ, default) in keys.items():
            if key in src:
                value = _coerce(src[key], typ)
                if value is None:
                    path = f"{section}.{key}" if section else key
                    diags.append(Diagnostic(
                        path, f"expected {typ.__name__}, got "
                        f"{type(src[key]).__name__}", "error"))
                    value = default
                out[key] = value
            elif default is not None or key in ("protocol",):
                out[key] = default
        sections[section] = out
        known = set(keys)
        for key in src:
            if key not in known:
                path = f"{section}.{key}" if section else key
                if section == "" and key in SCHEMA:
                    continue
                diags.append(Diagnostic(path, "unknown key", "error"))

    top = sections.pop("")
    return ExperimentConfig(protocol=top.get("protocol", ""),
                            preset=top.get("preset", ""), **sections)


def load_config(path):
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    diags = []
    config = parse_config(text, diags)
    return config, diags


def bundled_config_path(name):
    """Filesystem path of a packaged example config, by file name."""
    path = resources.files("eitgate") / "configs" / name
    if not path.is_file():
        have = sorted(p.name for p in
                      (resources.files("eitgate") / "configs").iterdir())
        raise FileNotFoundError(f"no bundled config {name!r}; have {have}")
    return str(path)


def _fmt_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_config(config):
    """Canonical TOML for a config: schema key order, repr-exact floats."""
    lines = []
    data = config.to_dict()
    for key in ("protocol", "preset"):
        if key in data:
            lines.append(f"{key} = {_fmt_value(data[key])}")
    for section, keys in SCHEMA.items():
        if not section or section not in data:
            continue
        lines.append("")
        lines.append(f"[{section}]")
        for key in keys:
            if key in data[section] and data[section][key] is not None:
                lines.append(f"{key} = {_fmt_value(data[section][key])}")
    return "\n".join(lines) + "\n"


def config_hash(config):
    """Content hash of the canonical serialization."""
    return hashlib.sha256(serialize_config(config).encode()).hexdigest()


def validate_config(config, parse_diagnostics=()):
    """Full diagnostic list; empty means a run would start."""
    diags = list(parse_diagnostics)

    if not config.protocol:
        diags.append(Diagnostic("protocol", "missing or empty; expected one "
                                "of " + ", ".join(PROTOCOLS), "error"))
    elif config.protocol not in PROTOCOLS:
        diags.append(Diagnostic(
            "protocol", f"unknown protocol {config.protocol!r}; expected one "
            "of " + ", ".join(PROTOCOLS), "error"))
    if config.preset not in PRESETS:
        diags.append(Diagnostic(
            "preset", f"unknown preset {config.preset!r}; expected one of "
            + ", ".join(sorted(PRESETS)), "error"))

    ov = config.overrides
    for key in ("probe_power_uw", "coupling_power_mw", "waist_um",
                "raman_power_scale", "coupling_power_scale"):
        value = ov.get(key)
        if value is not None and value <= 0.0:
            diags.append(Diagnostic(f"overrides.{key}",
                                    "must be positive", "error"))
    allowed = PRESET_OVERRIDE_KEYS.get(config.preset)
    if allowed is not None:
        for key, value in ov.items():
            if value is not None and key not in allowed:
                diags.append(Diagnostic(
                    f"overrides.{key}",
                    f"not supported by preset {config.preset!r}", "error"))
    tau = config.pulse.get("tau_us")
    if tau is not None and tau <= 0.0:
        diags.append(Diagnostic("pulse.tau_us", "must be positive", "error"))

    scan = config.scan
    if config.protocol in SCAN_PROTOCOLS:
        if scan.get("points", 0) < 2:
            diags.append(Diagnostic("scan.points", "need at least 2 points",
                                    "error"))
        if scan.get("start_mhz") is not None \
                and scan.get("stop_mhz") is not None \
                and scan["start_mhz"] >= scan["stop_mhz"]:
            diags.append(Diagnostic("scan.start_mhz",
                                    "start must lie below stop", "error"))

    if config.geometry.get("kind") not in GEOMETRY_KINDS:
        diags.append(Diagnostic("geometry.kind", "expected one of "
                                + ", ".join(GEOMETRY_KINDS), "error"))
    spacing = config.geometry.get("spacing_um")
    if spacing is not None and spacing <= 0.0:
        diags.append(Diagnostic("geometry.spacing_um", "must be positive",
                                "error"))

    if config.protocol == "ghz":
        k = config.ghz.get("k", 0)
        if not 1 <= k <= MAX_GHZ_TARGETS:
            diags.append(Diagnostic(
                "ghz.k", f"supported target counts are 1..{MAX_GHZ_TARGETS}",
                "error"))

    run = config.run
    if run.get("method") not in METHODS:
        diags.append(Diagnostic("run.method", "expected one of "
                                + ", ".join(METHODS), "error"))
    elif run.get("method") == "trajectories" and config.protocol != "ghz":
        diags.append(Diagnostic(
            "run.method", "only the ghz protocol samples trajectories; "
            "other protocols integrate the density matrix directly",
            "warning"))
    if run.get("trajectories", 0) < 1:
        diags.append(Diagnostic("run.trajectories", "must be at least 1",
                                "error"))
    if run.get("seed") is not None and run["seed"] < 0:
        diags.append(Diagnostic("run.seed", "must be non-negative", "error"))
    threads = run.get("threads")
    if threads is not None and threads < 1:
        diags.append(Diagnostic("run.threads", "must be at least 1", "error"))
    for key in ("rtol", "atol"):
        value = config.integrator.get(key)
        if value is not None and value <= 0.0:
            diags.append(Diagnostic(f"integrator.{key}", "must be positive",
                                    "error"))

    diags.extend(_area_warning(config))
    return diags


def _area_warning(config):
    """Warn when the requested window misses the transfer-pi length."""
    tau = config.pulse.get("tau_us")
    if tau is None or tau <= 0.0 or config.preset not in PRESETS:
        return []
    if config.protocol not in ("cnot_table", "bell", "ghz", "parity"):
        return []
    from .analysis import effective_rabi
    from .pulses import duration_for_pi_area

    try:
        preset = _build_preset(config)
    except Exception:
        return []
    omega = effective_rabi(preset.target)
    if omega == 0.0:
        return []
    ideal = duration_for_pi_area(omega) * 1e6
    if abs(tau - ideal) > 0.01 * ideal:
        return [Diagnostic(
            "pulse.tau_us",
            f"window {tau:.4f} us misses the transfer-pi length "
            f"{ideal:.4f} us; the conditional flip will be incomplete",
            "warning")]
    return []


def has_errors(diagnostics):
    return any(d.severity == "error" for d in diagnostics)


# override key -> (factory kwarg, scale into the factory's SI/rad-s units)
_OVERRIDE_MAP = {
    "probe_power_uw": ("probe_power", 1e-6),
    "coupling_power_mw": ("coupling_power", 1e-3),
    "waist_um": ("waist", 1e-6),
    "detuning_mhz": ("detuning", TWO_PI * 1e6),
    "raman_power_scale": ("raman_power_scale", 1.0),
    "coupling_power_scale": ("coupling_power_scale", 1.0),
    "delta_mhz": ("delta", TWO_PI * 1e6),
    "coupling_detuning_mhz": ("coupling_detuning", TWO_PI * 1e6),
}

PRESET_OVERRIDE_KEYS = {
    "6p32_table1": ("raman_power_scale", "coupling_power_scale",
                    "delta_mhz", "coupling_detuning_mhz"),
    "7p12_figS2": ("probe_power_uw", "coupling_power_mw", "waist_um",
                   "detuning_mhz", "delta_mhz", "coupling_detuning_mhz"),
}


def _build_preset(config):
    """Instantiate the preset with the config's physical overrides."""
    kwargs = {}
    for key, value in config.overrides.items():
        if value is None:
            continue
        name, scale = _OVERRIDE_MAP[key]
        kwargs[name] = value * scale
    return PRESETS[config.preset](**kwargs)
