"""Flat ``key = value`` experiment configuration.

Blank lines and ``#`` comments are ignored.  Every key is optional; missing
keys keep the defaults (the evaluation parameters of the reference
experiment).  ``config_to_text`` writes a fully resolved file that loads
back to an identical :class:`SimConfig`.
"""

import dataclasses
import math

from .decision import ESTIMATORS, Method
from .errors import ConfigError
from .geometry import CellGeometry
from .radio import RadioModel
from .simulator import RESIDUAL_MODES, SimConfig
from .thresholds import HandoverLatencies, ToleranceTargets


def _float(text):
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("not finite")
    return value


def _int(text):
    return int(text, 0)


def _optional_float(text):
    return None if text.strip().lower() in ("", "auto", "none") else _float(text)


def parse_speeds(text):
    """``"3.6:100:2"`` (start:stop:step, stop inclusive when hit) or ``"10, 50, 100"``."""
    text = text.strip()
    if ":" in text:
        start, stop, step = (_float(p) for p in text.split(":"))
        if step <= 0:
            raise ValueError("step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + k * step, 10) for k in range(max(n, 0)))
    return tuple(_float(p) for p in text.split(",") if p.strip())


def parse_methods(text):
    return tuple(Method(p.strip()) for p in text.split(",") if p.strip())


def _choice(options):
    def parse(text):
        text = text.strip()
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text

    return parse


def _positive(x):
    return x > 0


def _non_negative(x):
    return x >= 0


def _open_unit(x):
    return 0 < x < 1


# key -> (section, field, parser, check, requirement)
KEYS = {
    "cell.radius_m": ("cell", "radius_m", _float, _positive, "must be positive"),
    "radio.tx_power_dbm": ("radio", "tx_power_dbm", _float, None, ""),
    "radio.ref_distance_m": ("radio", "ref_distance_m", _float, _positive, "must be positive"),
    "radio.ref_path_loss_db": ("radio", "ref_path_loss_db", _float, None, ""),
    "radio.path_loss_exponent": ("radio", "path_loss_exponent", _float, _positive, "must be positive"),
    "radio.sigma_db": ("radio", "shadow_sigma_db", _float, _non_negative, "must be non-negative"),
    "latency.into_wlan_s": ("latencies", "into_wlan_s", _float, _non_negative, "must be non-negative"),
    "latency.out_of_wlan_s": ("latencies", "out_of_wlan_s", _float, _non_negative, "must be non-negative"),
    "targets.max_failure_prob": ("targets", "max_failure_prob", _float, _open_unit, "must lie in (0, 1)"),
    "targets.max_unnecessary_prob": ("targets", "max_unnecessary_prob", _float, _open_unit, "must lie in (0, 1)"),
    "baseline.fixed_radius_m": (None, "fixed_radius_m", _float, _positive, "must be positive"),
    "baseline.fixed_threshold_dbm": (None, "fixed_threshold_dbm", _optional_float, None, ""),
    "baseline.hysteresis_radius_m": (None, "hysteresis_radius_m", _float, _positive, "must be positive"),
    "baseline.hysteresis_threshold_dbm": (None, "hysteresis_threshold_dbm", _optional_float, None, ""),
    "sampling.interval_s": (None, "sample_interval_s", _float, _positive, "must be positive"),
    "hne.window": (None, "hne_window", _int, _positive, "must be positive"),
    "hne.estimator": (None, "hne_estimator", _choice(ESTIMATORS), None, ""),
    "sweep.speeds": (None, "speeds_kmh", parse_speeds, None, ""),
    "sweep.trials": (None, "trials_per_speed", _int, _positive, "must be positive"),
    "sweep.seed": (None, "seed", _int, _non_negative, "must be non-negative"),
    "sweep.methods": (None, "methods", parse_methods, None, ""),
    "sweep.residual_mode": (None, "residual_mode", _choice(RESIDUAL_MODES), None, ""),
}

_SECTION_TYPES = {
    "cell": CellGeometry,
    "radio": RadioModel,
    "latencies": HandoverLatencies,
    "targets": ToleranceTargets,
}


def parse_config_text(text, source="<config>"):
    """Split config text into a ``{key: raw value}`` mapping (later lines win)."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}", key)
        values[key] = value
    return values


def build_config(values, base=None):
    """Apply raw ``{key: text}`` overrides on top of ``base`` (defaults if omitted)."""
    base = SimConfig() if base is None else base
    sections = {name: {} for name in _SECTION_TYPES}
    top = {}
    for key, text in values.items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", key)
        section, name, parse, check, requirement = KEYS[key]
        try:
            value = parse(str(text))
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {text!r} ({exc})", key) from None
        if check is not None and not check(value):
            raise ConfigError(f"{key}: {value!r} {requirement}", key)
        if section is None:
            top[name] = value
        else:
            sections[section][name] = value
    for name, fields in sections.items():
        if fields:
            top[name] = dataclasses.replace(getattr(base, name), **fields)
    return dataclasses.replace(base, **top)


def load_config(path, overrides=None):
    """Read a config file (``None`` means defaults) and apply ``overrides``."""
    values = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read(), source=str(path)))
    values.update(overrides or {})
    return build_config(values)


def config_to_dict(cfg):
    out = {}
    for key, (section, name, *_rest) in KEYS.items():
        value = getattr(cfg if section is None else getattr(cfg, section), name)
        if name == "speeds_kmh":
            value = ", ".join(repr(s) for s in value)
        elif name == "methods":
            value = ", ".join(m.value for m in value)
        elif value is None:
            value = "auto"
        out[key] = value
    return out


def config_to_text(cfg):
    lines = ["# resolved configuration; load with --config to replay the run"]
    for key, value in config_to_dict(cfg).items():
        lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
    return "\n".join(lines) + "\n"
