"""Flat dotted-key configuration files.

One ``key = value`` pair per line, ``#`` comments, blank lines ignored.  Keys
carry their unit as a suffix and override fields of a named preset; unknown
or repeated keys are hard errors.  Example::

    # narrower stroke, heavier abdomen
    linkage.l1_mm = 14.95
    wing.phi_deg = 10
    sim.tau_nm = 0.03
    abdomen.m2_g = 2.5

Serialization emits every key in a fixed order with values that parse back to
bit-identical SI numbers, so parse -> serialize -> parse is the identity.
"""

from __future__ import annotations

import math
from dataclasses import replace

from .errors import ValidationError
from .params import Preset

_DEG = math.pi / 180.0

# key -> (preset section, field name, kind); kind fixes the unit conversion
KEYS: dict[str, tuple[str, str, str]] = {
    "linkage.l1_mm": ("linkage", "l1", "mm"),
    "linkage.l2_mm": ("linkage", "l2", "mm"),
    "linkage.l3_mm": ("linkage", "l3", "mm"),
    "linkage.l4_mm": ("linkage", "l4", "mm"),
    "linkage.l5_mm": ("linkage", "l5", "mm"),
    "linkage.d1_mm": ("linkage", "d1", "mm"),
    "linkage.d2_mm": ("linkage", "d2", "mm"),
    "linkage.k_mnm": ("linkage", "K", "milli"),
    "wing.l6_mm": ("wing", "l6", "mm"),
    "wing.l7_mm": ("wing", "l7", "mm"),
    "wing.cr_mm": ("wing", "c_r", "mm"),
    "wing.phi_deg": ("wing", "Phi", "deg"),
    "wing.i_wing_kgm2": ("wing", "I_wing", "float"),
    "wing.rc_mm": ("wing", "R_C", "mm"),
    "wing.m1_g": ("wing", "m1", "g"),
    "abdomen.d3_mm": ("abdomen", "d3", "mm"),
    "abdomen.d4_mm": ("abdomen", "d4", "mm"),
    "abdomen.d5_mm": ("abdomen", "d5", "mm"),
    "abdomen.m2_g": ("abdomen", "m2", "g"),
    "abdomen.dc_mm": ("abdomen", "d_c", "mm"),
    "env.rho_kgm3": ("env", "rho", "float"),
    "env.nu_m2s": ("env", "nu", "float"),
    "env.g_ms2": ("env", "g", "float"),
    "sim.tau_nm": ("sim", "tau", "float"),
    "sim.alpha_deg": ("sim", "alpha", "deg"),
    "sim.dt_s": ("sim", "dt", "float"),
    "sim.duration_s": ("sim", "duration", "float"),
    "sim.n_strips": ("sim", "n_strips", "int"),
    "sim.hinges_enabled": ("sim", "hinges_enabled", "bool"),
    "sim.abdomen_mode": ("sim", "abdomen_mode", "str"),
    "sim.aero_enabled": ("sim", "aero_enabled", "bool"),
    "sim.initial_angle_deg": ("sim", "initial_angle", "deg_or_auto"),
}

_SCALES = {"mm": 1e-3, "milli": 1e-3, "g": 1e-3, "deg": _DEG, "float": 1.0}


def _parse_value(key: str, kind: str, text: str, line_no: int):
    def bad(why: str):
        return ValidationError(f"line {line_no}: config key {key!r}: {why}")

    if kind == "int":
        try:
            return int(text)
        except ValueError:
            raise bad(f"expected an integer, got {text!r}") from None
    if kind == "bool":
        if text == "true":
            return True
        if text == "false":
            return False
        raise bad(f"expected true or false, got {text!r}")
    if kind == "str":
        return text
    if kind == "deg_or_auto":
        if text == "auto":
            return None
        kind = "deg"
    try:
        value = float(text)
    except ValueError:
        raise bad(f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise bad(f"expected a finite number, got {text!r}")
    return value * _SCALES[kind]


def _format_value(kind: str, value) -> str:
    if kind == "int":
        return str(value)
    if kind == "bool":
        return "true" if value else "false"
    if kind == "str":
        return value
    if kind == "deg_or_auto":
        if value is None:
            return "auto"
        kind = "deg"
    scale = _SCALES[kind]
    display = value / scale
    # nudge until the displayed decimal scales back to the exact SI value
    for _ in range(4):
        if display * scale == value:
            break
        display = math.nextafter(
            display, math.inf if display * scale < value else -math.inf
        )
    return repr(display)


def parse_config(text: str, base: Preset) -> Preset:
    """Apply a configuration text onto ``base`` and revalidate every type."""
    overrides: dict[str, dict] = {}
    seen: set[str] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {line_no}: expected 'key = value', got {raw!r}")
        key, _, value_text = line.partition("=")
        key = key.strip()
        value_text = value_text.strip()
        if key not in KEYS:
            raise ValidationError(f"line {line_no}: unknown config key {key!r}")
        if key in seen:
            raise ValidationError(f"line {line_no}: duplicate config key {key!r}")
        seen.add(key)
        section, field, kind = KEYS[key]
        overrides.setdefault(section, {})[field] = _parse_value(key, kind, value_text, line_no)
    result = base
    for section, fields in overrides.items():
        result = replace(result, **{section: replace(getattr(result, section), **fields)})
    return result


def serialize_config(preset: Preset) -> str:
    """Canonical full-key serialization of a preset's configuration."""
    lines = [f"# flapsim configuration (preset base: {preset.name})"]
    for key, (section, field, kind) in KEYS.items():
        value = getattr(getattr(preset, section), field)
        lines.append(f"{key} = {_format_value(kind, value)}")
    return "\n".join(lines) + "\n"


def describe_defaults(preset: Preset) -> str:
    """Human-readable key table with the preset's default values."""
    rows = ["key                        default        meaning"]
    meanings = {
        "mm": "length, millimeters",
        "milli": "stiffness, mN*m/rad",
        "g": "mass, grams",
        "deg": "angle, degrees",
        "float": "SI value",
        "int": "count",
        "bool": "true/false",
        "str": "token",
        "deg_or_auto": "angle in degrees, or auto",
    }
    for key, (section, field, kind) in KEYS.items():
        value = getattr(getattr(preset, section), field)
        rows.append(f"{key:26s} {_format_value(kind, value):14s} {meanings[kind]}")
    return "\n".join(rows) + "\n"
