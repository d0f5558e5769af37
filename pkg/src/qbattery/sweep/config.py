"""Sweep configuration: the line-oriented config format and its validation.

A config is a sequence of ``key = value`` lines grouped by ``[section]``
headers. Lines before the first header belong to the top-level section::

    recipe = Fig4c
    tiers = Analytic, Moments

    [params]
    delta = 0.25

    [axis1]
    count = 50

Sections:

* top level: ``recipe``, ``tiers``, ``output``
* ``[params]``: any BatteryParams field (``omega`` is an alias of ``omega_drive_amp``)
* ``[axis1]``, ``[axis2]``: ``name``, ``min``, ``max``, ``count``, ``scale`` or ``values``
* ``[fock]``: ``n`` (both modes), ``n_c``, ``n_h``, ``rwa``

Recipe presets are expanded first and then overridden key by key.
"""

from __future__ import annotations

import dataclasses
import math
import re

import numpy as np

from ..errors import InvalidParams, ParseError, ValidationError
from ..fock import FockConfig
from ..params import BatteryParams, DriveKind
from .recipes import PRESETS, Recipe, Tier

PARAM_KEYS = ("delta", "g", "gamma", "gamma_h", "omega_drive_amp", "theta", "drive_kind", "omega_b")
PARAM_ALIASES = {"omega": "omega_drive_amp"}
AXIS_NAMES = ("delta", "g", "gamma", "gamma_h", "omega", "theta", "omega_b", "t", "n")
AXIS_KEYS = ("name", "min", "max", "count", "scale", "values")
FOCK_KEYS = ("n", "n_c", "n_h", "rwa")
TOP_KEYS = ("recipe", "tiers", "output")
SECTIONS = ("sweep", "params", "axis1", "axis2", "fock")
MAX_COUNT = 2000

_SECTION = re.compile(r"^\[\s*([A-Za-z0-9_]+)\s*\]$")


@dataclasses.dataclass(frozen=True)
class Axis:
    name: str
    values: tuple

    @property
    def count(self) -> int:
        return len(self.values)

    def as_dict(self) -> dict:
        return {"name": self.name, "values": list(self.values)}


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    recipe: Recipe
    params: BatteryParams
    axes: tuple
    tiers: tuple
    fock: FockConfig | None = None
    output_path: str | None = None

    @property
    def axis_names(self) -> tuple:
        return tuple(a.name for a in self.axes)

    @property
    def masked(self) -> bool:
        """Liouvillian-stability masking applies to quadratic steady-state sweeps."""
        return self.params.drive_kind is DriveKind.QUADRATIC and "t" not in self.axis_names

    def as_dict(self) -> dict:
        return {
            "recipe": self.recipe.value,
            "params": self.params.as_dict(),
            "axes": [a.as_dict() for a in self.axes],
            "tiers": [t.value for t in self.tiers],
            "fock": None if self.fock is None else dataclasses.asdict(self.fock),
        }


def _tokenize(text: str) -> dict:
    """Split into {section: {key: (value, line)}}, rejecting malformed lines."""
    out = {"sweep": {}}
    section = "sweep"
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            section = m.group(1).lower()
            if section not in SECTIONS:
                raise ParseError(f"unknown section [{section}]", lineno)
            if section in out and out[section]:
                raise ParseError(f"section [{section}] repeated", lineno)
            out.setdefault(section, {})
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ParseError("empty key", lineno)
        key = key.lower()
        sect = out[section]
        if key in sect:
            raise ParseError(f"duplicate key {key!r}", lineno)
        sect[key] = (value, lineno)
    return out


def _number(value: str, key: str, lineno: int) -> float:
    try:
        x = float(value)
    except ValueError:
        raise ParseError(f"{key}: expected a number, got {value!r}", lineno) from None
    return x


def _integer(value: str, key: str, lineno: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"{key}: expected an integer, got {value!r}", lineno) from None


def _boolean(value: str, key: str, lineno: int) -> bool:
    v = value.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ParseError(f"{key}: expected a boolean, got {value!r}", lineno)


def _check_keys(section: str, entries: dict, allowed) -> None:
    for key, (_, lineno) in entries.items():
        if key not in allowed:
            raise ParseError(f"unknown key {key!r} in [{section}]", lineno)


def _axis_values(ax: dict) -> tuple:
    name = ax.get("name")
    if name is None:
        raise ValidationError("axis needs a name")
    if name not in AXIS_NAMES:
        raise ValidationError(f"axis name must be one of {AXIS_NAMES}, got {name!r}")
    if ax.get("values") is not None:
        values = tuple(float(v) for v in ax["values"])
        if not 2 <= len(values) <= MAX_COUNT:
            raise ValidationError(f"axis {name}: count in [2, {MAX_COUNT}] violated (got {len(values)})")
    else:
        for key in ("min", "max", "count"):
            if ax.get(key) is None:
                raise ValidationError(f"axis {name}: missing {key}")
        lo, hi, count = float(ax["min"]), float(ax["max"]), int(ax["count"])
        if not 2 <= count <= MAX_COUNT:
            raise ValidationError(f"axis {name}: count in [2, {MAX_COUNT}] violated (got {count})")
        if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
            raise ValidationError(f"axis {name}: min <= max violated")
        scale = ax.get("scale", "linear")
        if scale == "linear":
            values = tuple(float(v) for v in np.linspace(lo, hi, count))
        elif scale == "log":
            if lo <= 0:
                raise ValidationError(f"axis {name}: log scale needs min > 0")
            values = tuple(float(v) for v in np.geomspace(lo, hi, count))
        else:
            raise ValidationError(f"axis {name}: scale in {{linear, log}} violated (got {scale!r})")
    if name == "n" and any(v != int(v) or v < 2 for v in values):
        raise ValidationError("axis n: integer truncation sizes >= 2 required")
    if name == "t" and any(v < 0 for v in values):
        raise ValidationError("axis t: t >= 0 required")
    return values


def build_spec(
    recipe: Recipe | str,
    params: dict | None = None,
    axes: list | None = None,
    tiers=None,
    fock: dict | None = None,
    output_path: str | None = None,
) -> SweepSpec:
    """Expand a preset and apply overrides; validation errors name the invariant."""
    recipe = Recipe(recipe)
    preset = PRESETS[recipe]
    merged = dict(preset.params)
    for key, value in (params or {}).items():
        merged[PARAM_ALIASES.get(key, key)] = value
    for alias, real in PARAM_ALIASES.items():
        if alias in merged:
            merged[real] = merged.pop(alias)
    try:
        bp = BatteryParams(**merged)
    except InvalidParams as exc:
        raise ValidationError(str(exc)) from exc
    except TypeError as exc:
        raise ValidationError(str(exc)) from exc
    except ValueError as exc:  # unknown drive kind
        raise ValidationError(f"drive_kind in {{linear, quadratic}} violated: {exc}") from exc

    axis_dicts = [dict(a) for a in preset.axes]
    for i, override in enumerate(axes or []):
        if override is None:
            continue
        if i < len(axis_dicts):
            base = axis_dicts[i]
            if "name" in override and override["name"] != base.get("name"):
                base = {}
            if "values" in override:
                base = {k: v for k, v in base.items() if k not in ("min", "max", "count", "scale")}
            elif any(k in override for k in ("min", "max", "count")):
                base.pop("values", None)
            base.update(override)
            axis_dicts[i] = base
        else:
            axis_dicts.append(dict(override))
    if not 1 <= len(axis_dicts) <= 2:
        raise ValidationError(f"axes count in {{1, 2}} violated (got {len(axis_dicts)})")
    built = tuple(Axis(a["name"], _axis_values(a)) for a in axis_dicts)
    if len(built) == 2 and built[0].name == built[1].name:
        raise ValidationError("the two axes must sweep different parameters")

    tier_list = preset.tiers if tiers is None else tiers
    try:
        tier_list = tuple(dict.fromkeys(Tier(t) for t in tier_list))
    except ValueError as exc:
        raise ValidationError(f"tiers must be a subset of {{Analytic, Moments, Fock}}: {exc}") from exc
    if not tier_list:
        raise ValidationError("at least one tier required")

    fock_cfg = None
    fock_opts = dict(preset.fock or {})
    fock_opts.update(fock or {})
    if Tier.FOCK in tier_list or fock_opts:
        n = int(fock_opts.get("n", 10))
        try:
            fock_cfg = FockConfig(
                int(fock_opts.get("n_c", n)), int(fock_opts.get("n_h", n)), bool(fock_opts.get("rwa", True))
            )
        except InvalidParams as exc:
            raise ValidationError(str(exc)) from exc
    return SweepSpec(recipe, bp, built, tier_list, fock_cfg, output_path)


def parse_config(text: str) -> SweepSpec:
    sections = _tokenize(text)
    top = sections.get("sweep", {})
    _check_keys("sweep", top, TOP_KEYS)
    if "recipe" in top:
        value, lineno = top["recipe"]
        try:
            recipe = Recipe(value)
        except ValueError:
            raise ParseError(f"unknown recipe {value!r}", lineno) from None
    else:
        recipe = Recipe.CUSTOM

    params = {}
    entries = sections.get("params", {})
    _check_keys("params", entries, PARAM_KEYS + tuple(PARAM_ALIASES))
    for key, (value, lineno) in entries.items():
        params[key] = value if key == "drive_kind" else _number(value, key, lineno)

    axes = []
    for name in ("axis1", "axis2"):
        if name not in sections:
            axes.append(None)
            continue
        entries = sections[name]
        _check_keys(name, entries, AXIS_KEYS)
        ax = {}
        for key, (value, lineno) in entries.items():
            if key in ("name", "scale"):
                ax[key] = value.lower() if key == "scale" else value
            elif key == "count":
                ax[key] = _integer(value, key, lineno)
            elif key == "values":
                ax[key] = tuple(_number(v.strip(), key, lineno) for v in value.split(",") if v.strip())
            else:
                ax[key] = _number(value, key, lineno)
        axes.append(ax)
    if axes[0] is None and axes[1] is not None:
        raise ValidationError("[axis2] given without [axis1]")

    fock = {}
    entries = sections.get("fock", {})
    _check_keys("fock", entries, FOCK_KEYS)
    for key, (value, lineno) in entries.items():
        fock[key] = _boolean(value, key, lineno) if key == "rwa" else _integer(value, key, lineno)

    tiers = None
    if "tiers" in top:
        value, lineno = top["tiers"]
        names = [v.strip() for v in value.split(",") if v.strip()]
        try:
            tiers = [Tier(v.capitalize()) for v in names]
        except ValueError:
            raise ParseError(f"unknown tier in {value!r}", lineno) from None
    output = top["output"][0] if "output" in top else None
    return build_spec(recipe, params, axes, tiers, fock, output)
