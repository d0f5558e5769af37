"""Figure presets: baseline parameters, axes and tiers for each reproduced panel."""

from __future__ import annotations

import dataclasses
import enum
import math


class Recipe(str, enum.Enum):
    FIG1B = "Fig1b"
    FIG1C = "Fig1c"
    FIG1D = "Fig1d"
    FIG1E = "Fig1e"
    FIG2AB = "Fig2ab"
    FIG2CD = "Fig2cd"
    FIG3BC = "Fig3bc"
    FIG4A = "Fig4a"
    FIG4B = "Fig4b"
    FIG4C = "Fig4c"
    FIG5A = "Fig5a"
    FIG5B = "Fig5b"
    FIG5C = "Fig5c"
    FIG5D = "Fig5d"
    FIG5E = "Fig5e"
    CUSTOM = "Custom"


class Tier(str, enum.Enum):
    ANALYTIC = "Analytic"
    MOMENTS = "Moments"
    FOCK = "Fock"


@dataclasses.dataclass(frozen=True)
class Preset:
    provenance: str
    params: dict
    axes: tuple  # of dicts with name/min/max/count/scale or name/values
    tiers: tuple
    fock: dict | None = None


OMEGA_C1_FIG = math.sqrt(5.0) / 2.0  # first critical amplitude at delta = 1/2, g = 1

_QUAD = {"drive_kind": "quadratic", "delta": 0.5, "g": 1.0, "gamma": 1.0}
_A, _M, _F = Tier.ANALYTIC, Tier.MOMENTS, Tier.FOCK

PRESETS: dict = {
    Recipe.FIG1B: Preset(
        "steady-state ergotropy of the coherently driven battery over (delta, omega), g = gamma",
        {"drive_kind": "linear", "g": 1.0},
        ({"name": "delta", "min": -2.0, "max": 2.0, "count": 101},
         {"name": "omega", "min": 0.0, "max": 1.0, "count": 51}),
        (_A, _M),
    ),
    Recipe.FIG1C: Preset(
        "as Fig1b with g = gamma / (2 sqrt 2), the optimal-detuning threshold",
        {"drive_kind": "linear", "g": 1.0 / (2.0 * math.sqrt(2.0))},
        ({"name": "delta", "min": -2.0, "max": 2.0, "count": 101},
         {"name": "omega", "min": 0.0, "max": 1.0, "count": 51}),
        (_A, _M),
    ),
    Recipe.FIG1D: Preset(
        "detuning of the steady-state ergotropy maximum versus coupling",
        {"drive_kind": "linear", "omega": 1.0},
        ({"name": "g", "min": 0.0, "max": 2.0, "count": 201},),
        (_A,),
    ),
    Recipe.FIG1E: Preset(
        "largest steady-state ergotropy versus coupling (omega = gamma)",
        {"drive_kind": "linear", "omega": 1.0},
        ({"name": "g", "min": 0.01, "max": 2.0, "count": 200},),
        (_A,),
    ),
    Recipe.FIG2AB: Preset(
        "real and imaginary parts of the first-moment eigenvalues versus coupling",
        {"drive_kind": "linear", "delta": 0.0},
        ({"name": "g", "min": 0.0, "max": 1.0, "count": 201},),
        (_A, _M),
    ),
    Recipe.FIG2CD: Preset(
        "ergotropy dynamics at zero detuning above, at and below the exceptional point",
        {"drive_kind": "linear", "delta": 0.0, "omega": 1.0},
        ({"name": "t", "min": 0.0, "max": 30.0, "count": 301},
         {"name": "g", "values": (0.05, 0.1, 0.25, 0.5, 1.0, 2.0)}),
        (_A, _M),
    ),
    Recipe.FIG3BC: Preset(
        "quadratic-drive ergotropy and power P = E/t versus time, delta = gamma/2, g = gamma",
        dict(_QUAD),
        ({"name": "t", "min": 0.01, "max": 1000.0, "count": 401, "scale": "log"},
         {"name": "omega", "values": (0.5, 0.9, 1.0, 1.1)}),
        (_M,),
    ),
    Recipe.FIG4A: Preset(
        "Hamiltonian (Bogoliubov) stability diagram over (delta, omega), g = gamma",
        {"drive_kind": "quadratic", "g": 1.0},
        ({"name": "delta", "min": 0.0, "max": 2.0, "count": 201},
         {"name": "omega", "min": 0.0, "max": 3.0, "count": 201}),
        (_A,),
    ),
    Recipe.FIG4B: Preset(
        "steady-state holder energy over (delta, omega) with the no-steady-state region masked, g = gamma",
        {"drive_kind": "quadratic", "g": 1.0},
        ({"name": "delta", "min": 0.0, "max": 2.0, "count": 101},
         {"name": "omega", "min": 0.0, "max": 3.0, "count": 101}),
        (_A, _M),
    ),
    Recipe.FIG4C: Preset(
        "steady-state energies on a log grid below the first critical amplitude, delta = gamma/2, g = gamma",
        dict(_QUAD),
        ({"name": "omega", "min": 0.01, "max": OMEGA_C1_FIG * (1 - 1e-4), "count": 200, "scale": "log"},),
        (_A, _M),
    ),
    Recipe.FIG5A: Preset(
        "steady-state holder energy of truncated oscillators versus omega for several N",
        dict(_QUAD),
        ({"name": "omega", "min": 0.0, "max": 1.5, "count": 16},
         {"name": "n", "values": (3, 5, 10, 15, 20)}),
        (_A, _F),
    ),
    Recipe.FIG5B: Preset(
        "steady-state purity of the truncated battery versus omega",
        dict(_QUAD),
        ({"name": "omega", "min": 0.0, "max": 1.5, "count": 31},),
        (_F,),
        {"n": 6},
    ),
    Recipe.FIG5C: Preset(
        "Liouvillian gap versus omega for small truncations",
        dict(_QUAD),
        ({"name": "omega", "min": 0.0, "max": 1.5, "count": 16},
         {"name": "n", "values": (3, 4, 5, 6)}),
        (_F,),
    ),
    Recipe.FIG5D: Preset(
        "steady-state negativity of the truncated battery versus omega",
        dict(_QUAD),
        ({"name": "omega", "min": 0.0, "max": 1.5, "count": 31},),
        (_F,),
        {"n": 6},
    ),
    Recipe.FIG5E: Preset(
        "steady-state holder quadrature variances and their product versus omega",
        dict(_QUAD),
        ({"name": "omega", "min": 0.0, "max": 1.1, "count": 221},),
        (_M,),
    ),
    Recipe.CUSTOM: Preset("user-defined sweep", {}, (), (_A, _M)),
}  # fmt: skip


def describe() -> list:
    """(name, provenance) pairs for every preset."""
    return [(r.value, PRESETS[r].provenance) for r in Recipe]
