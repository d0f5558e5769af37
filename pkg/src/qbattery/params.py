"""Physical parameters of the charger-holder battery.

All rates and frequencies are in units of the charger decay rate (gamma = 1
by convention). ``omega_b`` only enters as the energy prefactor of reported
energies; the dynamics live in the frame rotating at the drive frequency.
"""

from __future__ import annotations

import dataclasses
import enum
import math

from .errors import InvalidParams


class DriveKind(str, enum.Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"


@dataclasses.dataclass(frozen=True)
class BatteryParams:
    delta: float = 0.0
    g: float = 1.0
    gamma: float = 1.0
    omega_drive_amp: float = 0.0
    theta: float = 0.0
    drive_kind: DriveKind = DriveKind.LINEAR
    gamma_h: float = 0.0
    omega_b: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "drive_kind", DriveKind(self.drive_kind))
        for name in ("delta", "g", "gamma", "omega_drive_amp", "theta", "gamma_h", "omega_b"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParams(f"{name} must be finite, got {value!r}")
        for name in ("g", "gamma", "gamma_h", "omega_drive_amp"):
            if getattr(self, name) < 0:
                raise InvalidParams(f"{name} must be >= 0, got {getattr(self, name)!r}")
        if self.omega_b <= 0:
            raise InvalidParams(f"omega_b must be > 0, got {self.omega_b!r}")

    @property
    def omega(self) -> float:
        """Short alias for the drive amplitude."""
        return self.omega_drive_amp

    @property
    def drive_phasor(self) -> complex:
        return self.omega_drive_amp * complex(math.cos(self.theta), math.sin(self.theta))

    @property
    def linear_source(self) -> complex:
        """Coherent drive amplitude acting on the charger (zero for quadratic drive)."""
        return self.drive_phasor if self.drive_kind is DriveKind.LINEAR else 0j

    @property
    def pair_source(self) -> complex:
        """Two-photon drive amplitude acting on the charger (zero for linear drive)."""
        return self.drive_phasor if self.drive_kind is DriveKind.QUADRATIC else 0j

    @property
    def rwa_advisory(self) -> bool:
        """True when the coupling is strong enough that dropping counter-rotating terms is doubtful."""
        return self.g > self.omega_b / 1000.0

    def replace(self, **changes) -> "BatteryParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["drive_kind"] = self.drive_kind.value
        return d
