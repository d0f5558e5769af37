"""Charger-holder quantum battery: closed forms, moment dynamics and a Fock-space oracle."""

from .errors import *  # noqa: F401,F403
from .params import BatteryParams, DriveKind

__all__ = ["BatteryParams", "DriveKind"]
__version__ = "0.1.0"
