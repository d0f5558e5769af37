"""Closed-form results for the linearly and quadratically driven battery.

Every function here is a pure evaluator of a closed-form expression. They are
checked elsewhere against the moment equations and the truncated Fock-space
solver, never against each other.
"""

from __future__ import annotations

import cmath
import dataclasses
import enum
import math

import numpy as np

from .errors import (
    DegenerateDivision,
    InvalidParams,
    NonPhysicalState,
    NoSteadyState,
    UnsupportedDetuning,
)
from .params import BatteryParams, DriveKind

#: Hamiltonian phase-diagram constant, the point where two stability boundaries meet.
XI = math.sqrt(math.sqrt(5.0) - 2.0)

#: Detuning-to-coupling ratio where the two critical amplitudes swap roles.
CRITICAL_RATIO = 1.0 / math.sqrt(3.0)

EP_REL_TOL = 1e-12
D_CLAMP = 1e-9


def heaviside(x: float) -> float:
    return 1.0 if x >= 0 else 0.0


class Regime(str, enum.Enum):
    BELOW_EP = "below_ep"
    AT_EP = "at_ep"
    ABOVE_EP = "above_ep"


@dataclasses.dataclass(frozen=True)
class LinearSpectrum:
    eps_plus: complex
    eps_minus: complex
    big_g: float  # nan below the exceptional point
    big_gamma: float  # nan above it
    g_ep: float
    regime: Regime


@dataclasses.dataclass(frozen=True)
class EnergyReport:
    e_holder: float
    e_passive: float
    ergotropy: float
    d_value: float

    @classmethod
    def from_holder(cls, n_h: float, d_value: float, omega_b: float) -> "EnergyReport":
        """Assemble energies from the holder occupation and the Gaussian D."""
        e_holder = omega_b * n_h
        e_passive = omega_b * (math.sqrt(d_value) - 1.0) / 2.0
        return cls(e_holder, e_passive, e_holder - e_passive, d_value)

    @classmethod
    def pure(cls, e_holder: float) -> "EnergyReport":
        return cls(e_holder, 0.0, e_holder, 1.0)


@dataclasses.dataclass(frozen=True)
class BogoliubovSpectrum:
    omega_plus: complex
    omega_minus: complex
    mu_plus: float
    mu_minus: float
    nu_plus: float
    nu_minus: float
    # per-mode flag, False when the hyperbolic angles do not exist
    coeff_defined: tuple
    stable: bool
    xi: float = XI


@dataclasses.dataclass(frozen=True)
class HamiltonianStability:
    stable: bool
    boundary_1: float
    boundary_2: float
    boundary_3: float


def _require(p: BatteryParams, kind: DriveKind):
    if p.drive_kind is not kind:
        raise InvalidParams(f"expected {kind.value} drive, got {p.drive_kind.value}")


def _require_lossless_holder(p: BatteryParams):
    if p.gamma_h != 0:
        raise InvalidParams("closed forms assume a lossless holder (gamma_h = 0)")


# --------------------------------------------------------------------------
# linear drive
# --------------------------------------------------------------------------


def classify_linear_regime(p: BatteryParams) -> LinearSpectrum:
    """Eigenvalues of the first-moment dynamical matrix and the exceptional-point regime.

    With holder loss the same construction applies with the charger and
    holder decay rates entering through their mean and half-difference.
    """
    _require(p, DriveKind.LINEAR)
    if p.gamma <= 0:
        raise InvalidParams("gamma must be > 0 to classify the regime")
    kappa = abs(p.gamma - p.gamma_h) / 4.0
    damping = (p.gamma + p.gamma_h) / 4.0
    g_ep = kappa
    if abs(p.g - g_ep) <= EP_REL_TOL * p.gamma:
        eps = complex(p.delta, -damping)
        return LinearSpectrum(eps, eps, 0.0, 0.0, g_ep, Regime.AT_EP)
    root = cmath.sqrt(p.g**2 - kappa**2)
    eps_plus = p.delta + root - 1j * damping
    eps_minus = p.delta - root - 1j * damping
    if p.g > g_ep:
        return LinearSpectrum(eps_plus, eps_minus, root.real, math.nan, g_ep, Regime.ABOVE_EP)
    return LinearSpectrum(eps_plus, eps_minus, math.nan, root.imag, g_ep, Regime.BELOW_EP)


def linear_steady_energy(delta: float, g: float, gamma: float, omega: float) -> float:
    """Steady holder occupation under coherent driving (energy in units of omega_b)."""
    den = (delta**2 - g**2) ** 2 + (gamma * delta / 2.0) ** 2
    if np.any(den == 0):
        raise DegenerateDivision("steady-state energy has a pole at delta = g = 0")
    return (g * omega) ** 2 / den


def linear_steady_ergotropy(p: BatteryParams) -> EnergyReport:
    _require(p, DriveKind.LINEAR)
    _require_lossless_holder(p)
    if p.gamma <= 0:
        raise InvalidParams("steady state requires gamma > 0")
    e = p.omega_b * linear_steady_energy(p.delta, p.g, p.gamma, p.omega)
    return EnergyReport.pure(e)


def linear_optimal_detuning(g: float, gamma: float) -> float:
    """Detuning that maximises the steady-state ergotropy."""
    if g < 0 or gamma <= 0:
        raise InvalidParams("need g >= 0 and gamma > 0")
    threshold = gamma / (2.0 * math.sqrt(2.0))
    if heaviside(g - threshold) == 0.0:
        return 0.0
    return math.sqrt(max(g**2 - threshold**2, 0.0))


def linear_max_steady_ergotropy(p: BatteryParams) -> float:
    if p.gamma <= 0 or p.g <= 0:
        raise InvalidParams("need gamma > 0 and g > 0")
    threshold = p.gamma / (2.0 * math.sqrt(2.0))
    if p.g <= threshold:
        return p.omega_b * (p.omega / p.g) ** 2
    return p.omega_b * (p.omega / p.gamma) ** 2 * (4 * p.g) ** 2 / ((2 * p.g) ** 2 - (p.gamma / 2) ** 2)


def linear_ergotropy_at(p: BatteryParams, t: float) -> EnergyReport:
    """Time-dependent ergotropy at zero detuning, starting from the vacuum.

    Dispatches on the exceptional-point regime: hyperbolic below, algebraic
    at, trigonometric above. A lossless charger uses the undamped formula.
    """
    _require(p, DriveKind.LINEAR)
    _require_lossless_holder(p)
    if p.delta != 0:
        raise UnsupportedDetuning("closed-form dynamics exist only for delta = 0")
    if t < 0:
        raise InvalidParams("t must be >= 0")
    if p.g == 0:
        # the holder never couples to the drive
        return EnergyReport.pure(0.0)
    om, g, gam = p.omega, p.g, p.gamma
    if gam == 0:
        e = (2 * om / g) ** 2 * math.sin(g * t / 2) ** 4
        return EnergyReport.pure(p.omega_b * e)
    spec = classify_linear_regime(p)
    decay = math.exp(-gam * t / 4)
    if spec.regime is Regime.AT_EP:
        e = (4 * om / gam) ** 2 * (1 - (1 + gam * t / 4) * decay) ** 2
    elif spec.regime is Regime.BELOW_EP:
        rate = spec.big_gamma
        # (cosh + k sinh) e^{-gamma t/4} split into two decaying exponentials
        k = gam / (4 * rate)
        damped = 0.5 * ((1 + k) * math.exp((rate - gam / 4) * t) + (1 - k) * math.exp(-(rate + gam / 4) * t))
        e = (om / g) ** 2 * (1 - damped) ** 2
    else:
        freq = spec.big_g
        bracket = math.cos(freq * t) + gam / (4 * freq) * math.sin(freq * t)
        e = (om / g) ** 2 * (1 - bracket * decay) ** 2
    return EnergyReport.pure(p.omega_b * e)


def linear_weak_coupling_ergotropy(p: BatteryParams, t: float) -> float:
    """Approximate ergotropy for g much smaller than gamma (zero detuning)."""
    spec = classify_linear_regime(p)
    rate = p.gamma / 4 - spec.big_gamma
    return p.omega_b * (p.omega / p.g) ** 2 * (1 - math.exp(-rate * t)) ** 2


def linear_strong_coupling_ergotropy(p: BatteryParams, t: float) -> float:
    """Approximate ergotropy for g much larger than gamma (zero detuning)."""
    return p.omega_b * (p.omega / p.g) ** 2 * (1 - math.cos(p.g * t) * math.exp(-p.gamma * t / 4)) ** 2


# --------------------------------------------------------------------------
# quadratic drive: Hamiltonian picture
# --------------------------------------------------------------------------


def _bogoliubov_squares(delta, g, omega):
    inner = omega**2 * (omega**2 / 4 - g**2) + 4 * g**2 * delta**2
    base = delta**2 + g**2 - omega**2 / 2
    return inner, base


def _hyperbolic_angle(num, den):
    if den == 0:
        return math.nan
    x = num / den
    if abs(x) >= 1:
        return math.nan
    return math.atanh(x)


def bogoliubov_spectrum(p: BatteryParams) -> BogoliubovSpectrum:
    _require(p, DriveKind.QUADRATIC)
    delta, g, om = p.delta, p.g, p.omega
    inner, base = _bogoliubov_squares(delta, g, om)
    root = cmath.sqrt(inner)
    w_plus = cmath.sqrt(base + root)
    w_minus = cmath.sqrt(base - root)
    # exact realness test, no tolerance on imaginary parts
    plus_real = inner >= 0 and base + math.sqrt(inner) >= 0
    minus_real = inner >= 0 and base - math.sqrt(inner) >= 0
    stable = plus_real and minus_real
    mus, nus, flags = [], [], []
    for w, real in ((w_plus, plus_real), (w_minus, minus_real)):
        if not real:
            mus.append(math.nan)
            nus.append(math.nan)
            flags.append(False)
            continue
        wr = w.real
        den = (delta + wr) ** 2 - g**2
        mu = _hyperbolic_angle(om * (delta + wr), den)
        nu = _hyperbolic_angle(om * (delta - wr), den)
        mus.append(mu)
        nus.append(nu)
        flags.append(not (math.isnan(mu) or math.isnan(nu)))
    return BogoliubovSpectrum(w_plus, w_minus, mus[0], mus[1], nus[0], nus[1], tuple(flags), stable)


def hamiltonian_boundaries(ratio: float, g: float) -> tuple:
    """The three drive amplitudes bounding the real-frequency region at |delta|/g = ratio."""
    if ratio >= XI:
        b1 = g * abs(ratio - 1.0 / ratio)
    else:
        b1 = 0.0
    if ratio <= 0.5:
        s_plus, s_minus = math.sqrt(1 + 2 * ratio), math.sqrt(1 - 2 * ratio)
        b2 = g * (s_plus - s_minus)
        b3 = g * (s_plus + s_minus) if ratio >= XI else 0.0
    else:
        b2 = b3 = 0.0
    return b1, b2, b3


def hamiltonian_stability(p: BatteryParams) -> HamiltonianStability:
    """Locate (delta, omega) relative to the boundary curves of the Hamiltonian phase diagram."""
    _require(p, DriveKind.QUADRATIC)
    if p.g <= 0:
        raise InvalidParams("g must be > 0")
    ratio = abs(p.delta) / p.g
    b1, b2, b3 = hamiltonian_boundaries(ratio, p.g)
    om = p.omega
    if ratio < XI:
        stable = om <= b2
    elif ratio <= 0.5:
        stable = om <= b2 or b3 <= om <= b1
    else:
        stable = om <= b1
    return HamiltonianStability(stable, b1, b2, b3)


# --------------------------------------------------------------------------
# quadratic drive: dissipative steady state
# --------------------------------------------------------------------------


def critical_amplitudes(p: BatteryParams) -> tuple:
    _require(p, DriveKind.QUADRATIC)
    q = (p.gamma / 2) ** 2
    c1 = math.hypot(p.gamma / 2, 2 * p.delta)
    if p.delta == 0:
        c2 = math.inf if p.g > 0 else math.sqrt(q)
    else:
        c2 = math.hypot(p.gamma / 2, p.delta - p.g**2 / p.delta)
    return c1, c2


def critical_amplitude(p: BatteryParams) -> float:
    """The amplitude at which the steady state is lost for the given detuning and coupling."""
    c1, c2 = critical_amplitudes(p)
    if p.g == 0:
        ratio = 0.0 if p.delta == 0 else math.inf
    else:
        ratio = abs(p.delta) / p.g
    return c1 if ratio <= CRITICAL_RATIO else c2


def liouvillian_stable(p: BatteryParams) -> bool:
    _require(p, DriveKind.QUADRATIC)
    return p.omega < critical_amplitude(p)


def _check_steady(p: BatteryParams):
    _require(p, DriveKind.QUADRATIC)
    _require_lossless_holder(p)
    if p.gamma <= 0:
        raise NoSteadyState("a lossless charger has no steady state")
    if not liouvillian_stable(p):
        raise NoSteadyState(
            f"omega = {p.omega} is not below the critical amplitude {critical_amplitude(p)}"
        )


def quadratic_steady_energy(p: BatteryParams) -> float:
    _check_steady(p)
    d2, g2, om2 = p.delta**2, p.g**2, p.omega**2
    q = (p.gamma / 2) ** 2
    first = om2 / (4 * d2 + q - om2)
    num = d2**2 + g2**2 / 2 - d2 * (g2 / 2 + om2 - q)
    den = d2**2 + g2**2 - d2 * (2 * g2 + om2 - q)
    if den == 0:
        raise DegenerateDivision("holder energy is 0/0 at delta = g = 0")
    return p.omega_b * first * num / den


def quadratic_steady_D(p: BatteryParams) -> float:
    _check_steady(p)
    d2, g2, om2 = p.delta**2, p.g**2, p.omega**2
    q = (p.gamma / 2) ** 2
    a = 4 * d2 + q
    num = (
        a**2 * ((d2 - g2) ** 2 + d2 * q)
        - om2 * a * (2 * d2**2 + g2**2 - d2 * (2 * g2 + q))
        - d2 * om2**2 * (7 * d2 - 4 * g2 + q)
        - d2 * om2**3
    )
    den = (a - om2) ** 2 * (d2**2 - d2 * (2 * g2 + om2 - q) + g2**2)
    if den == 0:
        raise DegenerateDivision("D is 0/0 at delta = g = 0")
    d = num / den
    if d < 1.0:
        if d < 1.0 - D_CLAMP:
            raise NonPhysicalState(f"D = {d!r} < 1")
        d = 1.0
    return d


def quadratic_steady_ergotropy(p: BatteryParams) -> EnergyReport:
    e_h = quadratic_steady_energy(p)
    d = quadratic_steady_D(p)
    return EnergyReport.from_holder(e_h / p.omega_b, d, p.omega_b)


def quadratic_steady_energy_zero_detuning(gamma: float, omega: float, omega_b: float = 1.0) -> float:
    q = (gamma / 2) ** 2
    return omega_b / 2 * omega**2 / (q - omega**2)


def quadratic_steady_energy_weak_coupling(delta: float, gamma: float, omega: float, omega_b: float = 1.0) -> float:
    q = (gamma / 2) ** 2
    return omega_b * omega**2 / ((2 * delta) ** 2 + q - omega**2)


def quadratic_steady_ergotropy_zero_detuning(gamma: float, omega: float, omega_b: float = 1.0) -> float:
    q = (gamma / 2) ** 2
    ratio = q / (q - omega**2)
    return omega_b / 2 * (ratio - math.sqrt(ratio))
