"""Closed equations of motion for the first and second moments.

The state is the set of normally ordered moments up to second order,
which is exact for the Gaussian dynamics generated by either drive. The
equations follow from the adjoint master equation,

    d<A>/dt = i<[H, A]> + (gamma/2) <2 c^dag A c - c^dag c A - A c^dag c> + (holder term),

evaluated for A in {c, h, c^dag c, h^dag h, c^dag h, cc, hh, ch}. Both drive
kinds are handled by one set of equations: the coherent amplitude F and the
pair amplitude K are simply zero for the drive that is switched off.
"""

from __future__ import annotations

import dataclasses
import io
import math
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .analytic import EnergyReport
from .errors import InvalidParams, NonPhysicalState, NoSteadyState, SingularSystem, StepSizeUnderflow
from .params import BatteryParams

OVERFLOW_LIMIT = 1e12
SINGULAR_CONDITION = 1e14
D_NONPHYSICAL = 1e-6

_FIELDS = ("m_c", "m_h", "n_c", "n_h", "u_ch", "s_cc", "s_hh", "s_ch")
_REAL_FIELDS = ("n_c", "n_h")


@dataclasses.dataclass(frozen=True)
class MomentState:
    """Moments <c>, <h>, <c^dag c>, <h^dag h>, <c^dag h>, <cc>, <hh>, <ch>."""

    m_c: complex = 0j
    m_h: complex = 0j
    n_c: float = 0.0
    n_h: float = 0.0
    u_ch: complex = 0j
    s_cc: complex = 0j
    s_hh: complex = 0j
    s_ch: complex = 0j
    t: float = 0.0

    @classmethod
    def vacuum(cls, t: float = 0.0) -> "MomentState":
        return cls(t=t)

    def to_vector(self) -> np.ndarray:
        out = []
        for name in _FIELDS:
            v = getattr(self, name)
            if name in _REAL_FIELDS:
                out.append(float(np.real(v)))
            else:
                out.extend((v.real, v.imag))
        return np.array(out, dtype=float)

    @classmethod
    def from_vector(cls, x: np.ndarray, t: float = 0.0) -> "MomentState":
        x = np.asarray(x, dtype=float)
        return cls(
            m_c=complex(x[0], x[1]),
            m_h=complex(x[2], x[3]),
            n_c=float(x[4]),
            n_h=float(x[5]),
            u_ch=complex(x[6], x[7]),
            s_cc=complex(x[8], x[9]),
            s_hh=complex(x[10], x[11]),
            s_ch=complex(x[12], x[13]),
            t=t,
        )

    def fields(self) -> dict:
        return {name: getattr(self, name) for name in _FIELDS}


VECTOR_SIZE = 14


def moment_rhs(state: MomentState, p: BatteryParams) -> MomentState:
    """Time derivative of every moment, in the frame rotating at the drive frequency."""
    D, g, ga, gh = p.delta, p.g, p.gamma, p.gamma_h
    F, K = p.linear_source, p.pair_source
    mc, mh, nc, nh = state.m_c, state.m_h, state.n_c, state.n_h
    u, scc, shh, sch = state.u_ch, state.s_cc, state.s_hh, state.s_ch
    Fc, Kc = F.conjugate(), K.conjugate()
    mix = (ga + gh) / 2

    d_mc = -1j * (D * mc + g * mh + F + K * mc.conjugate()) - ga / 2 * mc
    d_mh = -1j * (D * mh + g * mc) - gh / 2 * mh
    # i g (u* - u) = 2 g Im u and i (z - z*) = -2 Im z
    d_nc = 2 * g * u.imag - 2 * (Fc * mc).imag - 2 * (Kc * scc).imag - ga * nc
    d_nh = -2 * g * u.imag - gh * nh
    d_u = 1j * g * (nh - nc) + 1j * Fc * mh + 1j * Kc * sch - mix * u
    d_scc = -1j * (2 * D * scc + 2 * g * sch + 2 * F * mc + K * (2 * nc + 1)) - ga * scc
    d_shh = -1j * (2 * D * shh + 2 * g * sch) - gh * shh
    d_sch = -1j * (2 * D * sch + g * (shh + scc) + F * mh + K * u) - mix * sch
    return MomentState(d_mc, d_mh, float(d_nc), float(d_nh), d_u, d_scc, d_shh, d_sch, state.t)


def drift_system(p: BatteryParams) -> tuple:
    """Affine form x' = A x + b of the moment equations on the 14 real components."""
    zero = MomentState()
    b = moment_rhs(zero, p).to_vector()
    cols = []
    for e in np.eye(VECTOR_SIZE):
        cols.append(moment_rhs(MomentState.from_vector(e), p).to_vector() - b)
    return np.column_stack(cols), b


def first_moment_drift(p: BatteryParams) -> np.ndarray:
    """Complex 2x2 matrix generating (<c>, <h>) for the linear drive, drive term removed."""
    src = moment_rhs(MomentState(), p)
    cols = []
    for mc, mh in ((1 + 0j, 0j), (0j, 1 + 0j)):
        d = moment_rhs(MomentState(m_c=mc, m_h=mh), p)
        cols.append([d.m_c - src.m_c, d.m_h - src.m_h])
    return np.array(cols).T


def max_growth_rate(p: BatteryParams) -> float:
    """Largest real part among the eigenvalues of the full moment drift matrix."""
    A, _ = drift_system(p)
    return float(np.linalg.eigvals(A).real.max())


@dataclasses.dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray  # shape (len(t), 14)
    params: BatteryParams
    diverged: bool = False

    def __len__(self):
        return len(self.t)

    def state(self, i: int) -> MomentState:
        return MomentState.from_vector(self.states[i], float(self.t[i]))

    def __iter__(self):
        return (self.state(i) for i in range(len(self)))


def integrate(
    p: BatteryParams,
    t_end: float,
    tol: float = 1e-10,
    t_eval: Sequence[float] | None = None,
    initial: MomentState | None = None,
) -> Trajectory:
    """Integrate the moment equations from the vacuum (or ``initial``).

    Uses an adaptive embedded Runge-Kutta method with relative tolerance
    ``tol``. Diverging runs stop once the charger occupation passes 1e12 and
    the trajectory is returned with ``diverged`` set.
    """
    if t_end <= 0:
        raise InvalidParams("t_end must be > 0")
    if not 1e-12 <= tol <= 1e-4:
        raise InvalidParams("tol must lie in [1e-12, 1e-4]")
    A, b = drift_system(p)
    x0 = (initial or MomentState()).to_vector()
    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, 201)
    t_eval = np.asarray(t_eval, dtype=float)

    def overflow(t, x):
        return abs(x[4]) - OVERFLOW_LIMIT

    overflow.terminal = True

    sol = solve_ivp(
        lambda t, x: A @ x + b,
        (0.0, t_end),
        x0,
        method="DOP853",
        t_eval=t_eval,
        rtol=tol,
        atol=tol * 1e-2,
        events=overflow,
    )
    if sol.status == -1:
        raise StepSizeUnderflow(sol.message)
    diverged = sol.status == 1
    return Trajectory(sol.t, sol.y.T.copy(), p, diverged)


def steady_state_moments(p: BatteryParams) -> MomentState:
    """Gaussian fixed point of the moment equations via a direct linear solve."""
    A, b = drift_system(p)
    if np.linalg.cond(A) > SINGULAR_CONDITION:
        raise SingularSystem("moment drift matrix is singular (exact criticality?)")
    if np.linalg.eigvals(A).real.max() >= 0:
        raise NoSteadyState("moment dynamics have a non-decaying mode")
    x = np.linalg.solve(A, -b)
    return MomentState.from_vector(x, math.inf)


def gaussian_d(m: MomentState) -> float:
    centred_n = m.n_h - abs(m.m_h) ** 2
    centred_s = m.s_hh - m.m_h**2
    return (1 + 2 * centred_n) ** 2 - 4 * abs(centred_s) ** 2


def energy_report_from_moments(m: MomentState, omega_b: float = 1.0) -> EnergyReport:
    d = gaussian_d(m)
    if d < 1.0 - D_NONPHYSICAL:
        raise NonPhysicalState(f"D = {d!r} below 1; moments are not a physical Gaussian state")
    d = max(d, 1.0)
    return EnergyReport.from_holder(m.n_h, d, omega_b)


@dataclasses.dataclass(frozen=True)
class QuadratureReport:
    var_x: float
    var_p: float
    uncertainty_product: float
    squeezed: bool


def quadrature_variances(m: MomentState, theta: float = 0.0) -> QuadratureReport:
    """Variances of the holder quadratures rotated by half the drive phase."""
    centred_n = m.n_h - abs(m.m_h) ** 2
    rotated = (np.exp(-1j * theta) * (m.s_hh - m.m_h**2)).real
    var_x = 0.5 + centred_n + rotated
    var_p = 0.5 + centred_n - rotated
    product = math.sqrt(max(var_x, 0.0) * max(var_p, 0.0))
    return QuadratureReport(var_x, var_p, product, min(var_x, var_p) < 0.5)


@dataclasses.dataclass
class PowerSeries:
    t: np.ndarray
    power: np.ndarray

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.power))

    @property
    def t_peak(self) -> float:
        return float(self.t[self.argmax])

    @property
    def peak(self) -> float:
        return float(self.power[self.argmax])


def ergotropy_series(traj: Trajectory, omega_b: float = 1.0) -> np.ndarray:
    return np.array([energy_report_from_moments(s, omega_b).ergotropy for s in traj])


def charging_power(traj: Trajectory, omega_b: float = 1.0) -> PowerSeries:
    """Average charging power ergotropy/t at every sample with t > 0."""
    keep = traj.t > 0
    erg = ergotropy_series(traj, omega_b)
    return PowerSeries(traj.t[keep], erg[keep] / traj.t[keep])


TRAJECTORY_COLUMNS = (
    "t",
    "m_c_re", "m_c_im", "m_h_re", "m_h_im",
    "n_c", "n_h",
    "u_ch_re", "u_ch_im", "s_cc_re", "s_cc_im", "s_hh_re", "s_hh_im", "s_ch_re", "s_ch_im",
    "e_holder", "e_passive", "ergotropy", "d_value",
    "var_x", "var_p", "power",
)  # fmt: skip


def trajectory_rows(traj: Trajectory, omega_b: float = 1.0):
    theta = traj.params.theta
    for i, s in enumerate(traj):
        rep = energy_report_from_moments(s, omega_b)
        quad = quadrature_variances(s, theta)
        t = float(traj.t[i])
        power = rep.ergotropy / t if t > 0 else 0.0
        yield [t, *traj.states[i], rep.e_holder, rep.e_passive, rep.ergotropy, rep.d_value,
               quad.var_x, quad.var_p, power]  # fmt: skip


def trajectory_csv(traj: Trajectory, omega_b: float = 1.0) -> str:
    """CSV text for a trajectory; columns as in TRAJECTORY_COLUMNS."""
    from .fmt import format_float

    buf = io.StringIO()
    buf.write(",".join(TRAJECTORY_COLUMNS) + "\n")
    for row in trajectory_rows(traj, omega_b):
        buf.write(",".join(format_float(v) for v in row) + "\n")
    return buf.getvalue()
