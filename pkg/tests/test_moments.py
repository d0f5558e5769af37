import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import lin, quad, rel
from qbattery import analytic, fock, moments
from qbattery.errors import InvalidParams, NoSteadyState, NonPhysicalState, SingularSystem
from qbattery.moments import MomentState


def vec(state):
    return state.to_vector()


def test_vector_round_trip():
    m = MomentState(1 + 2j, -3j, 0.5, 0.25, 0.1 - 0.2j, 0.3j, -0.4, 0.7 + 0.1j)
    assert MomentState.from_vector(m.to_vector()) == m
    assert m.to_vector().shape == (moments.VECTOR_SIZE,)


def test_vacuum_fixed_point_without_drive():
    for p in (lin(delta=0.3, g=0.7), quad(delta=0.3, g=0.7)):
        assert np.all(vec(moments.moment_rhs(MomentState.vacuum(), p)) == 0)


def test_linear_drive_on_vacuum():
    p = lin(delta=0.4, g=0.7, omega_drive_amp=0.8, theta=0.6)
    d = moments.moment_rhs(MomentState.vacuum(), p)
    assert abs(d.m_c + 1j * p.drive_phasor) < 1e-15
    rest = vec(d)
    rest[:2] = 0
    assert np.all(rest == 0)


def test_quadratic_drive_on_vacuum_matches_fock_euler_step():
    p = quad(delta=0.4, g=0.7, omega_drive_amp=0.8, theta=0.6)
    d = moments.moment_rhs(MomentState.vacuum(), p)
    assert abs(d.s_cc + 1j * p.drive_phasor) < 1e-15
    rest = vec(d)
    rest[8:10] = 0
    assert np.all(rest == 0)
    # one Euler step of the master equation
    cfg = fock.FockConfig.square(8)
    L = fock.build_liouvillian(p, cfg)
    rho0 = fock.DensityState.vacuum(cfg)
    dt = 1e-6
    rho1 = rho0.rho + dt * (L @ rho0.rho.ravel()).reshape(rho0.rho.shape)
    m0 = fock.moments_from_density(rho0, cfg)
    m1 = fock.moments_from_density(fock.DensityState(rho1, cfg.dims), cfg)
    fd = (vec(m1) - vec(m0)) / dt
    assert np.allclose(fd, vec(d), atol=1e-5)


def test_drift_matrix_spectrum_linear():
    rng = np.random.default_rng(11)
    for _ in range(100):
        p = lin(delta=rng.uniform(-2, 2), g=rng.uniform(0, 2), gamma=rng.uniform(0.1, 2), omega_drive_amp=rng.uniform(0, 1))
        ev = np.linalg.eigvals(moments.first_moment_drift(p))
        s = analytic.classify_linear_regime(p)
        ref = np.array([-1j * s.eps_plus, -1j * s.eps_minus])
        assert min(np.abs(ev - ref).max(), np.abs(ev - ref[::-1]).max()) <= 1e-12


def test_lossless_oscillation():
    p = lin(g=1, gamma=0, omega_drive_amp=0.5)
    traj = moments.integrate(p, math.pi, 1e-12, t_eval=[math.pi])
    assert moments.ergotropy_series(traj)[-1] == pytest.approx(1.0, rel=1e-9)


def test_undriven_stays_vacuum():
    traj = moments.integrate(quad(delta=0.5, g=1), 10.0, 1e-10)
    assert np.all(traj.states == 0)


def test_quadratic_relaxes_to_analytic_value():
    p = quad(delta=0.5, g=1, omega_drive_amp=1.0)
    ref = analytic.quadratic_steady_energy(p)
    rate = -moments.max_growth_rate(p)
    traj = moments.integrate(p, 100.0, 1e-10, t_eval=[50.0, 100.0])
    err = [rel(s.n_h, ref) for s in traj]
    # the slowest mode sets the approach: still visible at t = 50, gone by t = 100
    assert err[0] <= math.exp(-rate * 50.0)
    assert err[1] <= 1e-4


def test_divergence_flagged():
    p = quad(delta=0.5, g=1, omega_drive_amp=1.5)
    traj = moments.integrate(p, 1000.0, 1e-8)
    assert traj.diverged and traj.t[-1] < 1000.0


@pytest.mark.parametrize("kw", [{"t_end": 0.0}, {"t_end": 1.0, "tol": 1e-3}, {"t_end": 1.0, "tol": 1e-14}])
def test_integrate_validation(kw):
    with pytest.raises(InvalidParams):
        moments.integrate(lin(), **kw)


def test_steady_state_examples():
    m = moments.steady_state_moments(lin(g=1, omega_drive_amp=0.5))
    assert abs(m.m_h) ** 2 == pytest.approx(0.25, rel=1e-12)
    m = moments.steady_state_moments(lin(g=1))
    assert np.allclose(vec(m), 0, atol=1e-15)
    m = moments.steady_state_moments(quad(delta=0, g=1, omega_drive_amp=0.3))
    assert m.n_h == pytest.approx(0.28125, rel=1e-12)


def test_steady_state_errors():
    with pytest.raises(NoSteadyState):
        moments.steady_state_moments(quad(delta=0.5, g=1, omega_drive_amp=1.3))
    with pytest.raises((SingularSystem, NoSteadyState)):
        # an isolated lossless holder has undamped modes
        moments.steady_state_moments(lin(g=0.0, omega_drive_amp=0.5))


@given(st.floats(-2, 2), st.floats(0.05, 2), st.floats(0.01, 0.95), st.floats(0, 2 * math.pi), st.booleans())
def test_steady_state_residual(delta, g, frac, theta, linear):
    if linear:
        p = lin(delta=delta, g=g, omega_drive_amp=frac, theta=theta)
    else:
        base = quad(delta=delta, g=g, theta=theta)
        c = analytic.critical_amplitude(base)
        if not math.isfinite(c):
            return
        p = base.replace(omega_drive_amp=frac * c)
        if moments.max_growth_rate(p) >= -1e-6:
            return
    m = moments.steady_state_moments(p)
    scale = max(1.0, np.abs(vec(m)).max())
    assert np.abs(vec(moments.moment_rhs(m, p))).max() <= 1e-12 * scale


def test_first_moments_vanish_under_quadratic_drive():
    p = quad(delta=0.5, g=1, omega_drive_amp=1.0, theta=0.4)
    traj = moments.integrate(p, 30.0, 1e-10)
    assert np.abs(traj.states[:, :4]).max() <= 1e-12


def test_convergence_order():
    p = quad(delta=0.5, g=1, omega_drive_amp=0.7, theta=0.3)
    ref = moments.integrate(p, 5.0, 1e-12, t_eval=[5.0]).states[-1]
    tols = np.array([1e-5, 1e-6, 1e-7, 1e-8, 1e-9])
    err = np.array([np.abs(moments.integrate(p, 5.0, t, t_eval=[5.0]).states[-1] - ref).max() for t in tols])
    assert np.all(np.diff(err) < 0)
    # tolerance-proportional error control: error ~ tol^s with s close to 1
    slope = np.polyfit(np.log(tols), np.log(err), 1)[0]
    assert 0.8 <= slope <= 1.2
    halved = np.abs(moments.integrate(p, 5.0, 5e-8, t_eval=[5.0]).states[-1] - ref).max()
    assert halved < err[2]


@given(st.floats(0, 2 * math.pi))
def test_theta_covariance(theta):
    base = quad(delta=0.5, g=1, omega_drive_amp=0.8)
    m0 = moments.steady_state_moments(base)
    m = moments.steady_state_moments(base.replace(theta=theta))
    assert m.n_h == pytest.approx(m0.n_h, rel=1e-12)
    assert abs(m.s_hh - cmath.exp(1j * theta) * m0.s_hh) <= 1e-12 * abs(m0.s_hh)
    e0 = moments.energy_report_from_moments(m0).ergotropy
    assert moments.energy_report_from_moments(m).ergotropy == pytest.approx(e0, rel=1e-12)
    t = [0.5, 2.0]
    a = moments.integrate(base, 2.0, 1e-11, t_eval=t)
    b = moments.integrate(base.replace(theta=theta), 2.0, 1e-11, t_eval=t)
    assert np.allclose(moments.ergotropy_series(a), moments.ergotropy_series(b), rtol=1e-8, atol=1e-12)


def test_energy_report_vacuum_and_linear():
    r = moments.energy_report_from_moments(MomentState.vacuum())
    assert (r.e_holder, r.e_passive, r.ergotropy, r.d_value) == (0.0, 0.0, 0.0, 1.0)
    m = moments.steady_state_moments(lin(delta=0.3, g=0.8, omega_drive_amp=0.6))
    r = moments.energy_report_from_moments(m)
    assert r.d_value == pytest.approx(1.0, abs=1e-12) and abs(r.e_passive) <= 1e-12


def test_energy_report_quadratic_matches_closed_form():
    p = quad(delta=0.5, g=1, omega_drive_amp=1.0)
    r = moments.energy_report_from_moments(moments.steady_state_moments(p))
    assert r.d_value > 1
    assert rel(r.d_value, analytic.quadratic_steady_D(p)) <= 1e-10


def test_nonphysical_moments_rejected():
    with pytest.raises(NonPhysicalState):
        moments.energy_report_from_moments(MomentState(n_h=0.1, s_hh=0.5))


def test_quadrature_vacuum():
    q = moments.quadrature_variances(MomentState.vacuum())
    assert (q.var_x, q.var_p, q.uncertainty_product, q.squeezed) == (0.5, 0.5, 0.5, False)


def test_squeezing_window():
    p = quad(delta=0.5, g=1)
    squeezed = moments.quadrature_variances(moments.steady_state_moments(p.replace(omega_drive_amp=0.5)))
    assert squeezed.var_p < 0.5 and squeezed.squeezed
    late = moments.quadrature_variances(moments.steady_state_moments(p.replace(omega_drive_amp=0.9)))
    assert late.var_p > 0.5


def test_power_examples():
    p = quad(delta=0.5, g=1, omega_drive_amp=1.0)
    q = lin(g=1, omega_drive_amp=1.0)
    early = moments.charging_power(moments.integrate(q, 0.1, 1e-12, t_eval=[1e-2, 3e-2, 1e-1]))
    assert np.all(np.diff(early.power) > 0) and early.power[0] < 1e-6
    t = np.linspace(0.01, 20.0, 2000)
    assert abs(moments.charging_power(moments.integrate(p, 20.0, 1e-10, t_eval=t)).t_peak - 2.6) <= 0.3


def test_power_tail_exponent():
    p = quad(delta=0.5, g=1, omega_drive_amp=1.0)
    t = np.geomspace(100, 1000, 40)
    series = moments.charging_power(moments.integrate(p, 1000.0, 1e-10, t_eval=t))
    slope = np.polyfit(np.log(series.t), np.log(series.power), 1)[0]
    assert abs(slope + 1) <= 0.01


def test_trajectory_csv_is_deterministic():
    p = lin(g=0.5, omega_drive_amp=0.4)
    a = moments.trajectory_csv(moments.integrate(p, 2.0, 1e-10, t_eval=[0.0, 1.0, 2.0]))
    b = moments.trajectory_csv(moments.integrate(p, 2.0, 1e-10, t_eval=[0.0, 1.0, 2.0]))
    assert a == b
    lines = a.splitlines()
    assert lines[0].split(",") == list(moments.TRAJECTORY_COLUMNS) and len(lines) == 4
