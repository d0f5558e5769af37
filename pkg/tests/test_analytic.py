import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import lin, quad, rel
from qbattery import analytic, moments
from qbattery.analytic import Regime
from qbattery.errors import DegenerateDivision, InvalidParams, NoSteadyState


# -- linear drive ------------------------------------------------------------


def test_at_exceptional_point():
    s = analytic.classify_linear_regime(lin(g=0.25))
    assert s.regime is Regime.AT_EP
    assert abs(s.eps_plus + 0.25j) < 1e-15 and s.eps_plus == s.eps_minus


def test_uncoupled_is_below_ep():
    s = analytic.classify_linear_regime(lin(g=0.0, delta=0.5))
    assert s.regime is Regime.BELOW_EP
    assert s.big_gamma == pytest.approx(0.25, abs=1e-15)


def test_above_ep_frequency_matches_drift_matrix():
    s = analytic.classify_linear_regime(lin(g=1.0))
    assert s.regime is Regime.ABOVE_EP
    assert s.big_g == pytest.approx(math.sqrt(1 - 1 / 16), abs=1e-15)
    assert s.big_g == pytest.approx(0.9682, abs=1e-4)
    # independent route: diagonalize the drift matrix by hand
    A = np.array([[-0.5, -1j], [-1j, 0.0]])
    ev = np.sort_complex(1j * np.linalg.eigvals(A))
    assert np.allclose(ev, np.sort_complex([s.eps_plus, s.eps_minus]), atol=1e-14)


def test_steady_ergotropy_zero_detuning():
    assert analytic.linear_steady_ergotropy(lin(g=1, omega_drive_amp=0.5)).ergotropy == pytest.approx(0.25, rel=1e-14)


def test_steady_ergotropy_zero_drive():
    assert analytic.linear_steady_ergotropy(lin(delta=0.7, g=0.4)).ergotropy == 0.0


def test_steady_ergotropy_detuned_against_linear_solve():
    p = lin(delta=1, g=1, omega_drive_amp=1)
    e = analytic.linear_steady_ergotropy(p).ergotropy
    assert e == pytest.approx(4.0, rel=1e-14)
    A = moments.first_moment_drift(p)
    m = np.linalg.solve(A, [1j * p.drive_phasor, 0.0])
    assert abs(m[1]) ** 2 == pytest.approx(e, rel=1e-12)


def test_steady_energy_pole():
    with pytest.raises(DegenerateDivision):
        analytic.linear_steady_energy(0.0, 0.0, 1.0, 1.0)


def test_optimal_detuning_values():
    assert analytic.linear_optimal_detuning(1 / (2 * math.sqrt(2)), 1.0) == 0.0
    assert analytic.linear_optimal_detuning(0.1, 1.0) == 0.0
    d = analytic.linear_optimal_detuning(1.0, 1.0)
    assert d == pytest.approx(math.sqrt(1 - 1 / 8), abs=1e-15)
    grid = np.arange(0, 2 + 5e-5, 1e-4)
    e = analytic.linear_steady_energy(grid, 1.0, 1.0, 1.0)
    assert abs(grid[np.argmax(e)] - d) <= 1e-4


def test_max_steady_ergotropy_values():
    assert analytic.linear_max_steady_ergotropy(lin(g=0.1, omega_drive_amp=0.2)) == pytest.approx(4.0, rel=1e-13)
    assert analytic.linear_max_steady_ergotropy(lin(g=300.0, omega_drive_amp=1.0)) == pytest.approx(4.0, rel=1e-5)
    p = lin(g=1, omega_drive_amp=1)
    direct = analytic.linear_steady_energy(analytic.linear_optimal_detuning(1, 1), 1, 1, 1)
    assert analytic.linear_max_steady_ergotropy(p) == pytest.approx(16 / 3.75, rel=1e-13)
    assert analytic.linear_max_steady_ergotropy(p) == pytest.approx(direct, rel=1e-13)


def test_lossless_peak():
    p = lin(g=1, gamma=0, omega_drive_amp=0.5)
    assert analytic.linear_ergotropy_at(p, math.pi).ergotropy == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("g", [0.05, 0.25, 1.0])
def test_ergotropy_vanishes_at_start(g):
    assert analytic.linear_ergotropy_at(lin(g=g, omega_drive_amp=1), 0.0).ergotropy == 0.0


def test_at_ep_branch_against_ode():
    # 16 (1 - 2/e)^2 from the critically damped branch
    p = lin(g=0.25, omega_drive_amp=1.0)
    e = analytic.linear_ergotropy_at(p, 4.0).ergotropy
    assert e == pytest.approx(16 * (1 - 2 / math.e) ** 2, rel=1e-13)
    traj = moments.integrate(p, 4.0, 1e-12, t_eval=[4.0])
    assert moments.ergotropy_series(traj)[-1] == pytest.approx(e, rel=1e-8)


@pytest.mark.parametrize("t", [0.5, 3.0, 10.0, 40.0])
def test_branches_continuous_at_ep(t):
    def e(g):
        return analytic.linear_ergotropy_at(lin(g=g, omega_drive_amp=1), t).ergotropy

    at, above, below = e(0.25), e(0.25 + 1e-9), e(0.25 - 1e-9)
    assert abs(at - above) <= 1e-6 and abs(at - below) <= 1e-6 and abs(above - below) <= 1e-6
    # further out the smooth g dependence dominates; the branch point then sits on the chord
    assert abs(at - 0.5 * (e(0.25 + 1e-6) + e(0.25 - 1e-6))) <= 1e-6


@given(st.floats(0.1, 3.0), st.floats(0.0, 20.0))
def test_lossless_periodicity(g, t):
    p = lin(g=g, gamma=0, omega_drive_amp=0.7)
    a = analytic.linear_ergotropy_at(p, t).ergotropy
    b = analytic.linear_ergotropy_at(p, t + 2 * math.pi / g).ergotropy
    assert abs(a - b) <= 1e-9 * max(1.0, a)


@given(st.floats(0.2, 3.0), st.floats(0.2, 3.0))
def test_long_time_limit(g, gamma):
    # weaker couplings relax slower than 200/gamma allows for
    p = lin(g=g * gamma, gamma=gamma, omega_drive_amp=0.6)
    late = analytic.linear_ergotropy_at(p, 200 / gamma).ergotropy
    assert rel(late, analytic.linear_steady_ergotropy(p).ergotropy) <= 1e-6


def test_argmax_invariance_random_pairs():
    rng = np.random.default_rng(7)
    step = 1e-3
    for _ in range(50):
        g, gamma = rng.uniform(0.05, 2), rng.uniform(0.2, 2)
        hi = 3.0 * max(g, gamma)
        grid = np.arange(0, hi + step / 2, step)
        best = grid[np.argmax(analytic.linear_steady_energy(grid, g, gamma, 1.0))]
        assert abs(best - analytic.linear_optimal_detuning(g, gamma)) <= step


def test_approximations_track_exact():
    weak = lin(g=0.02, omega_drive_amp=0.1)
    strong = lin(g=20.0, omega_drive_amp=0.1)
    for t in (100.0, 500.0, 3000.0, 1e6):
        assert rel(analytic.linear_weak_coupling_ergotropy(weak, t), analytic.linear_ergotropy_at(weak, t).ergotropy) < 0.05
    for t in (3.0, 10.0):
        assert rel(analytic.linear_strong_coupling_ergotropy(strong, t), analytic.linear_ergotropy_at(strong, t).ergotropy) < 0.01


def test_no_overflow_at_late_times():
    p = lin(g=0.02, omega_drive_amp=0.1)
    assert analytic.linear_ergotropy_at(p, 1e7).ergotropy == pytest.approx(25.0, rel=1e-12)


def test_linear_rejects_quadratic():
    with pytest.raises(InvalidParams):
        analytic.classify_linear_regime(quad(g=1))


# -- quadratic drive, Hamiltonian picture -------------------------------------


def bogoliubov_matrix(delta, g, omega):
    """i d/dt (c, h, c^dag, h^dag) = M (c, h, c^dag, h^dag)."""
    return np.array(
        [[delta, g, omega, 0], [g, delta, 0, 0], [-omega, 0, -delta, -g], [0, 0, -g, -delta]], dtype=float
    )


def test_bogoliubov_undriven():
    b = analytic.bogoliubov_spectrum(quad(delta=1, g=0.5))
    assert sorted([b.omega_plus.real, b.omega_minus.real]) == pytest.approx([0.5, 1.5], abs=1e-15)
    assert b.mu_plus == b.mu_minus == b.nu_plus == b.nu_minus == 0.0
    assert b.stable


def test_xi_zero_discriminant():
    assert analytic.XI == pytest.approx(0.486, abs=1e-3)
    # at delta/g = xi the three boundary curves meet, so the inner root vanishes there
    g = 1.0
    b1, b2, b3 = analytic.hamiltonian_boundaries(analytic.XI, g)
    assert b1 == pytest.approx(b3, abs=1e-12)
    inner, _ = analytic._bogoliubov_squares(analytic.XI, g, b1)
    assert abs(inner) < 1e-12


def test_bogoliubov_unstable_example():
    b = analytic.bogoliubov_spectrum(quad(delta=0, g=1, omega_drive_amp=0.5))
    assert not b.stable
    assert (b.omega_plus**2).imag != 0
    ev = np.linalg.eigvals(bogoliubov_matrix(0, 1, 0.5))
    assert np.abs(ev.imag).max() > 1e-3


def test_boundaries():
    s = analytic.hamiltonian_stability(quad(delta=1.0, g=1.0, omega_drive_amp=0.01))
    assert s.boundary_1 == 0.0 and not s.stable
    b1, b2, b3 = analytic.hamiltonian_boundaries(0.3, 1.0)
    assert b2 == pytest.approx(math.sqrt(1.6) - math.sqrt(0.4), abs=1e-15)
    assert b2 == pytest.approx(0.6325, abs=1e-4)

    def inner(w):  # the discriminant of the squared frequencies, written out
        return w**4 / 4 - w**2 + 4 * 0.3**2

    lo, hi = 0.1, 1.0
    assert inner(lo) > 0 > inner(hi)
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if inner(mid) > 0 else (lo, mid)
    assert abs(lo - b2) < 1e-10


def test_large_detuning_weak_drive_stable():
    assert analytic.hamiltonian_stability(quad(delta=5.0, g=1.0, omega_drive_amp=1e-3)).stable


def stability_grid(n=200):
    return np.linspace(0.0, 2.0, n), np.linspace(0.0, 3.0, n)


def test_hamiltonian_stability_agreement():
    ratios, amps = stability_grid()
    mismatches = 0
    for r in ratios:
        b = analytic.hamiltonian_boundaries(r, 1.0)
        for w in amps:
            if min(abs(w - x) for x in b) < 1e-9:
                continue
            p = quad(delta=float(r), g=1.0, omega_drive_amp=float(w))
            mismatches += analytic.hamiltonian_stability(p).stable != analytic.bogoliubov_spectrum(p).stable
    assert mismatches == 0


def test_bogoliubov_matches_dynamical_matrix():
    rng = np.random.default_rng(3)
    for _ in range(200):
        d, w = rng.uniform(-2, 2), rng.uniform(0, 3)
        b = analytic.bogoliubov_spectrum(quad(delta=d, g=1.0, omega_drive_amp=w))
        ev = np.linalg.eigvals(bogoliubov_matrix(d, 1.0, w))
        growth = np.abs(ev.imag).max()
        if 1e-6 < growth:
            assert not b.stable
        elif growth < 1e-12 and b.stable:
            ref = np.sort(np.abs(ev.real))[::2]
            got = np.sort([abs(b.omega_plus.real), abs(b.omega_minus.real)])
            assert np.allclose(ref, got, atol=1e-6)


# -- quadratic drive, dissipative steady state --------------------------------


def test_critical_amplitudes_fig3():
    c1, c2 = analytic.critical_amplitudes(quad(delta=0.5, g=1.0))
    assert c1 == pytest.approx(math.sqrt(5) / 2, abs=1e-15)
    assert c2 == pytest.approx(math.sqrt(5 / 2), abs=1e-15)


def test_critical_amplitudes_collapse():
    assert analytic.critical_amplitudes(quad(delta=0.0, g=0.0)) == pytest.approx((0.5, 0.5))


def test_liouvillian_stability_examples():
    assert analytic.liouvillian_stable(quad(delta=0.5, g=1, omega_drive_amp=1.0))
    assert analytic.liouvillian_stable(quad(delta=0.5, g=1))
    p = quad(delta=1.0, g=1.0, omega_drive_amp=0.55)
    assert analytic.critical_amplitude(p) == pytest.approx(0.5)
    assert not analytic.liouvillian_stable(p)
    assert moments.max_growth_rate(p) > 0


def test_liouvillian_stability_agreement():
    ratios, amps = stability_grid()
    mismatches = checked = 0
    for r in ratios:
        for w in amps:
            p = quad(delta=float(r), g=1.0, omega_drive_amp=float(w))
            growth = moments.max_growth_rate(p)
            if abs(growth) < 1e-9:
                continue
            checked += 1
            mismatches += analytic.liouvillian_stable(p) != (growth < 0)
    assert mismatches == 0 and checked > 39000


def test_quadratic_energy_zero_detuning():
    p = quad(delta=0, g=1, omega_drive_amp=0.3)
    assert analytic.quadratic_steady_energy(p) == pytest.approx(0.28125, rel=1e-13)
    assert analytic.quadratic_steady_energy_zero_detuning(1.0, 0.3) == pytest.approx(0.28125, rel=1e-13)
    assert analytic.quadratic_steady_energy(quad(delta=0.4, g=1)) == 0.0


def test_quadratic_ergotropy_zero_detuning():
    p = quad(delta=0, g=1, omega_drive_amp=0.3)
    assert analytic.quadratic_steady_ergotropy(p).ergotropy == pytest.approx(0.15625, rel=1e-12)
    assert analytic.quadratic_steady_ergotropy_zero_detuning(1.0, 0.3) == pytest.approx(0.15625, rel=1e-12)


def test_quadratic_energy_diverges_below_critical():
    p = quad(delta=0.5, g=1)
    c1 = analytic.critical_amplitude(p)
    e = [analytic.quadratic_steady_energy(p.replace(omega_drive_amp=c1 * (1 - x))) for x in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(np.diff(e) > 0) and e[-1] > 1e3
    with pytest.raises(NoSteadyState):
        analytic.quadratic_steady_energy(p.replace(omega_drive_amp=c1))


def test_quadratic_d_values():
    assert analytic.quadratic_steady_D(quad(delta=0.5, g=1)) == 1.0
    p = quad(delta=0.5, g=1, omega_drive_amp=1.0)
    d = analytic.quadratic_steady_D(p)
    assert d > 1
    assert rel(d, moments.gaussian_d(moments.steady_state_moments(p))) <= 1e-10
    assert analytic.quadratic_steady_ergotropy(p).ergotropy > 0


def test_quadratic_report_zero_drive():
    r = analytic.quadratic_steady_ergotropy(quad(delta=0.5, g=1))
    assert (r.e_holder, r.e_passive, r.ergotropy, r.d_value) == (0.0, 0.0, 0.0, 1.0)


def test_quadratic_weak_coupling_no_ergotropy():
    for w in (0.1, 0.4):
        r = analytic.quadratic_steady_ergotropy(quad(delta=0.3, g=1e-9, omega_drive_amp=w))
        assert r.ergotropy < 1e-12


def test_quadratic_ergotropy_grows_toward_critical():
    p = quad(delta=0.5, g=1)
    e = [analytic.quadratic_steady_ergotropy(p.replace(omega_drive_amp=w)).ergotropy for w in (1.0, 1.05, 1.1, 1.115)]
    assert all(np.diff(e) > 0) and e[2] > 1


def test_quadratic_limits():
    for g, w in ((0.5, 0.2), (1.0, 0.4), (2.0, 0.45)):
        full = analytic.quadratic_steady_energy(quad(delta=1e-8, g=g, omega_drive_amp=w))
        assert rel(full, analytic.quadratic_steady_energy_zero_detuning(1.0, w)) <= 1e-6
    for d, w in ((0.3, 0.4), (1.0, 0.9), (-0.7, 0.6)):
        full = analytic.quadratic_steady_energy(quad(delta=d, g=1e-8, omega_drive_amp=w))
        assert rel(full, analytic.quadratic_steady_energy_weak_coupling(d, 1.0, w)) <= 1e-6


@given(st.floats(-2, 2), st.floats(0.05, 2), st.floats(0.0, 0.95))
def test_theta_gauge_invariance(delta, g, frac):
    base = quad(delta=delta, g=g)
    c = analytic.critical_amplitude(base)
    if not math.isfinite(c):
        return
    base = base.replace(omega_drive_amp=frac * c)
    ref_lin = lin(delta=delta, g=g, omega_drive_amp=0.5)
    for theta in (0.0, math.pi / 3, math.pi, 3 * math.pi / 2):
        p = base.replace(theta=theta)
        assert analytic.quadratic_steady_energy(p) == analytic.quadratic_steady_energy(base)
        assert analytic.quadratic_steady_D(p) == analytic.quadratic_steady_D(base)
        assert analytic.liouvillian_stable(p) == analytic.liouvillian_stable(base)
        assert analytic.bogoliubov_spectrum(p) == analytic.bogoliubov_spectrum(base)
        q = ref_lin.replace(theta=theta)
        if delta != 0 or g != 0:
            assert analytic.linear_steady_ergotropy(q) == analytic.linear_steady_ergotropy(ref_lin)
        q0, r0 = q.replace(delta=0.0), ref_lin.replace(delta=0.0)
        assert analytic.linear_ergotropy_at(q0, 1.7) == analytic.linear_ergotropy_at(r0, 1.7)
        assert analytic.classify_linear_regime(q) == analytic.classify_linear_regime(ref_lin)
