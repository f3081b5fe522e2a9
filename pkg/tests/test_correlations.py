import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm, solve_continuous_lyapunov

from qfc.bogoliubov import omega
from qfc.correlations import (delayed_moments, langevin_oracle, moment_rhs, moment_trajectory,
                              ode_steady_oracle, steady_moments)
from qfc.errors import UnstableStateError
from qfc.params import steady_state

# Reference moments from a Lyapunov solve of the linear fluctuation dynamics
LYAPUNOV = [
    (5.0, -1.0, 0.0, 10 / 9, -32 / 45 - 17j / 15),
    (5.0, -1.0, 1.0, 5 / 7, -0.5 - 11j / 14),
    (5.0, -1.0, 2.0, 0.31847133757961676, -0.2802547770700632 - 0.4267515923566871j),
    (0.4, 3.0, 1.0, 0.01777777777777778, 0.0810810810810811 - 0.0512912912912913j),
    (0.4, 3.0, 2.28, 0.888882567946184, -0.3586761280928784 - 1.0516201494398987j),
    (0.4, 3.0, 3.0, 0.021621621621621845, -0.10591672753834913 + 0.0077428780131483105j),
]


def drift(k, mf):
    a = k * k / 2 / mf.m - mf.Delta + mf.mu
    P = mf.pair_amplitude
    return np.array([[a, P], [-np.conj(P), -a]]) - 0.5j * mf.gamma * np.eye(2)


def lyapunov_moments(k, mf):
    # symmetrized covariance of (phi_k, phi_-k^dag) under vacuum input noise
    A = -1j * drift(k, mf)
    S = solve_continuous_lyapunov(A, -0.5 * mf.gamma * np.eye(2))
    return S[0, 0].real - 0.5, S[0, 1]


@pytest.mark.parametrize("mu, Delta, k, n, c", LYAPUNOV)
def test_reference_values(mu, Delta, k, n, c):
    m = steady_moments(k, steady_state(mu, Delta))
    assert m.n == pytest.approx(n, rel=1e-12)
    assert abs(m.c - c) < 1e-12 * abs(c)


def test_pair_modulus_at_gap(gapped):
    assert abs(steady_moments(0.0, gapped).c) == pytest.approx(1.33795, abs=5e-6)


@given(st.floats(0.0, 8.0), st.floats(0.01, 0.49), st.floats(-3.0, 4.0))
def test_closed_form_matches_lyapunov(k, mu, Delta):
    mf = steady_state(mu, Delta)
    m = steady_moments(k, mf)
    n, c = lyapunov_moments(k, mf)
    assert m.n == pytest.approx(n, rel=1e-9, abs=1e-14)
    assert abs(m.c - c) <= 1e-9 * abs(c) + 1e-14


def test_empty_cavity_has_no_fluctuations():
    m = steady_moments(np.linspace(0, 3, 5), steady_state(0.0, -1.0, mg=0.0))
    assert np.all(m.n == 0) and np.all(m.c == 0)


def test_unstable_state_rejected():
    with pytest.raises(UnstableStateError):
        steady_moments(1.0, steady_state(0.6, 3.0))


@pytest.mark.parametrize("mf_name", ["gapped", "ring"])
def test_fixed_point_identity(request, mf_name):
    mf = request.getfixturevalue(mf_name)
    k = np.linspace(0, 8, 1000)
    m = steady_moments(k, mf)
    dn, dc = moment_rhs(m.n, m.c, k, mf)
    assert np.all(np.abs(dn) <= 1e-12 * mf.gamma * m.n)
    assert np.all(np.abs(dc) <= 1e-12 * mf.gamma * np.abs(m.c))


@pytest.mark.parametrize("mf_name", ["gapped", "ring"])
def test_pure_pair_identity(request, mf_name):
    mf = request.getfixturevalue(mf_name)
    m = steady_moments(np.linspace(0, 10, 1000), mf)
    lhs, rhs = np.abs(m.c) ** 2, m.n * (m.n + 0.5)
    assert np.max(np.abs(lhs - rhs) / rhs) < 1e-12
    assert np.all(m.thermal_occupation >= 0)


def test_uv_scaling(gapped):
    k = np.geomspace(10, 100, 200) * math.sqrt(gapped.mu)
    m = steady_moments(k, gapped)
    assert np.polyfit(np.log(k), np.log(m.n), 1)[0] == pytest.approx(-4, abs=0.05)
    assert np.polyfit(np.log(k), np.log(np.abs(m.c)), 1)[0] == pytest.approx(-2, abs=0.05)


@pytest.mark.parametrize("k", [0.0, 1.0, 2.28])
def test_ode_oracle(ring, gapped, k):
    for mf in (ring, gapped):
        got = ode_steady_oracle(k, mf)
        ref = steady_moments(k, mf)
        assert abs(got.n - ref.n) < 1e-10 and abs(got.c - ref.c) < 1e-10


def test_ode_oracle_empty_cavity():
    got = ode_steady_oracle(1.0, steady_state(0.0, 1.0, mg=0.0))
    assert got.n == 0 and got.c == 0


def test_relaxation_time_of_amplified_mode(ring):
    # the slowest mode relaxes at gamma - 2 Gamma_k ~ 0.2
    k = 2.28
    ref = steady_moments(k, ring)
    t = np.linspace(20, 60, 5)
    n, _ = moment_trajectory(k, ring, np.concatenate([[0.0], t]))
    rate = -np.polyfit(t, np.log(np.abs(n[1:] - ref.n)), 1)[0]
    expected = ring.gamma - 2 * omega(k, ring).imag
    assert rate == pytest.approx(expected, rel=1e-3)
    assert 1 / rate == pytest.approx(5.0, rel=0.02)


def test_delay_zero_is_stationary(ring):
    k = np.linspace(0, 4, 9)
    d = delayed_moments(k, ring, 0.0)
    m = steady_moments(k, ring)
    assert np.array_equal(d.n, m.n) and np.array_equal(d.c, m.c)


def test_negative_delay_rejected(ring):
    with pytest.raises(ValueError):
        delayed_moments(1.0, ring, -0.1)


@pytest.mark.parametrize("mf_name", ["gapped", "ring"])
@pytest.mark.parametrize("k", [0.0, 1.5, 2.2, 2.3, 3.0])
def test_regression_theorem_against_expm(request, mf_name, k):
    mf = request.getfixturevalue(mf_name)
    m = steady_moments(k, mf)
    for tau in (0.3, 1.7, 6.0):
        M = expm(-1j * drift(k, mf) * tau)
        d = delayed_moments(k, mf, tau)
        assert abs(d.n - (np.conj(M[0, 0]) * m.n + np.conj(M[0, 1]) * m.c)) < 1e-12
        assert abs(d.c - (M[0, 0] * m.c + M[0, 1] * m.n)) < 1e-12


def test_delayed_oscillation_frequency(gapped):
    k = 2.0
    tau = np.linspace(0, 30, 30001)
    y = np.real(delayed_moments(k, gapped, tau).n)
    s = np.signbit(y)
    idx = np.nonzero(s[1:] != s[:-1])[0]
    tc = tau[idx] - y[idx] * (tau[idx + 1] - tau[idx]) / (y[idx + 1] - y[idx])
    w = math.pi / np.mean(np.diff(tc))
    assert w == pytest.approx(omega(k, gapped).real, rel=1e-2)


def test_delayed_envelope(gapped):
    k = 2.0
    tau = np.linspace(0, 20, 201)
    d = delayed_moments(k, gapped, tau)
    m = steady_moments(k, gapped)
    w = omega(k, gapped).real
    bound = np.exp(-0.5 * tau) * (m.n + abs(m.c)) * (1 + (abs(k * k / 2 + 1 + 5) + 5) / w)
    assert np.all(np.abs(d.n) <= bound)


@pytest.mark.parametrize("mf_name", ["gapped", "ring"])
def test_delayed_moments_die_out(request, mf_name):
    mf = request.getfixturevalue(mf_name)
    k = np.linspace(0, 4, 41)
    amp_rate = mf.gamma / 2 - mf.gamma_max
    n0 = np.abs(steady_moments(k, mf).n)
    late = np.abs(delayed_moments(k, mf, 10.0 / amp_rate).n)
    assert np.all(late <= 1e-3 * n0)


def test_langevin_empty_cavity():
    est = langevin_oracle(1.0, steady_state(0.0, -1.0, mg=0.0), n_traj=2000, seed=3)
    assert abs(est.n) < 3 * est.n_se
    assert abs(est.c.real) < 3 * est.c_se.real and abs(est.c.imag) < 3 * est.c_se.imag


def test_langevin_gap_mode(gapped):
    est = langevin_oracle(0.0, gapped, n_traj=10_000, seed=11)
    ref = steady_moments(0.0, gapped)
    assert abs(est.n - ref.n) < 3 * est.n_se
    assert abs(est.c.real - ref.c.real) < 3 * est.c_se.real
    assert abs(est.c.imag - ref.c.imag) < 3 * est.c_se.imag
    # phase of c: circular SE from the propagated component errors
    phase_se = abs(est.c_se) / abs(est.c)
    assert abs(np.angle(est.c / ref.c)) < 3 * phase_se


def test_langevin_delayed(gapped):
    taus = [0.0, 0.4, 1.0, 2.5]
    est = langevin_oracle(1.0, gapped, n_traj=5000, seed=5, taus=taus)
    ref = delayed_moments(1.0, gapped, est.tau)
    for got, se, want in ((est.n_tau, est.n_tau_se, ref.n), (est.c_tau, est.c_tau_se, ref.c)):
        assert np.all(np.abs(got.real - want.real) < 3 * se.real + 1e-12)
        assert np.all(np.abs(got.imag - want.imag) < 3 * se.imag + 1e-12)


def test_langevin_independent_of_thread_count(ring, monkeypatch):
    runs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("QFC_THREADS", threads)
        runs.append(langevin_oracle(2.0, ring, n_traj=3000, seed=9, block_size=1000))
    assert runs[0].n == runs[1].n and runs[0].c == runs[1].c


def test_langevin_flags_large_errors(gapped):
    est = langevin_oracle(0.0, gapped, n_traj=200, seed=1, se_tol=1e-6)
    assert est.flagged


def test_langevin_rejects_coarse_step(gapped):
    with pytest.raises(ValueError):
        langevin_oracle(0.0, gapped, n_traj=10, dt=0.5)
