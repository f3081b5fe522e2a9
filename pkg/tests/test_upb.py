import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.optimize import minimize, minimize_scalar

from qfc.bogoliubov import omega
from qfc.correlations import steady_moments
from qfc.errors import NoOptimalDisplacementError, UnphysicalStateError
from qfc.params import steady_state
from qfc.upb import (GaussianSingleMode, InterferenceConfig, alpha_opt, assemble_output, eta_opt,
                     fit_damped_oscillation, g2_delay, g2_opt, moments_from_squeeze, optimal_config,
                     squeeze_params_from_moments, upb_scan)

N_GAP, C_GAP = 10 / 9, abs(-32 / 45 - 17j / 15)


def g2_zero(n, cbar, alpha, eta):
    # equal-time g2 with the squeezing phase measured from the displacement
    num = 2 * alpha ** 2 * (n + cbar * math.cos(eta + math.pi)) + n * n + cbar * cbar
    return 1 + num / (alpha ** 2 + n) ** 2


def test_thermal_state():
    assert moments_from_squeeze(0.7, 0.0, 1.0) == (pytest.approx(0.7), 0)


def test_squeezed_vacuum():
    n, c = moments_from_squeeze(0.0, 1.0, 0.3)
    assert n == pytest.approx((math.cosh(2) - 1) / 2, abs=1e-14)
    assert abs(c) == pytest.approx(math.sinh(2) / 2, abs=1e-14)
    assert abs(c) ** 2 == pytest.approx(n * (n + 1), rel=1e-13)
    assert squeeze_params_from_moments(n, c)[0] == pytest.approx(0.0, abs=1e-12)


@given(st.floats(0.0, 5.0), st.floats(0.0, 2.5), st.floats(-3.1, 3.1))
def test_round_trip(n_th, r, theta):
    assume(r > 1e-6)
    got = squeeze_params_from_moments(*moments_from_squeeze(n_th, r, theta))
    assert got[0] == pytest.approx(n_th, abs=1e-10 * (1 + n_th) * math.cosh(2 * r))
    assert got[1] == pytest.approx(r, abs=1e-10 * math.cosh(2 * r) ** 2)
    assert cmath.exp(1j * got[2]) == pytest.approx(cmath.exp(1j * theta), abs=1e-10)


def test_thermal_inversion():
    assert squeeze_params_from_moments(0.3, 0j) == (pytest.approx(0.3), 0.0, 0.0)


def test_unphysical_rejected():
    with pytest.raises(UnphysicalStateError):
        squeeze_params_from_moments(0.1, 1.0)


def test_gap_mode_squeezing(gapped):
    m = steady_moments(0.0, gapped)
    n_th, r, _ = squeeze_params_from_moments(m.n, m.c)
    assert n_th == pytest.approx(math.sqrt(N_GAP / 2 + 0.25) - 0.5, abs=1e-12)
    assert n_th == pytest.approx(0.39753, abs=5e-6)
    assert r == pytest.approx(0.5948, abs=5e-5)


def test_assembly_without_displacement(gapped):
    st_ = assemble_output(gapped, InterferenceConfig(k=2.0))
    m = steady_moments(2.0, gapped)
    assert st_.alpha == 0 and st_.n == m.n and st_.c == m.c
    assert st_.is_physical()


def test_only_arm_phase_sum_matters(gapped):
    a = InterferenceConfig(k=1.0, alpha_bar=2.0, zeta=0.2, phi_plus=0.4, phi_minus=0.1)
    b = InterferenceConfig(k=1.0, alpha_bar=2.0, zeta=0.2, phi_plus=1.4, phi_minus=-0.9)
    sa, sb = assemble_output(gapped, a), assemble_output(gapped, b)
    assert sa.alpha == sb.alpha and sa.n == sb.n and abs(sa.c - sb.c) < 1e-15
    tau = np.linspace(0, 3, 7)
    assert np.allclose(g2_delay(gapped, a, tau), g2_delay(gapped, b, tau), atol=1e-14)


def test_coherent_light_is_poissonian():
    mf = steady_state(0.0, -1.0, mg=0.0)
    g = g2_delay(mf, InterferenceConfig(k=1.0, alpha_bar=1.5), np.linspace(0, 5, 11))
    assert np.all(g == 1.0)


def test_long_delay_uncorrelated(gapped):
    cfg = optimal_config(gapped, 1.0)
    assert abs(g2_delay(gapped, cfg, 50.0) - 1) < 1e-9


def test_eta_opt_for_negative_real_c(gapped):
    # a state whose c is real negative needs no extra phase
    mf = steady_state(5.0, -1.0)
    c = steady_moments(0.0, mf).c
    assert eta_opt(mf, 0.0) == pytest.approx(math.pi - cmath.phase(c))
    assert math.remainder(math.pi - cmath.phase(-1.0 + 0j), 2 * math.pi) == 0


def test_eta_opt_minimizes_over_phase(gapped):
    rng = np.random.default_rng(4)
    cfg = optimal_config(gapped, 0.0)
    best = g2_delay(gapped, cfg, 0.0)
    for eta in rng.uniform(-math.pi, math.pi, 100):
        trial = InterferenceConfig(k=0.0, alpha_bar=cfg.alpha_bar, zeta=-eta / 2)
        assert best <= g2_delay(gapped, trial, 0.0) + 1e-15


def test_phase_sweep_extremes(gapped):
    cfg = optimal_config(gapped, 1.0)
    etas = cfg.eta + np.linspace(-math.pi, math.pi, 721)
    g = [g2_delay(gapped, InterferenceConfig(k=1.0, alpha_bar=cfg.alpha_bar, zeta=-e / 2), 0.0) for e in etas]
    assert abs(etas[int(np.argmin(g))] - cfg.eta) < 1e-9
    assert abs(abs(etas[int(np.argmax(g))] - cfg.eta) - math.pi) < 1e-9


def test_alpha_opt_gap_mode():
    a = alpha_opt(N_GAP, C_GAP)
    assert a == pytest.approx(3.8006, abs=5e-5)
    res = minimize_scalar(lambda x: g2_zero(N_GAP, C_GAP, x, 0.0), bounds=(0.1, 20), method="bounded",
                          options={"xatol": 1e-10})
    assert res.x == pytest.approx(a, rel=1e-6)


def test_alpha_opt_vanishes_at_large_k(gapped):
    rows = upb_scan(gapped, [5.0, 50.0, 500.0, 5000.0])
    a = [r["alpha_opt"] for r in rows]
    assert a[0] > a[1] > a[2] > a[3] and a[3] < 1e-3


def test_no_displacement_without_squeezing():
    with pytest.raises(NoOptimalDisplacementError):
        alpha_opt(0.5, 0.5)
    with pytest.raises(NoOptimalDisplacementError):
        g2_opt(0.5, 0.4)


def test_g2_opt_gap_mode(gapped):
    assert g2_opt(N_GAP, C_GAP) == pytest.approx(0.98542, abs=5e-6)
    assert g2_delay(gapped, optimal_config(gapped, 0.0), 0.0) == pytest.approx(g2_opt(N_GAP, C_GAP), abs=1e-10)


def test_small_thermal_law(gapped):
    for r in upb_scan(gapped, np.linspace(0, 20, 401)):
        if r["n_th"] < 1e-3:
            assert 0.8 <= r["g2_opt"] / (8 * math.sqrt(r["n_th"])) <= 1.2


def test_ring_hurts_antibunching(ring):
    rows = upb_scan(ring, np.linspace(1.5, 3.2, 341))
    g = np.array([r["g2_opt"] for r in rows])
    k = np.array([r["k"] for r in rows])
    i = int(np.argmax(g))
    assert 0 < i < len(g) - 1 and math.sqrt(4.4) < k[i] < math.sqrt(6.0)


def test_scan_monotone_when_gapped(gapped):
    rows = upb_scan(gapped, np.linspace(0, 6, 121))
    assert np.all(np.diff([r["n_th"] for r in rows]) < 0)
    assert np.all(np.diff([r["r"] for r in rows]) < 0)


def test_scan_thermal_peak_inside_ring(ring):
    rows = upb_scan(ring, np.linspace(0, 4, 401))
    k = rows[int(np.argmax([r["n_th"] for r in rows]))]["k"]
    assert math.sqrt(4.4) < k < math.sqrt(6.0)


def test_scan_without_interactions():
    rows = upb_scan(steady_state(0.0, -1.0, mg=0.0), [0.0, 1.0])
    assert all(r["n_th"] == 0 and r["r"] == 0 and r["g2_opt"] is None for r in rows)


@given(st.floats(0.0, 8.0))
def test_optimum_matches_closed_form(k):
    mf = steady_state(5.0, -1.0)
    m = steady_moments(k, mf)
    n, cbar = m.n, abs(m.c)
    assert g2_delay(mf, optimal_config(mf, k), 0.0) == pytest.approx(g2_opt(n, cbar), abs=1e-10)
    assert 0 <= g2_opt(n, cbar) <= 1


def test_two_dimensional_minimum(gapped):
    m = steady_moments(1.0, gapped)
    n, cbar = m.n, abs(m.c)
    res = minimize(lambda p: g2_zero(n, cbar, p[0], p[1]), x0=[1.0, 0.5], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000})
    assert res.fun == pytest.approx(g2_opt(n, cbar), abs=1e-6)
    assert res.x[0] == pytest.approx(alpha_opt(n, cbar), rel=1e-6)


def test_gaussian_state_g2_agrees(gapped):
    cfg = optimal_config(gapped, 2.0)
    s = assemble_output(gapped, cfg)
    assert s.g2() == pytest.approx(g2_delay(gapped, cfg, 0.0), abs=1e-13)
    s2 = GaussianSingleMode.from_squeeze(s.alpha, s.n_th, s.r, s.theta)
    assert s2.n == pytest.approx(s.n) and s2.c == pytest.approx(s.c)


@pytest.mark.parametrize("k", [1.0, 2.0, 3.0])
def test_g2_delay_oscillation(gapped, k):
    cfg = optimal_config(gapped, k)
    tau = np.linspace(2, 12, 6001)
    w, kappa = fit_damped_oscillation(tau, g2_delay(gapped, cfg, tau))
    assert w == pytest.approx(omega(k, gapped).real, rel=0.02)
    assert 2 * kappa == pytest.approx(gapped.gamma, rel=0.05)
