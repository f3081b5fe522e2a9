"""Stationary and delayed second moments of the Bogoliubov fluctuations.

Two oracles check the closed forms independently:

* :func:`ode_steady_oracle` integrates the equations of motion of the
  quadratic moments until they stop moving;
* :func:`langevin_oracle` samples the linear stochastic equation for the
  pair ``(phi_k, phi_-k)`` and averages over trajectories.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .bogoliubov import epsilon, evolution_coeffs, omega
from .errors import ConvergenceError, UnstableStateError
from .params import MeanFieldState

__all__ = [
    "ModeMoments",
    "DelayedMoments",
    "LangevinEstimate",
    "steady_moments",
    "delayed_moments",
    "moment_rhs",
    "moment_trajectory",
    "ode_steady_oracle",
    "langevin_oracle",
    "thread_count",
]


@dataclass(frozen=True)
class ModeMoments:
    """Occupation ``n = <phi_k^dag phi_k>`` and pair correlation ``c = <phi_k phi_-k>``."""

    n: np.ndarray
    c: np.ndarray

    @property
    def thermal_occupation(self):
        """sqrt((n + 1/2)^2 - |c|^2) - 1/2, the thermal part of the state."""
        return np.sqrt(np.maximum((self.n + 0.5) ** 2 - np.abs(self.c) ** 2, 0.25)) - 0.5


@dataclass(frozen=True)
class DelayedMoments:
    """``n(tau) = <phi_k^dag(t+tau) phi_k(t)>`` and ``c(tau) = <phi_k(t+tau) phi_-k(t)>``."""

    tau: np.ndarray
    n: np.ndarray
    c: np.ndarray


def _require_stable(mf: MeanFieldState):
    if not mf.stable:
        raise UnstableStateError(
            f"no stationary state: max growth rate {mf.gamma_max!r} >= gamma/2 = {mf.gamma / 2!r}"
        )


def _out(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def steady_moments(k, mf: MeanFieldState) -> ModeMoments:
    """Stationary (n_k, c_k); vectorized over ``k``."""
    _require_stable(mf)
    k = np.asarray(k, dtype=float)
    eps = k ** 2 / (2.0 * mf.m) - mf.Delta
    a = eps + mf.mu
    # omega^2 taken as the real number eps (eps + 2 mu), negative for diffusive modes
    den = eps * (eps + 2.0 * mf.mu) + mf.gamma ** 2 / 4.0
    n = mf.mu ** 2 / (2.0 * den)
    c = -0.5 * mf.pair_amplitude * (a + 0.5j * mf.gamma) / den
    return ModeMoments(_out(n), _out(np.asarray(c, dtype=complex)))


def delayed_moments(k, mf: MeanFieldState, tau) -> DelayedMoments:
    """Delayed moments from the quantum regression theorem; ``k`` and ``tau`` broadcast."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be >= 0; use stationarity, n(-tau) = conj(n(tau)), at the caller")
    mom = steady_moments(k, mf)
    ev = evolution_coeffs(k, mf, tau)
    eta = np.asarray(ev.eta)
    # the coefficients assume a real pair amplitude; restore the condensate phase
    zeta = np.asarray(ev.zeta) * mf.phase_factor
    d = np.asarray(ev.damping)
    n_tau = d * (np.conj(eta) * mom.n + np.conj(zeta) * mom.c)
    c_tau = d * (eta * mom.c + zeta * mom.n)
    tau_b = np.broadcast_to(tau, np.shape(n_tau))
    return DelayedMoments(_out(tau_b), _out(n_tau), _out(c_tau))


def moment_rhs(n, c, k, mf: MeanFieldState):
    """Time derivatives (dn/dt, dc/dt) of the quadratic moments."""
    a = epsilon(k, mf) + mf.mu
    P = mf.pair_amplitude
    dn = -mf.gamma * n + 2.0 * np.imag(P * np.conj(c))
    dc = -1j * ((2.0 * a - 1j * mf.gamma) * c + P * (2.0 * n + 1.0))
    return dn, dc


def _rhs_real(k, mf):
    def f(t, y):
        dn, dc = moment_rhs(y[0], complex(y[1], y[2]), k, mf)
        return [dn, dc.real, dc.imag]

    return f


def moment_trajectory(k: float, mf: MeanFieldState, t_eval: Sequence[float], n0=0.0, c0=0.0j):
    """Integrate the moment equations from (n0, c0) and sample them at ``t_eval``."""
    t_eval = np.asarray(t_eval, dtype=float)
    sol = solve_ivp(
        _rhs_real(k, mf), (0.0, float(t_eval[-1])), [n0, c0.real, c0.imag],
        method="DOP853", t_eval=t_eval, rtol=1e-12, atol=1e-14,
    )
    if not sol.success:
        raise ConvergenceError(sol.message)
    return sol.y[0], sol.y[1] + 1j * sol.y[2]


def ode_steady_oracle(k: float, mf: MeanFieldState, tol: float = 1e-12, max_chunks: int = 200):
    """Fixed point of the moment equations reached by time integration from (0, 0).

    Integrates in chunks of a few relaxation times until the residual norm of
    the right-hand side drops below ``tol``.
    """
    f = _rhs_real(k, mf)
    G = max(0.0, float(np.imag(omega(k, mf))))
    rate = mf.gamma - 2.0 * G
    chunk = 5.0 / rate if rate > 0 else 5.0 / mf.gamma
    y = np.zeros(3)
    t = 0.0
    for _ in range(max_chunks):
        if np.linalg.norm(f(t, y)) < tol:
            return ModeMoments(float(y[0]), complex(y[1], y[2]))
        sol = solve_ivp(f, (t, t + chunk), y, method="DOP853", rtol=1e-13, atol=1e-16)
        if not sol.success:
            raise ConvergenceError(sol.message)
        y = sol.y[:, -1]
        t += chunk
        if not np.all(np.isfinite(y)):
            break
    raise ConvergenceError(f"moment equations did not settle (t = {t!r}, residual {np.linalg.norm(f(t, y))!r})")


# ---------------------------------------------------------------- Langevin

def thread_count() -> int:
    """Worker threads for the Monte-Carlo oracle, from QFC_THREADS (default: CPU count)."""
    raw = os.environ.get("QFC_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


@dataclass(frozen=True)
class LangevinEstimate:
    """Monte-Carlo moments with standard errors (``c_se`` holds the SE of Re and Im parts)."""

    n: float
    c: complex
    n_se: float
    c_se: complex
    n_traj: int
    dt: float
    t_burn: float
    t_end: float
    flagged: bool
    tau: Optional[np.ndarray] = None
    n_tau: Optional[np.ndarray] = None
    c_tau: Optional[np.ndarray] = None
    n_tau_se: Optional[np.ndarray] = None
    c_tau_se: Optional[np.ndarray] = None

    def moments(self) -> ModeMoments:
        return ModeMoments(self.n, self.c)


def _run_block(seed, block, size, a, P, gamma, dt, n_burn, n_avg, lag_steps):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))

    def cnormal():
        # two complex normals with E|z|^2 = 1
        return rng.standard_normal(4 * size).view(np.complex128).reshape(2, size) / math.sqrt(2.0)

    # state (alpha_k, conj(alpha_-k)) obeys a plain linear SDE dx = A x dt + noise
    lam = -(1j * a + 0.5 * gamma)
    A = np.array([[lam, -1j * P], [np.conj(-1j * P), np.conj(lam)]])
    # stochastic Heun for linear drift and additive noise, written as one update
    M = np.eye(2) + A * dt + A @ A * (dt * dt / 2.0)
    N = (np.eye(2) + A * (dt / 2.0)) * math.sqrt(gamma * dt / 2.0)

    # vacuum Wigner samples: <|alpha|^2> = 1/2
    x1, y2 = cnormal() * math.sqrt(0.5)

    def step(x1, y2):
        w1, w2 = cnormal()
        return (M[0, 0] * x1 + M[0, 1] * y2 + N[0, 0] * w1 + N[0, 1] * w2,
                M[1, 0] * x1 + M[1, 1] * y2 + N[1, 0] * w1 + N[1, 1] * w2)

    for _ in range(n_burn):
        x1, y2 = step(x1, y2)
    o1, o2 = x1, np.conj(y2)
    lag_index = {int(s): j for j, s in enumerate(lag_steps)}
    nl = len(lag_steps)
    dn = np.zeros((nl, size), dtype=complex)
    dc = np.zeros((nl, size), dtype=complex)
    sum_n = np.zeros(size)
    sum_c = np.zeros(size, dtype=complex)
    for i in range(n_avg + 1):
        if i > 0:
            x1, y2 = step(x1, y2)
        sum_n += 0.5 * (x1.real ** 2 + x1.imag ** 2 + y2.real ** 2 + y2.imag ** 2)
        sum_c += x1 * np.conj(y2)
        j = lag_index.get(i)
        if j is not None:
            x2 = np.conj(y2)
            # symmetrize over the k <-> -k labels
            dn[j] = 0.5 * (np.conj(x1) * o1 + y2 * o2)
            dc[j] = 0.5 * (x1 * o2 + x2 * o1)
    return sum_n / (n_avg + 1) - 0.5, sum_c / (n_avg + 1), dn, dc


def _mean_se(x, axis=-1):
    m = np.mean(x, axis=axis)
    se = np.std(x, axis=axis, ddof=1) / math.sqrt(x.shape[axis])
    return m, se


def _complex_se(z, axis=-1):
    m = np.mean(z, axis=axis)
    _, sr = _mean_se(z.real, axis)
    _, si = _mean_se(z.imag, axis)
    return m, sr + 1j * si


def langevin_oracle(
    k: float,
    mf: MeanFieldState,
    n_traj: int = 10_000,
    seed: int = 0,
    dt: Optional[float] = None,
    t_end: Optional[float] = None,
    *,
    taus: Optional[Sequence[float]] = None,
    se_tol: Optional[float] = None,
    block_size: int = 2500,
) -> LangevinEstimate:
    """Monte-Carlo estimate of (n_k, c_k) from the linear Langevin equation.

    Works with symmetrically ordered c-number amplitudes (truncated Wigner,
    exact for a linear system): vacuum input noise of strength gamma/2, and
    the symmetric-ordering offset 1/2 subtracted from ``|alpha|^2``. The
    integrator is stochastic Heun. After the burn-in each trajectory is time
    averaged up to ``t_end``; standard errors come from the spread across
    trajectories.

    With ``taus``, delayed moments are sampled too, using the end of the
    burn-in as time origin. The ordering offsets of the two-time correlators
    are the commutators, taken from a matrix exponential of the drift.
    """
    a = float(epsilon(k, mf) + mf.mu)
    P = complex(mf.pair_amplitude)
    gamma = mf.gamma
    w = complex(omega(k, mf))
    G = max(0.0, w.imag)
    rate = gamma - 2.0 * G
    if rate <= 0:
        raise UnstableStateError(f"mode k = {k!r} grows: Gamma_k = {G!r} >= gamma/2")
    if dt is None:
        dt = 0.05 / (abs(a) + abs(mf.mu) + gamma)
    if dt * max(abs(w), gamma) > 0.05:
        raise ValueError(f"dt = {dt!r} too coarse: need dt * max(|omega_k|, gamma) <= 0.05")
    t_burn = max(10.0 / gamma, 10.0 / rate)
    tau_arr = None if taus is None else np.asarray(taus, dtype=float)
    if tau_arr is not None and np.any(tau_arr < 0):
        raise ValueError("taus must be >= 0")
    if t_end is None:
        span = 5.0 / rate
        if tau_arr is not None and tau_arr.size:
            span = max(span, float(tau_arr.max()))
        t_end = t_burn + span
    if t_end <= t_burn:
        raise ValueError(f"t_end = {t_end!r} must exceed the burn-in {t_burn!r}")
    n_burn = int(math.ceil(t_burn / dt))
    n_avg = int(math.floor((t_end - n_burn * dt) / dt))
    lag_steps = np.array([], dtype=int) if tau_arr is None else np.rint(tau_arr / dt).astype(int)
    if lag_steps.size and lag_steps.max() > n_avg:
        raise ValueError("largest tau exceeds t_end - burn-in")

    sizes = [block_size] * (n_traj // block_size)
    if n_traj % block_size:
        sizes.append(n_traj % block_size)
    args = [(seed, b, s, a, P, gamma, dt, n_burn, n_avg, lag_steps) for b, s in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=min(thread_count(), len(args))) as pool:
        parts = list(pool.map(lambda x: _run_block(*x), args))
    n_s = np.concatenate([p[0] for p in parts])
    c_s = np.concatenate([p[1] for p in parts])
    n_m, n_se = _mean_se(n_s)
    c_m, c_se = _complex_se(c_s)
    flagged = bool(se_tol is not None and max(n_se, abs(c_se)) > se_tol)

    extra = {}
    if tau_arr is not None:
        tau_used = lag_steps * dt
        dn = np.concatenate([p[2] for p in parts], axis=1)
        dc = np.concatenate([p[3] for p in parts], axis=1)
        wn, wn_se = _complex_se(dn)
        wc, wc_se = _complex_se(dc)
        L = np.array([[a, P], [-np.conj(P), -a]]) - 0.5j * gamma * np.eye(2)
        M = np.array([expm(-1j * L * t) for t in tau_used]).reshape(-1, 2, 2)
        extra = dict(
            tau=tau_used,
            n_tau=wn - 0.5 * np.conj(M[:, 0, 0]),
            c_tau=wc - 0.5 * M[:, 0, 1],
            n_tau_se=wn_se,
            c_tau_se=wc_se,
        )
    return LangevinEstimate(
        float(n_m), complex(c_m), float(n_se), complex(c_se), int(n_traj), float(dt),
        float(n_burn * dt), float((n_burn + n_avg) * dt), flagged, **extra,
    )
