"""Bogoliubov spectrum, mode classification and time-evolution coefficients.

The linearized fluctuations obey ``i d/dt (phi_k, phi_-k^dag) = (B_k - i gamma/2)(...)``
with ``B_k = [[eps + mu, mu], [-mu, -eps - mu]]`` and ``eps = k^2/2m - Delta``.
All functions here use a real pair amplitude ``mu``; the condensate phase is
restored by the callers (see :mod:`qfc.correlations`).

Modes fall in three classes according to the sign of ``omega_k^2 = eps (eps + 2 mu)``:

* propagating, ``omega_k^2 > 0``; this includes the inner disk ``eps < -2 mu``
  that appears when ``Delta > 2 mu``,
* diffusive, ``-2 mu < eps < 0``, where ``omega_k = i Gamma_k``,
* boundary, where ``omega_k^2`` vanishes to tolerance and both closed forms
  are singular.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModeError, RegimeError
from .params import MeanFieldState

__all__ = [
    "ModeClass",
    "ModeRecord",
    "EvolutionCoeffs",
    "BOUNDARY_TOL",
    "epsilon",
    "omega_squared",
    "omega",
    "classify",
    "bogoliubov_matrix",
    "coeffs_propagating",
    "coeffs_diffusive",
    "transformation_matrix",
    "evolution_coeffs",
    "propagator",
    "mode_record",
    "diffusive_radii",
]

#: relative tolerance on |omega_k^2| / mu^2 below which a mode is a boundary mode
BOUNDARY_TOL = 1e-10


class ModeClass(str, enum.Enum):
    PROPAGATING = "propagating"
    DIFFUSIVE = "diffusive"
    BOUNDARY = "boundary"

    def __str__(self) -> str:
        return self.value


def _scalar_or_array(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def epsilon(k, mf: MeanFieldState):
    """Shifted single-particle dispersion k^2/2m - Delta."""
    k = np.asarray(k, dtype=float)
    return _scalar_or_array(k ** 2 / (2.0 * mf.m) - mf.Delta)


def omega_squared(k, mf: MeanFieldState):
    eps = np.asarray(epsilon(k, mf))
    return _scalar_or_array(eps * (eps + 2.0 * mf.mu))


def omega(k, mf: MeanFieldState):
    """Bogoliubov frequency, principal branch with ``Im omega >= 0``."""
    w2 = np.asarray(omega_squared(k, mf), dtype=float)
    out = np.where(w2 >= 0, np.sqrt(np.abs(w2)) + 0j, 1j * np.sqrt(np.abs(w2)))
    return _scalar_or_array(out)


def _class_codes(w2, mu):
    w2 = np.asarray(w2, dtype=float)
    tol = BOUNDARY_TOL * mu ** 2
    boundary = np.abs(w2) < tol if mu > 0 else w2 == 0
    diffusive = (w2 < 0) & ~boundary
    return boundary, diffusive


def classify(k, mf: MeanFieldState):
    """Mode class for each momentum: a :class:`ModeClass` or an object array of them."""
    boundary, diffusive = _class_codes(omega_squared(k, mf), mf.mu)
    codes = np.where(boundary, 2, np.where(diffusive, 1, 0))
    lookup = np.array([ModeClass.PROPAGATING, ModeClass.DIFFUSIVE, ModeClass.BOUNDARY], dtype=object)
    return lookup[codes] if np.ndim(codes) else lookup[int(codes)]


def diffusive_radii(mf: MeanFieldState):
    """Inner and outer radius of the diffusive set (None when it is empty).

    The set is the disk ``k < sqrt(2 m Delta)`` for ``0 < Delta <= 2 mu`` and the
    ring ``sqrt(2m(Delta - 2mu)) < k < sqrt(2 m Delta)`` for ``Delta > 2 mu``.
    """
    if mf.Delta <= 0 or mf.mu == 0:
        return None
    outer = np.sqrt(2.0 * mf.m * mf.Delta)
    inner = np.sqrt(2.0 * mf.m * max(mf.Delta - 2.0 * mf.mu, 0.0))
    return float(inner), float(outer)


def bogoliubov_matrix(k: float, mf: MeanFieldState) -> np.ndarray:
    a = epsilon(k, mf) + mf.mu
    return np.array([[a, mf.mu], [-mf.mu, -a]], dtype=complex)


def coeffs_propagating(k, mf: MeanFieldState):
    """Bosonic Bogoliubov amplitudes (u_k, v_k) of a propagating mode.

    For ``eps > 0`` these are the textbook ``u, v = +-sqrt((eps+mu)/2omega +- 1/2)``.
    In the inner disk ``eps < -2 mu`` the bosonic quasiparticle is the one at
    frequency ``-omega_k``; there ``u = sqrt(|eps+mu|/2omega + 1/2)`` and
    ``v = +sqrt(|eps+mu|/2omega - 1/2)``. In both cases ``u^2 - v^2 = 1``.
    """
    eps = np.asarray(epsilon(k, mf), dtype=float)
    w2 = eps * (eps + 2.0 * mf.mu)
    boundary, diffusive = _class_codes(w2, mf.mu)
    if np.any(diffusive | boundary):
        raise RegimeError("coeffs_propagating called on a diffusive or boundary mode")
    w = np.sqrt(w2)
    a = eps + mf.mu
    x = np.abs(a) / (2.0 * w)
    u = np.sqrt(x + 0.5)
    v = np.sqrt(np.maximum(x - 0.5, 0.0)) * np.where(a > 0, -1.0, 1.0)
    return _scalar_or_array(u), _scalar_or_array(v)


def coeffs_diffusive(k, mf: MeanFieldState):
    """Amplitudes (r_k, s_k) of a diffusive mode.

    ``s = sqrt(mu / 2 Gamma)`` and ``r = -mu s / (eps + mu + i Gamma)``. With
    this choice ``r s* - s r* = i`` and the columns ``(r, s)``, ``(r*, s*)``
    are eigenvectors of ``B_k`` with eigenvalues ``-i Gamma`` and ``+i Gamma``.
    """
    eps = np.asarray(epsilon(k, mf), dtype=float)
    w2 = eps * (eps + 2.0 * mf.mu)
    boundary, diffusive = _class_codes(w2, mf.mu)
    if np.any(boundary):
        raise DegenerateModeError("Gamma_k vanishes on the regime boundary")
    if not np.all(diffusive):
        raise RegimeError("coeffs_diffusive called on a propagating mode")
    Gamma = np.sqrt(-w2)
    s = np.sqrt(mf.mu / (2.0 * Gamma)) + 0j
    r = -mf.mu / (eps + mf.mu + 1j * Gamma) * s
    return _scalar_or_array(r), _scalar_or_array(s)


def transformation_matrix(k: float, mf: MeanFieldState):
    """Columns diagonalizing B_k, and the diagonal they produce.

    Returns ``(U, D)`` with ``B_k U = U diag(D)``.
    """
    cls = classify(k, mf)
    if cls is ModeClass.DIFFUSIVE:
        r, s = coeffs_diffusive(k, mf)
        U = np.array([[r, np.conj(r)], [s, np.conj(s)]], dtype=complex)
        G = omega(k, mf).imag
        return U, np.array([-1j * G, 1j * G])
    if cls is ModeClass.BOUNDARY:
        raise DegenerateModeError("B_k is not diagonalizable on the regime boundary")
    u, v = coeffs_propagating(k, mf)
    U = np.array([[u, v], [v, u]], dtype=complex)
    w = omega(k, mf).real
    sign = 1.0 if epsilon(k, mf) > 0 else -1.0
    return U, np.array([sign * w, -sign * w], dtype=complex)


@dataclass(frozen=True)
class EvolutionCoeffs:
    """phi_k(t) = damping * (eta phi_k(0) + zeta phi_-k^dag(0)) + noise."""

    eta: np.ndarray
    zeta: np.ndarray
    damping: np.ndarray


def _sinc_propagator(a, mu, w2, t):
    """exp(-i B t) first row via B^2 = omega^2 I, regular at omega = 0."""
    w = np.sqrt(w2 + 0j)
    wt = w * t
    small = np.abs(wt) < 1e-4
    wt_safe = np.where(small, 1.0, wt)
    # sin(wt)/w, with its Taylor series near wt = 0
    sinc_t = np.where(small, t * (1.0 - wt ** 2 / 6.0 + wt ** 4 / 120.0), np.sin(wt_safe) / np.where(small, 1.0, w))
    eta = np.cos(wt) - 1j * a * sinc_t
    zeta = -1j * mu * sinc_t
    return eta, zeta


def evolution_coeffs(k, mf: MeanFieldState, t) -> EvolutionCoeffs:
    """Time-dependent Bogoliubov coefficients eta_k(t), zeta_k(t).

    ``k`` and ``t`` broadcast against each other. Each mode uses the closed form
    of its regime:

    * ``eps > 0``: ``eta = u^2 e^{-iwt} - v^2 e^{iwt}``, ``zeta = 2i u v sin(wt)``
    * diffusive: ``eta = i(s r* e^{Gt} - s* r e^{-Gt})``, ``zeta = -2i |s|^2 sinh(Gt)``
    * inner disk ``eps < -2mu``: ``eta = u^2 e^{iwt} - v^2 e^{-iwt}``,
      ``zeta = -2i u v sin(wt)``

    Boundary modes use ``cos(wt) - i B sin(wt)/w``, which is regular there.
    """
    k = np.asarray(k, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    k, t = np.broadcast_arrays(k, t)
    mu = mf.mu
    eps = k ** 2 / (2.0 * mf.m) - mf.Delta
    a = eps + mu
    w2 = eps * (eps + 2.0 * mu)
    boundary, diffusive = _class_codes(w2, mu)
    outer = ~boundary & ~diffusive & (eps > 0)
    inner = ~boundary & ~diffusive & (eps <= 0)

    eta = np.empty(k.shape, dtype=complex)
    zeta = np.empty(k.shape, dtype=complex)

    if np.any(outer | inner):
        sel = outer | inner
        w = np.sqrt(w2[sel])
        x = np.abs(a[sel]) / (2.0 * w)
        u2 = x + 0.5
        v2 = x - 0.5
        uv = np.sqrt(u2 * np.maximum(v2, 0.0))
        ts = t[sel]
        ph = np.exp(-1j * w * ts)
        is_outer = outer[sel]
        # outer: v = -sqrt(v2); inner: v = +sqrt(v2)
        eta[sel] = np.where(is_outer, u2 * ph - v2 / ph, u2 / ph - v2 * ph)
        s = np.sin(w * ts)
        zeta[sel] = np.where(is_outer, 2j * (-uv) * s, -2j * uv * s)

    if np.any(diffusive):
        G = np.sqrt(-w2[diffusive])
        s_amp = np.sqrt(mu / (2.0 * G))
        r_amp = -mu / (a[diffusive] + 1j * G) * s_amp
        ts = t[diffusive]
        grow = np.exp(G * ts)
        eta[diffusive] = 1j * (s_amp * np.conj(r_amp) * grow - s_amp * r_amp / grow)
        zeta[diffusive] = -2j * s_amp ** 2 * np.sinh(G * ts)

    if np.any(boundary):
        e_b, z_b = _sinc_propagator(a[boundary], mu, w2[boundary], t[boundary])
        eta[boundary] = e_b
        zeta[boundary] = z_b

    # exact identity at t = 0 (the regime formulas reach it only up to rounding)
    eta[t == 0] = 1.0
    damping = np.exp(-mf.gamma * t / 2.0)
    return EvolutionCoeffs(_scalar_or_array(eta), _scalar_or_array(zeta), _scalar_or_array(damping))


def propagator(k, mf: MeanFieldState, t):
    """First row of exp(-i (B_k - i gamma/2) t) including the loss factor.

    Uses the identity B_k^2 = omega_k^2 I, so it is a single closed form for
    every regime. Intended for boundary modes and as an internal cross-check.
    """
    k = np.asarray(k, dtype=float)
    t = np.asarray(t, dtype=float)
    eps = k ** 2 / (2.0 * mf.m) - mf.Delta
    a = eps + mf.mu
    eta, zeta = _sinc_propagator(a, mf.mu, eps * (eps + 2.0 * mf.mu), t)
    d = np.exp(-mf.gamma * t / 2.0)
    return _scalar_or_array(d * eta), _scalar_or_array(d * zeta)


@dataclass(frozen=True)
class ModeRecord:
    k: float
    epsilon: float
    omega: complex
    mode_class: ModeClass
    u: complex | None = None
    v: complex | None = None
    r: complex | None = None
    s: complex | None = None


def mode_record(k: float, mf: MeanFieldState) -> ModeRecord:
    cls = classify(k, mf)
    rec = dict(k=float(k), epsilon=epsilon(k, mf), omega=omega(k, mf), mode_class=cls)
    if cls is ModeClass.PROPAGATING:
        u, v = coeffs_propagating(k, mf)
        rec.update(u=complex(u), v=complex(v))
    elif cls is ModeClass.DIFFUSIVE:
        r, s = coeffs_diffusive(k, mf)
        rec.update(r=complex(r), s=complex(s))
    return ModeRecord(**rec)
