"""Noise sources: static disorder, pure dephasing and incoherent population."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .bogoliubov import epsilon, omega_squared
from .correlations import ModeMoments, _require_stable
from .errors import ResonantResponseError
from .params import MeanFieldState
from .upb import g2_opt, squeeze_params_from_moments

__all__ = [
    "DisorderMode",
    "NoiseBudget",
    "DISORDER_PASS_RATIO",
    "disorder_response",
    "disorder_ratio",
    "disorder_tolerance",
    "dephasing_budget",
    "thermal_degradation",
    "noise_budget",
]

#: "much smaller than" is read as a ratio below this value
DISORDER_PASS_RATIO = 0.1


@dataclass(frozen=True)
class DisorderMode:
    """Linear response of the condensate to one Fourier component of a static potential."""

    k: float
    V_k: complex
    dpsi: complex
    dpsi_conj_minus: complex
    dn: float
    dn_closed: float

    @property
    def mismatch(self) -> float:
        """Relative difference between the direct solve and the closed form."""
        scale = max(abs(self.dn), abs(self.dn_closed))
        return 0.0 if scale == 0 else abs(self.dn - self.dn_closed) / scale


def disorder_response(k: float, mf: MeanFieldState, V_k: complex, V_minus: Optional[complex] = None) -> DisorderMode:
    """Solve L_k (dpsi_k, dpsi*_-k) = (-V_k psi0, V_-k psi0*) and compare with the closed form.

    ``V_minus`` defaults to ``V_k`` (a real, inversion-symmetric potential);
    the closed form assumes this.
    """
    _require_stable(mf)
    Vm = V_k if V_minus is None else V_minus
    a = epsilon(k, mf) + mf.mu
    P = mf.pair_amplitude
    hg = 0.5j * mf.gamma
    L = np.array([[a - hg, P], [-np.conj(P), -a - hg]], dtype=complex)
    det = np.linalg.det(L)
    if abs(det) < 1e-14:
        raise ResonantResponseError(f"response matrix is singular at k = {k!r} (det = {det!r})")
    rhs = np.array([-V_k * mf.psi0, Vm * np.conj(mf.psi0)], dtype=complex)
    sol = np.linalg.solve(L, rhs)
    eps = epsilon(k, mf)
    den = omega_squared(k, mf) + mf.gamma ** 2 / 4.0
    closed = abs(V_k) ** 2 * mf.n0 * (eps ** 2 + mf.gamma ** 2 / 4.0) / den ** 2
    return DisorderMode(float(k), complex(V_k), complex(sol[0]), complex(sol[1]), float(abs(sol[0]) ** 2), float(closed))


def disorder_ratio(g: float, mu: float, V_rms: float, corr_volume: float) -> float:
    """<V^2> dV_c / (g mu / 2): disorder scattering relative to pair creation."""
    if g <= 0 or mu <= 0:
        raise ValueError("need g > 0 and mu > 0")
    if V_rms < 0 or corr_volume < 0:
        raise ValueError("need V_rms >= 0 and corr_volume >= 0")
    return 2.0 * V_rms ** 2 * corr_volume / (g * mu)


@dataclass(frozen=True)
class NoiseBudget:
    """Collected noise figures; unset entries are ``None``."""

    disorder_ratio: Optional[float] = None
    disorder_ok: Optional[bool] = None
    dephasing_density: Optional[float] = None
    dephasing_product: Optional[float] = None
    cw_ok: Optional[bool] = None
    n_inc: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def disorder_tolerance(mf: MeanFieldState, V_rms: float, corr_volume: float) -> NoiseBudget:
    r = disorder_ratio(mf.params.g, mf.mu, V_rms, corr_volume)
    return NoiseBudget(disorder_ratio=r, disorder_ok=r < DISORDER_PASS_RATIO)


def dephasing_budget(gamma_deph: float, mf: MeanFieldState, lambda_db: float) -> NoiseBudget:
    """Stationary incoherent density from phonon dephasing and the CW condition.

    The CW scheme is viable iff ``gamma_deph * n0 * lambda_db^2 < gamma``.

    >>> from qfc.params import steady_state
    >>> b = dephasing_budget(1.0, steady_state(1e-3, -1.0), 1.0)
    >>> round(b.dephasing_density, 12), b.cw_ok
    (10.0, False)
    """
    if gamma_deph < 0 or lambda_db < 0:
        raise ValueError("need gamma_deph >= 0 and lambda_db >= 0")
    prod = gamma_deph * mf.n0 * lambda_db ** 2
    return NoiseBudget(dephasing_density=prod / mf.gamma, dephasing_product=prod, cw_ok=prod < mf.gamma)


def thermal_degradation(moments: ModeMoments, n_inc: float) -> dict:
    """Squeezing and optimal antibunching before and after adding ``n_inc`` to n_k.

    Raises :class:`~qfc.errors.NoOptimalDisplacementError` once the extra
    population makes ``|c_k| <= n_k``.
    """
    if n_inc < 0:
        raise ValueError(f"n_inc must be >= 0 (got {n_inc!r})")
    n, c = float(moments.n), complex(moments.c)
    th0, r0, _ = squeeze_params_from_moments(n, c)
    th1, r1, _ = squeeze_params_from_moments(n + n_inc, c)
    g0 = g2_opt(n, abs(c))
    g1 = g2_opt(n + n_inc, abs(c))
    return {"n_inc": n_inc, "n_th": th0, "r": r0, "n_th_degraded": th1, "r_degraded": r1,
            "g2_opt": g0, "g2_opt_degraded": g1, "g2_opt_shift": g1 - g0}


def noise_budget(mf: MeanFieldState, *, V_rms=None, corr_volume=None, gamma_deph=None,
                 lambda_db=None, n_inc=None) -> NoiseBudget:
    """Combine whichever noise figures have their inputs supplied."""
    out = {}
    if V_rms is not None and corr_volume is not None:
        out.update({k: v for k, v in disorder_tolerance(mf, V_rms, corr_volume).to_dict().items() if v is not None})
    if gamma_deph is not None and lambda_db is not None:
        out.update({k: v for k, v in dephasing_budget(gamma_deph, mf, lambda_db).to_dict().items() if v is not None})
    if n_inc is not None:
        if n_inc < 0:
            raise ValueError("n_inc must be >= 0")
        out["n_inc"] = float(n_inc)
    return NoiseBudget(**out)
