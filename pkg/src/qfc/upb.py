"""Gaussian output states and unconventional photon blockade.

A single Bogoliubov pair ``(phi_k, phi_-k)`` is combined on a beam splitter
and interfered with a coherent field,

    sigma_k = alpha_bar e^{i zeta} + (phi_k e^{i phi_plus} + phi_-k e^{i phi_minus}) / sqrt(2),

which gives a displaced squeezed thermal state. Antibunching is strongest
when the squeezing sits in the amplitude quadrature (total phase ``eta_opt``)
and the displacement takes the value ``alpha_opt``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import List

import numpy as np
from scipy.optimize import curve_fit

from .correlations import delayed_moments, steady_moments
from .errors import NoOptimalDisplacementError, UnphysicalStateError
from .params import MeanFieldState

__all__ = [
    "GaussianSingleMode",
    "InterferenceConfig",
    "moments_from_squeeze",
    "squeeze_params_from_moments",
    "assemble_output",
    "g2_delay",
    "eta_opt",
    "alpha_opt",
    "g2_opt",
    "optimal_config",
    "upb_scan",
    "fit_damped_oscillation",
]


def _wrap(theta: float) -> float:
    """Map an angle to (-pi, pi]."""
    w = math.remainder(theta, 2.0 * math.pi)
    return math.pi if w == -math.pi else w


def moments_from_squeeze(n_th: float, r: float, theta: float):
    """(n, c) of a squeezed thermal state with thermal occupation ``n_th``.

    >>> n, c = moments_from_squeeze(0.0, 1.0, 0.0)
    >>> round(n, 5), round(abs(c), 5)
    (1.3811, 1.81343)
    """
    if n_th < 0 or r < 0:
        raise ValueError(f"need n_th >= 0 and r >= 0 (got {n_th!r}, {r!r})")
    h = n_th + 0.5
    n = h * math.cosh(2.0 * r) - 0.5
    c = -h * cmath.exp(1j * theta) * math.sinh(2.0 * r)
    return n, c


def squeeze_params_from_moments(n: float, c: complex, tol: float = 1e-12):
    """Invert :func:`moments_from_squeeze`: returns (n_th, r, theta).

    ``theta`` is 0 for an unsqueezed state and otherwise lies in (-pi, pi].
    """
    h = n + 0.5
    ac = abs(c)
    det = h * h - ac * ac
    if n < -tol or det < 0.25 - tol * max(1.0, h * h):
        raise UnphysicalStateError(
            f"(n, |c|) = ({n!r}, {ac!r}) violates (n + 1/2)^2 - |c|^2 >= 1/4"
        )
    n_th = max(math.sqrt(max(det, 0.25)) - 0.5, 0.0)
    r = 0.5 * math.atanh(min(ac / h, 1.0)) if ac > 0 else 0.0
    theta = _wrap(cmath.phase(c) - math.pi) if ac > 0 else 0.0
    return n_th, r, theta


@dataclass(frozen=True)
class GaussianSingleMode:
    """Displaced Gaussian state: coherent part ``alpha`` plus fluctuations (n, c)."""

    alpha: complex
    n: float
    c: complex

    @classmethod
    def from_squeeze(cls, alpha: complex, n_th: float, r: float, theta: float) -> "GaussianSingleMode":
        n, c = moments_from_squeeze(n_th, r, theta)
        return cls(complex(alpha), n, c)

    @property
    def squeeze_params(self):
        return squeeze_params_from_moments(self.n, self.c)

    @property
    def n_th(self) -> float:
        return self.squeeze_params[0]

    @property
    def r(self) -> float:
        return self.squeeze_params[1]

    @property
    def theta(self) -> float:
        return self.squeeze_params[2]

    @property
    def occupation(self) -> float:
        """Total <sigma^dag sigma>."""
        return abs(self.alpha) ** 2 + self.n

    @property
    def pair_moment(self) -> complex:
        """Total <sigma sigma>."""
        return self.alpha ** 2 + self.c

    def is_physical(self, tol: float = 1e-12) -> bool:
        return (self.n + 0.5) ** 2 - abs(self.c) ** 2 >= 0.25 - tol

    def g2(self) -> float:
        """Equal-time second-order coherence."""
        a2 = abs(self.alpha) ** 2
        num = 2.0 * a2 * self.n + 2.0 * (np.conj(self.alpha) ** 2 * self.c).real + self.n ** 2 + abs(self.c) ** 2
        den = (a2 + self.n) ** 2
        return 1.0 + num / den


@dataclass(frozen=True)
class InterferenceConfig:
    """Selected momentum, beam-splitter arm phases and the coherent displacement."""

    k: float
    alpha_bar: float = 0.0
    zeta: float = 0.0
    phi_plus: float = 0.0
    phi_minus: float = 0.0

    def __post_init__(self):
        if self.alpha_bar < 0:
            raise ValueError(f"alpha_bar must be >= 0 (got {self.alpha_bar!r})")

    @property
    def arm_phase(self) -> float:
        return self.phi_plus + self.phi_minus

    @property
    def eta(self) -> float:
        """Total phase between squeezing and displacement."""
        return self.phi_plus + self.phi_minus - 2.0 * self.zeta


def assemble_output(mf: MeanFieldState, config: InterferenceConfig) -> GaussianSingleMode:
    mom = steady_moments(config.k, mf)
    alpha = config.alpha_bar * cmath.exp(1j * config.zeta)
    return GaussianSingleMode(alpha, float(mom.n), complex(mom.c) * cmath.exp(1j * config.arm_phase))


def g2_delay(mf: MeanFieldState, config: InterferenceConfig, tau):
    """Intensity correlation g2(tau) of the interfered output mode; vectorized over ``tau``."""
    d = delayed_moments(config.k, mf, tau)
    n0 = float(steady_moments(config.k, mf).n)
    a2 = config.alpha_bar ** 2
    lin = 2.0 * a2 * np.real(d.n + d.c * np.exp(1j * config.eta))
    quad = np.abs(d.n) ** 2 + np.abs(d.c) ** 2
    den = (a2 + n0) ** 2
    if den == 0.0:
        # empty mode and no displacement: nothing to correlate
        out = np.full(np.shape(lin), np.nan)
    else:
        out = 1.0 + (lin + quad) / den
    return out.item() if np.ndim(out) == 0 else out


def eta_opt(mf: MeanFieldState, k: float) -> float:
    """Total phase that puts the squeezing in the amplitude quadrature."""
    c = complex(steady_moments(k, mf).c)
    return math.pi - cmath.phase(c)


def _check_opt(n, cbar):
    if not cbar > n:
        raise NoOptimalDisplacementError(f"|c| = {cbar!r} <= n = {n!r}: no antibunching displacement")


def alpha_opt(n: float, cbar: float) -> float:
    """Displacement amplitude minimizing g2(0) at the optimal phase.

    >>> round(alpha_opt(1.0, 2.0), 6)
    2.44949
    """
    _check_opt(n, cbar)
    return math.sqrt((cbar + n) * cbar / (cbar - n))


def g2_opt(n: float, cbar: float) -> float:
    """Minimal g2(0) over displacement amplitude and phase."""
    _check_opt(n, cbar)
    return 1.0 - (cbar - n) ** 2 / (cbar ** 2 + 2.0 * cbar * n - n ** 2)


def optimal_config(mf: MeanFieldState, k: float) -> InterferenceConfig:
    """Config at (alpha_opt, eta_opt) with zero arm phases."""
    mom = steady_moments(k, mf)
    a = alpha_opt(float(mom.n), abs(complex(mom.c)))
    # eta = -2 zeta with vanishing arm phases
    return InterferenceConfig(k=float(k), alpha_bar=a, zeta=-0.5 * eta_opt(mf, k))


def upb_scan(mf: MeanFieldState, k_grid) -> List[dict]:
    """Per-k squeezing parameters and optimal antibunching, in ascending k.

    Rows where no displacement antibunches carry ``None`` in the optimal columns.
    """
    ks = np.sort(np.asarray(k_grid, dtype=float))
    mom = steady_moments(ks, mf)
    rows = []
    for k, n, c in zip(ks, np.atleast_1d(mom.n), np.atleast_1d(mom.c)):
        n, c = float(n), complex(c)
        n_th, r, theta = squeeze_params_from_moments(n, c)
        row = {"k": float(k), "n": n, "c_re": c.real, "c_im": c.imag,
               "n_th": n_th, "r": r, "theta": theta,
               "alpha_opt": None, "eta_opt": None, "g2_opt": None}
        if abs(c) > n:
            row.update(alpha_opt=alpha_opt(n, abs(c)), eta_opt=math.pi - cmath.phase(c), g2_opt=g2_opt(n, abs(c)))
        rows.append(row)
    return rows


def _damped(t, kappa, w, a1, b1, c0, a2, b2):
    # amplitude-level term at w plus its square-law companion at 0 and 2w
    e = np.exp(-kappa * t)
    return e * (a1 * np.cos(w * t) + b1 * np.sin(w * t)) + e * e * (
        c0 + a2 * np.cos(2.0 * w * t) + b2 * np.sin(2.0 * w * t))


def fit_damped_oscillation(tau, y, baseline: float = 1.0):
    """Fit ``y - baseline`` to a damped oscillation and return ``(w, kappa)``.

    The model is ``e^{-kappa t}(A cos wt + B sin wt)`` plus the terms quadratic
    in the fluctuations, which decay at ``2 kappa`` and oscillate at 0 and
    ``2w``. The starting guess takes ``w`` from the spacing of zero crossings
    and ``kappa`` from the log of successive extrema. ``kappa`` is the
    amplitude rate; the intensity envelope decays at ``2 kappa``.
    """
    tau = np.asarray(tau, dtype=float)
    z = np.asarray(y, dtype=float) - baseline
    s = np.signbit(z)
    idx = np.nonzero(s[1:] != s[:-1])[0]
    if idx.size < 3:
        raise ValueError("too few oscillations to fit")
    # linear interpolation of crossing times
    tc = tau[idx] - z[idx] * (tau[idx + 1] - tau[idx]) / (z[idx + 1] - z[idx])
    w0 = math.pi / float(np.mean(np.diff(tc)))
    peaks = [np.max(np.abs(z[i:j + 1])) for i, j in zip(idx[:-1], idx[1:])]
    mids = 0.5 * (tc[:-1] + tc[1:])
    kappa0 = max(-np.polyfit(mids, np.log(peaks), 1)[0], 1e-6)
    amp0 = float(np.exp(np.polyval(np.polyfit(mids, np.log(peaks), 1), 0.0)))
    p0 = [kappa0, w0, amp0, 0.0, 0.0, 0.0, 0.0]
    popt, _ = curve_fit(_damped, tau, z, p0=p0, maxfev=50000)
    return abs(float(popt[1])), float(popt[0])
