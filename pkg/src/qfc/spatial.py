"""Real-space correlations and filtered density-density correlation maps.

Isotropic mode sums are radial transforms,

    f(x, tau) = (1/2pi) int_0^inf k f_k(tau) J0(k x) dk.

The pair correlation falls off only as ``k^-2`` at large ``k`` (and ``n_k`` as
``k^-4``), so a bare truncated quadrature converges slowly in the cutoff. We
subtract a model of the large-``k`` behaviour, built from terms
``e^{-+i u tau} h_j(u)`` with ``u = k^2/2m`` and ``h_j(u) ~ u^-j``, whose full
transforms are known in closed form through the exponential integral E1. Only
the smooth, rapidly decaying difference is integrated numerically on
``[0, k_max]``, which makes the result converge to its infinite-cutoff limit
for every ``x > 0``. The single cell ``(x, tau) = (0, 0)`` carries the
logarithmic divergence of ``c`` and is evaluated with the bare cutoff instead.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import exp1, gammainc, j0

from .correlations import _require_stable, delayed_moments, thread_count
from .params import MeanFieldState

__all__ = [
    "RadialGrid",
    "FilterConfig",
    "CorrelationField",
    "G2Map",
    "hankel_moment",
    "g2_map",
    "temporal_band_metric",
    "band_velocity",
    "spatial_period",
    "antibunching_decay_time",
    "bessel_j0",
]

# number of inverse powers of u kept in the large-k models
_ORDER = 4


def bessel_j0(z):
    """Bessel function of the first kind, order zero."""
    return j0(z)


@dataclass(frozen=True)
class RadialGrid:
    """Output sampling and quadrature resolution.

    ``k_max=None`` means ``20 sqrt(m mu)`` (or ``20 sqrt(m gamma)`` for an
    empty cavity). ``n_k`` is the number of Simpson intervals on ``[0, k_max]``.
    """

    x: np.ndarray
    tau: np.ndarray
    k_max: Optional[float] = None
    n_k: int = 4096

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        tau = np.atleast_1d(np.asarray(self.tau, dtype=float))
        problems = []
        if np.any(x < 0):
            problems.append("x must be >= 0")
        if np.any(tau < 0):
            problems.append("tau must be >= 0")
        if x.size > 1 and np.any(np.diff(x) <= 0):
            problems.append("x grid must be strictly increasing")
        if tau.size > 1 and np.any(np.diff(tau) <= 0):
            problems.append("tau grid must be strictly increasing")
        if self.k_max is not None and not self.k_max > 0:
            problems.append("k_max must be > 0")
        if self.n_k < 2:
            problems.append("n_k must be >= 2")
        if problems:
            raise ValueError("; ".join(problems))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "n_k", int(self.n_k) + int(self.n_k) % 2)

    def cutoff(self, mf: MeanFieldState) -> float:
        if self.k_max is not None:
            return float(self.k_max)
        scale = mf.mu if mf.mu > 0 else mf.gamma
        return 20.0 * math.sqrt(mf.m * scale)

    def refined(self) -> "RadialGrid":
        """Twice the quadrature points and 1.5 times the cutoff."""
        return RadialGrid(self.x, self.tau, None if self.k_max is None else 1.5 * self.k_max, 2 * self.n_k)


@dataclass(frozen=True)
class FilterConfig:
    """Transmitted fraction of the condensate amplitude, ``psi_f = fraction * psi0``.

    ``k_mask`` (radius of the attenuating disk) is recorded but does not enter
    any result: the fluctuations are taken as fully transmitted.
    """

    fraction: float
    k_mask: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError(f"fraction must lie in [0, 1] (got {self.fraction!r})")


@dataclass(frozen=True)
class CorrelationField:
    """n(x, tau) and c(x, tau) on a grid (rows x, columns tau)."""

    x: np.ndarray
    tau: np.ndarray
    n: np.ndarray
    c: np.ndarray
    delta_n: float
    k_max: float
    n_k: int
    cutoff_dependent: np.ndarray
    convergence_delta: Optional[float] = None
    converged: Optional[bool] = None


@dataclass(frozen=True)
class G2Map:
    x: np.ndarray
    tau: np.ndarray
    g2: np.ndarray
    fraction: float
    field: CorrelationField
    cutoff_dependent: np.ndarray = field(repr=False)


# ------------------------------------------------------------ tail models

def _coefficients(mf: MeanFieldState, tau):
    """Large-u expansion of n_k(tau) and c_k(tau).

    Each moment is ``pref * sum_s e^{s i (u+b) tau} sum_j coef[s][j] / u^j``
    with ``s = -1, +1``. Returns dicts ``{s: [coef_1..coef_ORDER]}`` of arrays over tau.
    """
    mu, gm = mf.mu, mf.gamma
    b = mu - mf.Delta
    t = np.asarray(tau, dtype=float)
    I = 1j
    m2t = mu ** 2 * t
    z = np.zeros_like(t, dtype=complex)
    one = np.ones_like(t, dtype=complex)
    cm = [
        one,
        -(2 * b - I * gm - I * m2t) / 2,
        (8 * b ** 2 - 8 * I * b * gm - 8 * I * b * m2t - 2 * gm ** 2 - 2 * gm * m2t - m2t ** 2 + 6 * mu ** 2) / 8,
        -(48 * b ** 3 - 72 * I * b ** 2 * gm - 72 * I * b ** 2 * m2t - 36 * b * gm ** 2 - 36 * b * gm * m2t
          - 18 * b * m2t ** 2 + 108 * b * mu ** 2 + 6 * I * gm ** 3 + 6 * I * gm ** 2 * m2t
          + 3 * I * gm * m2t ** 2 - 30 * I * gm * mu ** 2 + I * m2t ** 3 - 24 * I * mu ** 2 * m2t) / 48,
    ]
    cp = [z, z, mu ** 2 / 4 * one, -mu ** 2 * (6 * b + I * gm + I * m2t) / 8]
    nm = [
        z,
        one / 2,
        -(4 * b - I * gm - I * m2t) / 4,
        (24 * b ** 2 - 12 * I * b * gm - 12 * I * b * m2t - 2 * gm ** 2 - 2 * gm * m2t - m2t ** 2 + 8 * mu ** 2) / 16,
    ]
    np_ = [
        z,
        one / 2,
        -(4 * b + I * gm + I * m2t) / 4,
        (24 * b ** 2 + 12 * I * b * gm + 12 * I * b * m2t - 2 * gm ** 2 - 2 * gm * m2t - m2t ** 2 + 8 * mu ** 2) / 16,
    ]
    damp = np.exp(-gm * t / 2.0)
    pref_c = -0.5 * mu * mf.phase_factor * damp
    pref_n = 0.5 * mu ** 2 * damp
    return b, pref_n, pref_c, {-1: nm, 1: np_}, {-1: cm, 1: cp}


def _h(u, p):
    """h_j(u) = int_0^p s^{j-1}/(j-1)! e^{-s u} ds = P(j, p u) / u^j, for j = 1..ORDER."""
    out = np.empty((_ORDER, u.size))
    pos = u > 0
    for j in range(1, _ORDER + 1):
        out[j - 1, pos] = gammainc(j, p * u[pos]) / u[pos] ** j
        out[j - 1, ~pos] = p ** j / math.factorial(j)
    return out


def _primitives(A, z):
    """I_l(z) = antiderivative of z^{l-1} e^{-A/z}, l = 0..ORDER-1 (A broadcast against z)."""
    A, z = np.broadcast_arrays(np.asarray(A, dtype=float), np.asarray(z, dtype=complex))
    res = []
    zero = A == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.where(zero, 1.0, A) / z
        e = np.where(zero, 1.0, np.exp(-y))
        I0 = np.where(zero, np.log(z), exp1(y))
    res.append(I0)
    prev = I0
    for n in range(1, _ORDER):
        cur = (z ** n * e - A * prev) / n
        res.append(cur)
        prev = cur
    return res


def _model_transform(x, tau, sign, p, m):
    """Closed-form radial transforms of e^{sign i u tau} h_j(u), j = 1..ORDER.

    Shape (ORDER, len(x), len(tau)). The (x, tau) = (0, 0) entry of j = 1
    diverges and is returned as nan.
    """
    X, T = np.meshgrid(x, tau, indexing="ij")
    A = m * X ** 2 / 2.0
    sig = -sign * T  # z = s + i sig along the path
    z1 = 1j * sig
    z2 = p + 1j * sig
    singular = (A == 0) & (sig == 0)
    z1s = np.where(singular, 1.0, z1)
    with np.errstate(divide="ignore", invalid="ignore"):
        hi = _primitives(A, z2)
        lo = _primitives(A, z1s)
    lo = [np.where(singular, 0.0, v) for v in lo]
    # at sig = 0 and A > 0 the lower limit z = 0 contributes zero to every I_l
    at_zero = (sig == 0) & (A > 0)
    lo = [np.where(at_zero, 0.0, v) for v in lo]
    out = np.empty((_ORDER,) + X.shape, dtype=complex)
    for j in range(1, _ORDER + 1):
        acc = np.zeros(X.shape, dtype=complex)
        for l in range(j):
            coef = math.comb(j - 1, l) * (-1j * sig) ** (j - 1 - l) if j - 1 - l else math.comb(j - 1, l)
            acc = acc + coef * (hi[l] - lo[l])
        out[j - 1] = acc * m / (2.0 * math.pi * math.factorial(j - 1))
    with np.errstate(invalid="ignore"):
        out[0] = np.where(singular, np.nan, out[0])
    return out


# ------------------------------------------------------------ transforms

def _simpson_weights(n, h):
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def _transform(mf: MeanFieldState, x, tau, k_max, n_k):
    k = np.linspace(0.0, k_max, n_k + 1)
    u = k ** 2 / (2.0 * mf.m)
    kern = bessel_j0(np.outer(x, k)) * (_simpson_weights(n_k, k_max / n_k) * k / (2.0 * math.pi))
    b, pref_n, pref_c, cn, cc = _coefficients(mf, tau)
    p = 1.0 / max(abs(b), mf.mu, mf.gamma)
    h = _h(u, p)

    def column(i):
        t = tau[i]
        d = delayed_moments(k, mf, t)
        rn = np.asarray(d.n, dtype=complex)
        rc = np.asarray(d.c, dtype=complex)
        for s in (-1, 1):
            ph = np.exp(1j * s * (u + b) * t)
            rn = rn - pref_n[i] * ph * sum(cn[s][j][i] * h[j] for j in range(_ORDER))
            rc = rc - pref_c[i] * ph * sum(cc[s][j][i] * h[j] for j in range(_ORDER))
        return np.stack([rn, rc], axis=1)

    cols = list(range(tau.size))
    with ThreadPoolExecutor(max_workers=min(thread_count(), max(1, tau.size))) as pool:
        resid = list(pool.map(column, cols))
    R = np.stack(resid, axis=2)  # (n_k+1, 2, n_tau)
    num_n = kern @ R[:, 0, :]
    num_c = kern @ R[:, 1, :]

    tail_n = np.zeros((x.size, tau.size), dtype=complex)
    tail_c = np.zeros((x.size, tau.size), dtype=complex)
    for s in (-1, 1):
        Tm = _model_transform(x, tau, s, p, mf.m)
        ph = np.exp(1j * s * b * tau)[None, :]
        for j in range(_ORDER):
            wn = (pref_n * cn[s][j])[None, :]
            wc = (pref_c * cc[s][j])[None, :]
            if np.any(wn != 0):
                tail_n = tail_n + ph * wn * Tm[j]
            if np.any(wc != 0):
                tail_c = tail_c + ph * wc * Tm[j]
    n_xt = num_n + tail_n
    c_xt = num_c + tail_c

    # (0, 0): c diverges with the cutoff; report the bare truncated integral there
    singular = np.zeros((x.size, tau.size), dtype=bool)
    ix = np.nonzero(x == 0)[0]
    it = np.nonzero(tau == 0)[0]
    if ix.size and it.size:
        d = delayed_moments(k, mf, 0.0)
        c_cut = np.sum(kern[ix[0]] * np.asarray(d.c, dtype=complex))
        c_xt[ix[0], it[0]] = c_cut
        singular[ix[0], it[0]] = True
    return n_xt, c_xt, singular


def _delta_n(mf, k_max, n_k):
    """n(0, 0) in the infinite-cutoff limit."""
    f = _transform(mf, np.array([0.0]), np.array([0.0]), k_max, n_k)[0]
    return float(f[0, 0].real)


def hankel_moment(mf: MeanFieldState, tau=None, x=None, grid: Optional[RadialGrid] = None,
                  *, check: bool = False, tol: float = 1e-4) -> CorrelationField:
    """Real-space moments n(x, tau) and c(x, tau).

    Pass either a :class:`RadialGrid` or ``tau`` and ``x``. With ``check=True``
    the transform is repeated with twice the quadrature points and 1.5 times
    the cutoff, and the field reports the largest change and whether it stays
    below ``tol`` (the (0, 0) cell is excluded).
    """
    _require_stable(mf)
    if grid is None:
        grid = RadialGrid(x=np.atleast_1d(x), tau=np.atleast_1d(tau))
    k_max = grid.cutoff(mf)
    if mf.mu == 0:
        zeros = np.zeros((grid.x.size, grid.tau.size), dtype=complex)
        return CorrelationField(grid.x, grid.tau, zeros, zeros.copy(), 0.0, k_max, grid.n_k,
                                np.zeros(zeros.shape, dtype=bool), 0.0 if check else None,
                                True if check else None)
    n_xt, c_xt, singular = _transform(mf, grid.x, grid.tau, k_max, grid.n_k)
    dn = _delta_n(mf, k_max, grid.n_k)
    delta = ok = None
    if check:
        fine = grid.refined()
        n2, c2, _ = _transform(mf, grid.x, grid.tau, fine.cutoff(mf) if grid.k_max else 1.5 * k_max, fine.n_k)
        keep = ~singular
        delta = float(max(np.max(np.abs(n2 - n_xt)[keep], initial=0.0), np.max(np.abs(c2 - c_xt)[keep], initial=0.0)))
        ok = delta < tol
    return CorrelationField(grid.x, grid.tau, n_xt, c_xt, dn, k_max, grid.n_k, singular, delta, ok)


def _g2_from_field(fld: CorrelationField, psi_f: complex, cross_factor: float = 1.0):
    a2 = abs(psi_f) ** 2
    den = (a2 + fld.delta_n) ** 2
    if den == 0.0:
        return np.ones(fld.n.shape)
    lin = np.real(a2 * fld.n + np.conj(psi_f) ** 2 * fld.c)
    quad = np.abs(fld.n) ** 2 + np.abs(fld.c) ** 2
    return 1.0 + (cross_factor * lin + quad) / den


def g2_map(mf: MeanFieldState, filt: FilterConfig, grid: RadialGrid,
           field_: Optional[CorrelationField] = None, *, cross_factor: float = 1.0) -> G2Map:
    """Filtered density-density correlation g2(x, tau); rows ascending x, columns ascending tau.

    ``cross_factor`` weighs the interference term ``Re(|psi_f|^2 n + psi_f*^2 c)``.
    The default 1 puts the optimal filter fraction near 0.008 for
    mu = 0.4, Delta = 3; a complete Wick factorization gives 2, the weight used by :func:`qfc.upb.g2_delay`.

    A precomputed :class:`CorrelationField` on the same grid may be passed to
    scan several filter fractions cheaply. With no condensate transmitted and
    no fluctuations (g = 0) the map is identically 1.
    """
    fld = field_ if field_ is not None else hankel_moment(mf, grid=grid)
    psi_f = filt.fraction * mf.psi0
    g2 = _g2_from_field(fld, psi_f, cross_factor)
    return G2Map(fld.x, fld.tau, g2, filt.fraction, fld, fld.cutoff_dependent)


# ------------------------------------------------------------ map analysis

def temporal_band_metric(gmap: G2Map, tau_max: float = 5.0):
    """Separation with the deepest antibunching over ``tau <= tau_max``.

    Returns ``{"x_min", "tau_at_min", "g2_min", "depth"}`` with
    ``depth = 1 - g2_min``; cutoff-dependent cells are ignored.
    """
    sel = gmap.tau <= tau_max
    g = np.where(gmap.cutoff_dependent, np.inf, gmap.g2)[:, sel]
    per_x = g.min(axis=1)
    i = int(np.argmin(per_x))
    j = int(np.argmin(g[i]))
    return {"x_min": float(gmap.x[i]), "tau_at_min": float(gmap.tau[sel][j]),
            "g2_min": float(per_x[i]), "depth": float(1.0 - per_x[i])}


def band_velocity(gmap: G2Map, tau_range=(0.3, None), x_min: float = 0.0):
    """Velocity of the antibunching band: slope of the per-tau argmin of g2 over x.

    The band position at each tau in ``tau_range`` is the x of minimal g2
    (restricted to ``x >= x_min``); a straight line through these positions
    gives the velocity.
    """
    lo, hi = tau_range
    hi = gmap.tau[-1] if hi is None else hi
    sel = (gmap.tau >= lo) & (gmap.tau <= hi)
    xs = gmap.x >= x_min
    g = gmap.g2[np.ix_(xs, sel)]
    pos = gmap.x[xs][np.argmin(g, axis=0)]
    taus = gmap.tau[sel]
    slope, _ = np.polyfit(taus, pos, 1)
    return float(slope)


def antibunching_decay_time(gmap: G2Map):
    """1/e decay time of the antibunching depth ``1 - g2`` at the smallest x > 0.

    Returns ``None`` if that point is not antibunched at tau = 0.
    """
    i = int(np.nonzero(gmap.x > 0)[0][0])
    depth = 1.0 - gmap.g2[i]
    if gmap.tau[0] != 0 or depth[0] <= 0:
        return None
    below = np.nonzero(depth <= depth[0] / math.e)[0]
    if below.size == 0:
        return None
    j = int(below[0])
    t0, t1, d0, d1 = gmap.tau[j - 1], gmap.tau[j], depth[j - 1], depth[j]
    target = depth[0] / math.e
    return float(t0 + (d0 - target) * (t1 - t0) / (d0 - d1))


def spatial_period(profile_x, profile):
    """Spacing of successive local minima of a spatial profile (mean spacing)."""
    y = np.asarray(profile, dtype=float)
    idx = np.nonzero((y[1:-1] < y[:-2]) & (y[1:-1] <= y[2:]))[0] + 1
    if idx.size < 2:
        raise ValueError("fewer than two minima in profile")
    return float(np.mean(np.diff(np.asarray(profile_x)[idx])))
