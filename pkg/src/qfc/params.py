"""Physical parameters and the mean-field steady state of the driven cavity.

Units are natural units with hbar = 1. The library keeps ``m`` and ``gamma``
explicit, but every default (and the CLI) uses ``m = gamma = 1`` so that
momenta are measured in sqrt(m gamma), energies in gamma, lengths in
1/sqrt(m gamma) and times in 1/gamma.

The pump amplitude is taken real and non-negative. The condensate phase then
follows from the stationarity condition ``(-Delta - i gamma/2) psi0 + F = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from .errors import EvanescentModeError, InconsistentStateError

__all__ = [
    "PhysicalParams",
    "MeanFieldState",
    "BISTABILITY_THRESHOLD",
    "pump_for_density",
    "density_branches",
    "condensate_phase",
    "dynamical_stability",
    "mean_field_state",
    "steady_state",
    "emission_angle",
]

#: delta / gamma above which the cubic admits three roots for some pump
BISTABILITY_THRESHOLD = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class PhysicalParams:
    """Fluid and drive parameters.

    Parameters
    ----------
    g : float
        Contact interaction constant (energy x area), ``g >= 0``.
    delta : float
        Laser detuning from the bottom of the lower-polariton branch.
    pump : float
        Pump amplitude ``F``; real and non-negative by convention.
    m : float
        Effective mass.
    gamma : float
        Loss rate.
    """

    g: float
    delta: float
    pump: float = 0.0
    m: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        problems = []
        if not self.m > 0:
            problems.append(f"m must be > 0 (got {self.m})")
        if not self.gamma > 0:
            problems.append(f"gamma must be > 0 (got {self.gamma})")
        if not self.g >= 0:
            problems.append(f"g must be >= 0 (got {self.g})")
        if not self.pump >= 0:
            problems.append(f"pump must be real and >= 0 (got {self.pump})")
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def mg(self) -> float:
        """Dimensionless interaction constant m*g."""
        return self.m * self.g

    def with_pump(self, pump: float) -> "PhysicalParams":
        return replace(self, pump=float(pump))


@dataclass(frozen=True)
class MeanFieldState:
    """A homogeneous stationary solution of the mean-field equation."""

    params: PhysicalParams
    psi0: complex
    branch: str = "single"
    stable: bool = True
    gamma_max: float = 0.0
    n0: float = field(init=False)
    mu: float = field(init=False)
    Delta: float = field(init=False)

    def __post_init__(self):
        n0 = abs(self.psi0) ** 2
        object.__setattr__(self, "n0", n0)
        object.__setattr__(self, "mu", self.params.g * n0)
        object.__setattr__(self, "Delta", self.params.delta - self.params.g * n0)

    @property
    def regime(self) -> str:
        if self.params.delta > BISTABILITY_THRESHOLD * self.params.gamma:
            return "bistable"
        return "optical-limiter"

    @property
    def m(self) -> float:
        return self.params.m

    @property
    def gamma(self) -> float:
        return self.params.gamma

    @property
    def pair_amplitude(self) -> complex:
        """The complex pair-creation amplitude g * psi0**2."""
        return self.params.g * self.psi0 ** 2

    @property
    def phase_factor(self) -> complex:
        """exp(2i arg psi0); unity for an empty cavity."""
        if self.psi0 == 0:
            return 1.0 + 0.0j
        return (self.psi0 / abs(self.psi0)) ** 2

    def summary(self) -> dict:
        return {
            "n0": self.n0,
            "psi0_re": self.psi0.real,
            "psi0_im": self.psi0.imag,
            "mu": self.mu,
            "Delta": self.Delta,
            "regime": self.regime,
            "branch": self.branch,
            "stable": self.stable,
            "gamma_max": self.gamma_max,
        }


def pump_for_density(params: PhysicalParams, n0: float) -> float:
    """Pump amplitude |F| that sustains condensate density ``n0``.

    >>> pump_for_density(PhysicalParams(g=1.0, delta=4.0), 5.0) ** 2
    6.25
    """
    if n0 < 0:
        raise ValueError(f"n0 must be >= 0 (got {n0})")
    Delta = params.delta - params.g * n0
    return math.sqrt(n0 * (Delta ** 2 + params.gamma ** 2 / 4.0))


def _cubic_residual(params: PhysicalParams, n0: float) -> float:
    Delta = params.delta - params.g * n0
    return n0 * (Delta ** 2 + params.gamma ** 2 / 4.0) - params.pump ** 2


def _real_cubic_roots(b: float, c: float, d: float, tol: float = 1e-12) -> List[float]:
    """Real roots of the monic cubic y^3 + b y^2 + c y + d, ascending.

    A (numerically) vanishing discriminant returns the double root twice.
    """
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    scale = max(abs(b), abs(c) ** 0.5, abs(d) ** (1.0 / 3.0), 1e-300)
    disc = -(4.0 * p ** 3 + 27.0 * q ** 2)
    if abs(disc) <= tol * scale ** 6:
        if abs(p) <= tol * scale ** 2:
            roots = [shift] * 3
        else:
            roots = [3.0 * q / p + shift, -1.5 * q / p + shift, -1.5 * q / p + shift]
    elif disc > 0:
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * r)
        phi = math.acos(max(-1.0, min(1.0, arg)))
        roots = [r * math.cos((phi - 2.0 * math.pi * j) / 3.0) + shift for j in range(3)]
    else:
        s = math.sqrt(q * q / 4.0 + p ** 3 / 27.0)
        roots = [np.cbrt(-q / 2.0 + s) + np.cbrt(-q / 2.0 - s) + shift]
    return sorted(float(x) for x in roots)


def _polish(params: PhysicalParams, n0: float, steps: int = 3) -> float:
    g, delta, gamma = params.g, params.delta, params.gamma
    for _ in range(steps):
        f = _cubic_residual(params, n0)
        df = (delta - g * n0) ** 2 + gamma ** 2 / 4.0 - 2.0 * g * n0 * (delta - g * n0)
        if df == 0.0:
            break
        step = f / df
        if not math.isfinite(step):
            break
        trial = n0 - step
        if abs(_cubic_residual(params, trial)) > abs(f):
            break
        n0 = trial
    return max(n0, 0.0)


def density_branches(params: PhysicalParams) -> List[MeanFieldState]:
    """All stationary condensate densities for the given pump, ascending.

    Returns one state (branch ``"single"``) or three (``"low"``, ``"middle"``,
    ``"high"``). The middle branch is always flagged unstable; the others
    carry the Bogoliubov stability verdict.
    """
    g, delta, gamma, F2 = params.g, params.delta, params.gamma, params.pump ** 2
    if g == 0.0:
        densities = [F2 / (delta ** 2 + gamma ** 2 / 4.0)]
    else:
        # cubic in y = g n0
        ys = _real_cubic_roots(-2.0 * delta, delta ** 2 + gamma ** 2 / 4.0, -g * F2)
        densities = [_polish(params, max(y, 0.0) / g) for y in ys]
    if len(densities) == 1:
        labels = ["single"]
    else:
        labels = ["low", "middle", "high"]
    states = []
    for n0, label in zip(densities, labels):
        psi0 = condensate_phase(params, n0, tol=1e-8)
        flag, gmax = dynamical_stability(params, n0)
        if label == "middle":
            flag = False
        states.append(MeanFieldState(params, psi0, branch=label, stable=flag, gamma_max=gmax))
    return states


def condensate_phase(params: PhysicalParams, n0: float, tol: float = 1e-12) -> complex:
    """Condensate amplitude psi0 = F / (Delta + i gamma/2) for density ``n0``.

    Raises :class:`InconsistentStateError` when ``|psi0|^2`` misses ``n0`` by
    more than ``tol`` (relative).
    """
    Delta = params.delta - params.g * n0
    psi0 = params.pump / complex(Delta, params.gamma / 2.0)
    got = abs(psi0) ** 2
    if abs(got - n0) > tol * max(n0, got, 1e-300) and not (n0 == 0 and got == 0):
        raise InconsistentStateError(
            f"|F|^2 = {params.pump ** 2!r} does not sustain n0 = {n0!r} (|psi0|^2 = {got!r})"
        )
    return psi0


def _max_growth_rate(mu: float, Delta: float) -> float:
    if Delta >= mu:
        return mu
    if Delta > 0:
        return math.sqrt(Delta * (2.0 * mu - Delta))
    return 0.0


def dynamical_stability(params: PhysicalParams, n0: float) -> Tuple[bool, float]:
    """Stability flag and the largest Bogoliubov growth rate max_k Im omega_k.

    The state is stable iff the fastest-growing fluctuation still decays,
    i.e. ``max_k Im omega_k < gamma / 2``.
    """
    mu = params.g * n0
    gmax = _max_growth_rate(mu, params.delta - mu)
    return gmax < params.gamma / 2.0, gmax


def mean_field_state(params: PhysicalParams, n0: float) -> MeanFieldState:
    """Build the state at density ``n0``, choosing the pump that sustains it."""
    params = params.with_pump(pump_for_density(params, n0))
    psi0 = condensate_phase(params, n0)
    flag, gmax = dynamical_stability(params, n0)
    branch = "single"
    branches = density_branches(params)
    if len(branches) == 3:
        nearest = min(branches, key=lambda s: abs(s.n0 - n0))
        branch = nearest.branch
        if branch == "middle":
            flag = False
    return MeanFieldState(params, psi0, branch=branch, stable=flag, gamma_max=gmax)


def steady_state(
    mu: float,
    Delta: float,
    *,
    m: float = 1.0,
    gamma: float = 1.0,
    mg: float = 1e-4,
) -> MeanFieldState:
    """State with interaction energy ``mu`` and effective detuning ``Delta``.

    This is the parametrization used throughout: fix ``mu = g n0`` and
    ``Delta = delta - g n0`` and let the pump follow.
    """
    g = mg / m
    if g == 0.0:
        if mu != 0.0:
            raise ValueError("mu > 0 needs a nonzero interaction constant")
        params = PhysicalParams(g=0.0, delta=Delta, m=m, gamma=gamma)
        return mean_field_state(params, 0.0)
    n0 = mu / g
    params = PhysicalParams(g=g, delta=Delta + mu, m=m, gamma=gamma)
    return mean_field_state(params, n0)


def emission_angle(k, omega_L: float, c_light: float = 1.0):
    """Far-field emission angle of in-plane momentum ``k``: sin(theta) = c k / omega_L."""
    ratio = c_light * np.asarray(k, dtype=float) / omega_L
    if np.any(np.abs(ratio) > 1.0):
        raise EvanescentModeError("c k / omega_L > 1: mode is evanescent and does not radiate")
    out = np.arcsin(ratio)
    return float(out) if out.ndim == 0 else out
