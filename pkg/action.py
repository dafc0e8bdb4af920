"""
Least-action machinery

Quadratic Lagrangian dynamics for the quasicontinuous variance and its
conserved quantity, the oscillating crash-hazard ratio under three time
maps, the mixed crash intensity, the crossover scaling order parameter and
the discrete arbitrage functional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.signal import find_peaks

from core import DomainError, PriceSeries


@dataclass(frozen=True)
class ActionCoefficients:
    """Kinetic and potential weights of L = a h'**2 / 2 + b h**2 / 2."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not self.a > 0 or not self.b > 0:
            raise DomainError("a and b must be positive")

    @property
    def rate(self) -> float:
        """Growth rate sqrt(b / a) of the Euler-Lagrange solutions."""
        return math.sqrt(self.b / self.a)

    def c1(self, h: float | ArrayLike, hdot: float | ArrayLike) -> float | NDArray[np.float64]:
        """Conserved constant a h'**2 / 2 - b h**2 / 2 of the state (h, hdot)."""
        value = self.a * np.square(hdot) / 2 - self.b * np.square(h) / 2
        return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class Trajectory:
    times: NDArray[np.float64]
    h_values: NDArray[np.float64]
    hdot_values: NDArray[np.float64]

    def __post_init__(self) -> None:
        if not self.times.shape == self.h_values.shape == self.hdot_values.shape:
            raise DomainError("trajectory arrays must share one grid")

    def __len__(self) -> int:
        return int(self.times.size)


def lagrangian_value(coef: ActionCoefficients, h: float, hdot: float) -> float:
    return coef.a * hdot * hdot / 2 + coef.b * h * h / 2


def rk4_step(
    rhs: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    state: NDArray[np.float64],
    dt: float,
) -> NDArray[np.float64]:
    k1 = rhs(state)
    k2 = rhs(state + dt / 2 * k1)
    k3 = rhs(state + dt / 2 * k2)
    k4 = rhs(state + dt * k3)
    return state + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_euler_lagrange(
    coef: ActionCoefficients, h0: float, hdot0: float, t_end: float, step: float
) -> Trajectory:
    """
    Integrate a h'' = b h with classic fourth-order Runge-Kutta.

    The step is adjusted to t_end / round(t_end / step) so the grid lands
    on t_end exactly.
    """

    if not t_end > 0 or not step > 0:
        raise DomainError("t_end and step must be positive")
    if step > t_end / 10:
        raise DomainError("step must not exceed t_end / 10")

    n = int(round(t_end / step))
    dt = t_end / n
    stiffness = coef.b / coef.a

    def rhs(state: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.array([state[1], stiffness * state[0]])

    states = np.empty((n + 1, 2))
    states[0] = (h0, hdot0)
    for i in range(n):
        states[i + 1] = rk4_step(rhs, states[i], dt)
    return Trajectory(times=dt * np.arange(n + 1), h_values=states[:, 0], hdot_values=states[:, 1])


def conserved_quantity(coef: ActionCoefficients, traj: Trajectory) -> NDArray[np.float64]:
    """First integral c1 = a h'**2 / 2 - b h**2 / 2 at every grid point."""

    if not len(traj):
        raise DomainError("trajectory is empty")
    return coef.c1(traj.h_values, traj.hdot_values)


def conservation_drift(coef: ActionCoefficients, traj: Trajectory) -> float:
    """
    Largest drift of c1 from its initial value.

    Each deviation is scaled by max(|c1(0)|, L(t)), since c1 is a difference
    of two terms that grow like exp(2 sqrt(b/a) t).
    """

    invariant = conserved_quantity(coef, traj)
    energy = coef.a * traj.hdot_values**2 / 2 + coef.b * traj.h_values**2 / 2
    scale = np.maximum(abs(invariant[0]), energy)
    deviation = np.abs(invariant - invariant[0])
    relative = np.divide(deviation, scale, out=np.zeros_like(deviation), where=scale > 0)
    return float(relative.max())


DeltaKind = Literal["power-decreasing", "log", "power-increasing"]


@dataclass(frozen=True)
class DeltaMap:
    """Time-to-crash mapping evaluated on t_c - t > 0."""

    kind: DeltaKind
    t_c: float
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("power-decreasing", "log", "power-increasing"):
            raise DomainError(f"unknown map kind {self.kind!r}")
        if self.kind != "log" and not self.alpha > 0:
            raise DomainError("alpha must be positive for power maps")

    def __call__(self, times: ArrayLike) -> NDArray[np.float64]:
        tau = self.t_c - np.asarray(times, dtype=np.float64)
        if np.any(~(tau > 0)):
            raise DomainError("maps are only defined before t_c")
        if self.kind == "log":
            return np.log(tau)
        if self.kind == "power-decreasing":
            return tau**self.alpha
        return tau ** (-self.alpha)


@dataclass(frozen=True)
class HazardMix:
    c1_weight: float
    c2_weight: float
    h_c: float
    h_r0: float
    omega: float

    def __post_init__(self) -> None:
        if self.c1_weight < 0 or self.c2_weight < 0:
            raise DomainError("mixing weights must be nonnegative")
        if not self.h_c > 0:
            raise DomainError("h_c must be positive")
        if abs(self.h_r0) > self.h_c:
            raise DomainError("|h_r0| must not exceed h_c")
        if not self.omega > 0:
            raise DomainError("omega must be positive")


def hazard_ratio_profile(mix: HazardMix, delta_map: DeltaMap, times: ArrayLike) -> NDArray[np.float64]:
    """Ratio h1 / h2 = h_c + h_r0 cos(omega * Delta(t)) of small- to big-player hazards."""

    return mix.h_c + mix.h_r0 * np.cos(mix.omega * delta_map(times))


def profile_peaks(times: ArrayLike, values: ArrayLike) -> NDArray[np.float64]:
    """Times of the interior local maxima of a sampled profile."""

    peaks, _ = find_peaks(np.asarray(values, dtype=np.float64))
    return np.asarray(times, dtype=np.float64)[peaks]


def mixed_crash_intensity(mix: HazardMix, h1: float, h2: float) -> float:
    if h1 < 0 or h2 < 0:
        raise DomainError("hazards must be nonnegative")
    return mix.c1_weight * h1 + mix.c2_weight * h2


@dataclass(frozen=True)
class ScalingLaw:
    """
    Crossover law 1/P = A dS**xi_r f(h dS**(xi - xi_r)) with
    f(z) = (1 + z**2)**(beta_exp / 2).
    """

    amplitude_A: float
    xi_r: float
    xi: float
    beta_exp: float
    field_h: float

    def __post_init__(self) -> None:
        if not self.amplitude_A > 0:
            raise DomainError("amplitude must be positive")
        if self.xi == self.xi_r:
            raise DomainError("xi must differ from xi_r")
        if self.field_h < 0:
            raise DomainError("field_h must be nonnegative")

    @property
    def asymptotic_exponent(self) -> float:
        return self.xi_r + self.beta_exp * (self.xi - self.xi_r)


def _scaling_argument(law: ScalingLaw, dS: ArrayLike) -> NDArray[np.float64]:
    dS = np.asarray(dS, dtype=np.float64)
    if np.any(~(dS > 0)):
        raise DomainError("dS must be positive")
    return law.field_h * dS ** (law.xi - law.xi_r)


def scaling_order_parameter(law: ScalingLaw, dS: float | ArrayLike) -> float | NDArray[np.float64]:
    z = _scaling_argument(law, dS)
    value = law.amplitude_A * np.asarray(dS, dtype=np.float64) ** law.xi_r * (1 + z * z) ** (law.beta_exp / 2)
    return float(value) if np.ndim(value) == 0 else value


def local_exponent(law: ScalingLaw, dS: float | ArrayLike) -> float | NDArray[np.float64]:
    """Analytic log-derivative of the order parameter with respect to dS."""

    z2 = _scaling_argument(law, dS) ** 2
    value = law.xi_r + law.beta_exp * (law.xi - law.xi_r) * z2 / (1 + z2)
    return float(value) if np.ndim(value) == 0 else value


def crossover_scale(law: ScalingLaw) -> float:
    """dS* where the scaling argument equals 1; infinite for a zero field."""

    if law.field_h == 0:
        return math.inf
    return law.field_h ** (-1.0 / (law.xi - law.xi_r))


def arbitrage_functional(portfolio: PriceSeries, r: float) -> float:
    """Left-point sum of (dP - r P dt)**2 over consecutive prices."""

    dt = portfolio.spacing
    prices = portfolio.prices
    excess = np.diff(prices) - r * prices[:-1] * dt
    return float(np.sum(excess * excess))
