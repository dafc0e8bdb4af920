"""
Synthetic-market generators

Wiener and log-periodic crash price paths, mixed-regime impact ticks, the
two-population volatility split, square-root-impact execution, fund-ecology
volume sampling and kinematic displacement sampling. Every generator is a
pure function of its config and a RandomSource.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Literal, Protocol

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import minimize_scalar

from core import (
    ConstraintError,
    DomainError,
    PriceSeries,
    RandomSource,
    ResolutionError,
    SingularError,
    SupportError,
)


MARTINGALE_TOL = 1e-12
MAX_STEP_HAZARD = 0.5
DEFAULT_SUPPORT_RATIO = 1e6
REGIME_LABELS = ("regular", "big_player", "compositional")


@dataclass(frozen=True)
class WienerConfig:
    mu0: float
    h0: float
    p0: float
    n: int
    dt: float

    def __post_init__(self) -> None:
        if self.h0 < 0:
            raise DomainError("h0 must be nonnegative")
        if not self.p0 > 0:
            raise DomainError("p0 must be positive")
        if self.n < 1:
            raise DomainError("n must be at least 1")
        if not self.dt > 0:
            raise DomainError("dt must be positive")


def wiener_path(cfg: WienerConfig, rng: RandomSource) -> PriceSeries:
    """
    Geometric Brownian path on the grid t_i = i * dt, i = 0..n.

    Steps are exact in log space, so prices stay positive and the
    zero-noise limit is P_i = p0 * exp(mu0 * i * dt).
    """

    z = rng.standard_normal(cfg.n)
    increments = (cfg.mu0 - 0.5 * cfg.h0) * cfg.dt + math.sqrt(cfg.h0 * cfg.dt) * z
    log_path = np.concatenate(([0.0], np.cumsum(increments)))
    return PriceSeries(
        times=cfg.dt * np.arange(cfg.n + 1),
        prices=cfg.p0 * np.exp(log_path),
    )


class Hazard(Protocol):
    """Crash intensity per unit time, defined before ``t_c``."""

    @property
    def t_c(self) -> float: ...

    def rate(self, times: ArrayLike) -> NDArray[np.float64]: ...


@dataclass(frozen=True)
class HazardParams:
    """
    Log-periodic crash hazard.

    ``|c_prime| <= b_prime`` keeps the rate nonnegative. Setting ``clamp``
    lifts that requirement and clips negative rates to zero instead.
    """

    b_prime: float
    c_prime: float
    m: float
    omega: float
    phi_prime: float
    t_c: float
    clamp: bool = False

    def __post_init__(self) -> None:
        if self.b_prime < 0:
            raise DomainError("b_prime must be nonnegative")
        if not 0 < self.m < 1:
            raise DomainError("m must lie in (0, 1)")
        if not self.omega > 0:
            raise DomainError("omega must be positive")
        if not self.clamp and abs(self.c_prime) > self.b_prime:
            raise ConstraintError("|c_prime| <= b_prime is required for a nonnegative hazard")

    def rate(self, times: ArrayLike) -> NDArray[np.float64]:
        tau = self.t_c - np.asarray(times, dtype=np.float64)
        if np.any(~(tau > 0)):
            raise DomainError("hazard is only defined before the critical time")
        oscillation = np.cos(self.omega * np.log(tau) - self.phi_prime)
        rates = tau ** (self.m - 1.0) * (self.b_prime + self.c_prime * oscillation)
        if self.clamp:
            rates = np.maximum(rates, 0.0)
        return rates


@dataclass(frozen=True)
class ConstantHazard:
    """Flat crash hazard with no critical time."""

    value: float
    t_c: float = math.inf

    def __post_init__(self) -> None:
        if self.value < 0:
            raise DomainError("hazard rate must be nonnegative")

    def rate(self, times: ArrayLike) -> NDArray[np.float64]:
        return np.full(np.shape(times), self.value, dtype=np.float64)


def hazard_rate(hz: HazardParams, t: float) -> float:
    """Crash hazard h(t) for t < t_c."""

    return float(hz.rate(np.array([t]))[0])


@dataclass(frozen=True)
class JlsPathConfig:
    hazard: Hazard
    k: float
    sigma: float
    p0: float
    n: int
    dt: float
    t0: float = 0.0

    def __post_init__(self) -> None:
        if not 0 <= self.k < 1:
            raise DomainError("crash amplitude k must lie in [0, 1)")
        if self.sigma < 0:
            raise DomainError("sigma must be nonnegative")
        if not self.p0 > 0:
            raise DomainError("p0 must be positive")
        if self.n < 1:
            raise DomainError("n must be at least 1")
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if self.t_end > self.hazard.t_c * (1 + 1e-12) + 1e-12:
            raise DomainError("the time grid must end at or before the critical time")

    @property
    def times(self) -> NDArray[np.float64]:
        return self.t0 + self.dt * np.arange(self.n + 1)

    @property
    def t_end(self) -> float:
        return self.t0 + self.n * self.dt


@dataclass(frozen=True)
class JlsPath:
    series: PriceSeries
    crash_time: float | None


def jls_path(cfg: JlsPathConfig, rng: RandomSource) -> JlsPath:
    """
    Price path with a single possible crash.

    Each step crashes with probability h(t) * dt, the pre-crash drift is
    k * h(t) so that the expected price change is zero, and after the crash
    the hazard is zero and the path continues as plain GBM.
    """

    times = cfg.times
    step_hazard = cfg.hazard.rate(times[:-1]) * cfg.dt
    if np.any(step_hazard >= MAX_STEP_HAZARD):
        raise ResolutionError(
            f"h(t) * dt reaches {float(step_hazard.max()):.3g}; refine dt below "
            f"{MAX_STEP_HAZARD} / max h(t)"
        )

    z = rng.standard_normal(cfg.n)
    u = rng.uniform(cfg.n)
    hits = np.flatnonzero(u < step_hazard)
    crash_step = int(hits[0]) if hits.size else None

    drift = cfg.k * step_hazard
    if crash_step is not None:
        drift[crash_step + 1 :] = 0.0
    increments = drift - 0.5 * cfg.sigma**2 * cfg.dt + cfg.sigma * math.sqrt(cfg.dt) * z
    if crash_step is not None:
        increments[crash_step] += math.log1p(-cfg.k)

    log_path = np.concatenate(([0.0], np.cumsum(increments)))
    series = PriceSeries(times=times, prices=cfg.p0 * np.exp(log_path))
    crash_time = float(times[crash_step + 1]) if crash_step is not None else None
    return JlsPath(series=series, crash_time=crash_time)


def crash_fraction(
    cfg: JlsPathConfig, n_paths: int, seed: int, threads: int = 1
) -> tuple[float, float]:
    """Fraction of crashed paths and its binomial standard error."""

    if n_paths < 1:
        raise DomainError("n_paths must be at least 1")
    root = RandomSource.for_operation(seed, "jls_path")

    def count_crashes(indices: range) -> int:
        crashed = 0
        for index in indices:
            source = root.spawn((root.stream_id + index) % 2**64)
            crashed += jls_path(cfg, source).crash_time is not None
        return crashed

    workers = max(1, threads)
    chunk = math.ceil(n_paths / workers)
    chunks = [range(start, min(start + chunk, n_paths)) for start in range(0, n_paths, chunk)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        crashed = sum(pool.map(count_crashes, chunks))

    fraction = crashed / n_paths
    return fraction, math.sqrt(fraction * (1 - fraction) / n_paths)


@dataclass(frozen=True)
class ImpactTickParams:
    """
    Tick-level regime mixture.

    ``dS2``, ``dS3`` and ``dS`` (the expected total move) may be left as
    None when they are the unknown of ``solve_impact_constraint``.
    """

    p: float
    dS1: float
    dS2: float | None = None
    pA: float = 0.0
    pB: float = 0.0
    dS3: float | None = None
    dS: float | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.p <= 1:
            raise DomainError("p must lie in [0, 1]")
        if not 0 <= self.pA < 1 or not 0 <= self.pB < 1:
            raise DomainError("pA and pB must lie in [0, 1)")
        if self.pA + self.pB >= 1:
            raise ConstraintError("pA + pB must stay below 1")

    @classmethod
    def martingale(
        cls, p: float, dS1: float, pA: float = 0.0, pB: float = 0.0, dS3: float | None = None
    ) -> "ImpactTickParams":
        """Build params whose regular part is a martingale by solving for dS2."""

        partial = cls(p=p, dS1=dS1, pA=pA, pB=pB, dS3=dS3)
        return cls(p=p, dS1=dS1, dS2=solve_impact_constraint(partial, "dS2"), pA=pA, pB=pB, dS3=dS3)

    @property
    def big_player_weight(self) -> float:
        return self.pA + self.pB

    @property
    def regular_mean(self) -> float:
        if self.dS2 is None:
            raise ConstraintError("dS2 is not set")
        return self.p * self.dS1 + (1 - self.p) * self.dS2

    @property
    def is_regular_martingale(self) -> bool:
        if self.dS2 is None:
            return False
        scale = max(1.0, abs(self.dS1), abs(self.dS2))
        return abs(self.regular_mean) <= MARTINGALE_TOL * scale


@dataclass(frozen=True)
class TickStream:
    regimes: NDArray[np.int8]
    moves: NDArray[np.float64]

    def __len__(self) -> int:
        return int(self.moves.size)

    def __iter__(self) -> Iterator[tuple[str, float]]:
        for regime, move in zip(self.regimes, self.moves):
            yield REGIME_LABELS[regime], float(move)

    @property
    def labels(self) -> list[str]:
        return [REGIME_LABELS[regime] for regime in self.regimes]

    def regime_moves(self, label: str) -> NDArray[np.float64]:
        return self.moves[self.regimes == REGIME_LABELS.index(label)]


def impact_tick_stream(params: ImpactTickParams, n: int, rng: RandomSource) -> TickStream:
    """Independent ticks from the regular / big-player / compositional mixture."""

    if not params.is_regular_martingale:
        raise ConstraintError("the regular regime must satisfy p*dS1 + (1-p)*dS2 = 0")
    if not 0 < params.p < 1:
        raise DomainError("tick streams need p in (0, 1)")
    if params.big_player_weight > 0 and params.dS3 is None:
        raise ConstraintError("dS3 is required when pA + pB > 0")

    regime_u = rng.uniform(n)
    move_u = rng.uniform(n)
    regimes = np.zeros(n, dtype=np.int8)
    regimes[regime_u < params.pA] = 1
    regimes[(regime_u >= params.pA) & (regime_u < params.big_player_weight)] = 2

    moves = np.where(move_u < params.p, params.dS1, params.dS2).astype(np.float64)
    if params.dS3 is not None:
        moves[regimes > 0] = params.dS3
    return TickStream(regimes=regimes, moves=moves)


def solve_impact_constraint(
    params: ImpactTickParams, unknown: Literal["dS2", "dS3", "dS"]
) -> float:
    """
    Solve the one-tick non-arbitrage equation for a single unknown.

    ``dS2`` comes from the regular-regime martingale condition; ``dS`` and
    ``dS3`` come from the mixed-regime equation
    (1 - w)(p dS1 + (1 - p) dS2) + w (dS - dS3) = 0 with w = pA + pB.
    """

    if unknown == "dS2":
        weight = 1 - params.p
        if weight == 0:
            raise SingularError("p = 1 leaves dS2 with a zero coefficient")
        return -params.p * params.dS1 / weight

    weight = params.big_player_weight
    if weight == 0:
        raise SingularError("pA + pB = 0 leaves the big-player term with a zero coefficient")
    carry = (1 - weight) / weight * params.regular_mean

    if unknown == "dS":
        if params.dS3 is None:
            raise ConstraintError("dS3 is required to solve for dS")
        return params.dS3 - carry
    if unknown == "dS3":
        if params.dS is None:
            raise ConstraintError("dS is required to solve for dS3")
        return params.dS + carry
    raise DomainError(f"unknown must be one of dS2, dS3, dS, got {unknown!r}")


@dataclass(frozen=True)
class ExecutionProblem:
    M: float
    mu: float
    a: float
    V: float

    def __post_init__(self) -> None:
        for name in ("M", "mu", "a", "V"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")


@dataclass(frozen=True)
class ExecutionSolution:
    dp_star: float
    T_star: float
    N_star: float
    B_star: float


def execution_profit(prob: ExecutionProblem, dp: float) -> float:
    """Profit B(dp) = V (M - mu a V / dp - dp)."""

    if not dp > 0:
        raise DomainError("price impact must be positive")
    return prob.V * (prob.M - prob.mu * prob.a * prob.V / dp - dp)


def optimal_execution(prob: ExecutionProblem) -> ExecutionSolution:
    """
    Profit-maximizing price impact for a block of volume V.

    Stationarity of B gives dp* = sqrt(mu a V). Execution time uses the same
    coefficient, T* = a V / dp*, and the trade count is taken equal to T*.
    The maximized profit is positive only when M > 2 sqrt(mu a V).
    """

    dp_star = math.sqrt(prob.mu * prob.a * prob.V)
    t_star = prob.a * prob.V / dp_star
    return ExecutionSolution(
        dp_star=dp_star,
        T_star=t_star,
        N_star=t_star,
        B_star=execution_profit(prob, dp_star),
    )


def numeric_optimal_impact(prob: ExecutionProblem, grid_points: int = 1000) -> float:
    """Golden-section maximizer of B on (0, M], bracketed from a coarse grid."""

    def impact_cost(dp: float) -> float:
        # B = V (M - cost), so minimizing the cost maximizes B
        return prob.mu * prob.a * prob.V / dp + dp

    grid = prob.M * np.arange(1, grid_points + 1) / grid_points
    best = int(np.argmin(prob.mu * prob.a * prob.V / grid + grid))
    if 0 < best < grid_points - 1:
        result = minimize_scalar(
            impact_cost,
            bracket=(grid[best - 1], grid[best], grid[best + 1]),
            method="golden",
            tol=1e-10,
        )
    else:
        lower = grid[best - 1] if best > 0 else prob.M * 1e-12
        upper = grid[min(best + 1, grid_points - 1)]
        result = minimize_scalar(
            impact_cost, bounds=(lower, upper), method="bounded", options={"xatol": 1e-12}
        )
    return float(result.x)


@dataclass(frozen=True)
class FundEcology:
    """
    Fund population with Zipf sizes on a bounded support.

    Volume scales as S**delta and trading frequency as S**(1 - 1.5 delta);
    ``s_max`` defaults to 1e6 * s_min.
    """

    delta: float
    s_min: float = 1.0
    s_max: float | None = None
    zipf_exponent: float = 1.0

    def __post_init__(self) -> None:
        if not self.delta > 0:
            raise DomainError("delta must be positive")
        if not self.s_min > 0:
            raise SupportError("s_min must be positive")
        if self.s_max is None:
            object.__setattr__(self, "s_max", self.s_min * DEFAULT_SUPPORT_RATIO)
        if not self.s_max >= self.s_min:
            raise SupportError("s_max must not be below s_min")
        if self.zipf_exponent != 1.0:
            raise DomainError("only the Zipf exponent 1 (size density S**-2) is supported")

    @property
    def sampling_exponent(self) -> float:
        """Exponent q of the combined size density S**-q."""
        return 1.0 + 1.5 * self.delta


def trading_frequency(eco: FundEcology, sizes: ArrayLike) -> NDArray[np.float64]:
    return np.asarray(sizes, dtype=np.float64) ** (1.0 - 1.5 * eco.delta)


def relative_transaction_cost(eco: FundEcology, sizes: ArrayLike) -> NDArray[np.float64]:
    """Annual impact cost over assets, F(S) V(S)**1.5 / S; constant in S."""

    sizes = np.asarray(sizes, dtype=np.float64)
    volumes = sizes**eco.delta
    return trading_frequency(eco, sizes) * volumes**1.5 / sizes


def tail_exponent_relations(xi_v: float) -> dict[str, float]:
    """Return and trade-count exponents implied by square-root impact."""

    return {"xi_r": 2.0 * xi_v, "xi_n": 2.0 * xi_v}


def fund_ecology_volumes(eco: FundEcology, n: int, rng: RandomSource) -> NDArray[np.float64]:
    """Trade volumes V = S**delta with S drawn from the frequency-weighted size density."""

    if n < 1:
        raise DomainError("n must be at least 1")
    u = rng.uniform(n)
    if eco.s_max == eco.s_min:
        return np.full(n, eco.s_min**eco.delta)

    power = 1.0 - eco.sampling_exponent
    if power >= 0:
        raise SupportError("combined size density is not normalizable")
    low = eco.s_min**power
    high = eco.s_max**power
    sizes = (low - u * (low - high)) ** (1.0 / power)
    logger.debug("sampled {} fund sizes with density exponent {}", n, eco.sampling_exponent)
    return sizes**eco.delta


@dataclass(frozen=True)
class KinematicConfig:
    v0: float
    accel: float
    dt_max: float
    n: int

    def __post_init__(self) -> None:
        if self.v0 < 0 or self.accel < 0:
            raise DomainError("v0 and accel must be nonnegative")
        if not self.v0 + self.accel > 0:
            raise DomainError("v0 and accel cannot both be zero")
        if not self.dt_max > 0:
            raise DomainError("dt_max must be positive")
        if self.n < 1:
            raise DomainError("n must be at least 1")


def kinematic_draws(
    cfg: KinematicConfig, rng: RandomSource
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Uniform intervals on (0, dt_max] and their displacements v0 dt + accel dt**2 / 2."""

    intervals = cfg.dt_max * (1.0 - rng.uniform(cfg.n))
    return intervals, cfg.v0 * intervals + 0.5 * cfg.accel * intervals**2


def kinematic_displacements(cfg: KinematicConfig, rng: RandomSource) -> NDArray[np.float64]:
    return kinematic_draws(cfg, rng)[1]


def crossover_time(cfg: KinematicConfig) -> float:
    """Interval where the linear and quadratic displacement terms are equal."""

    return 2.0 * cfg.v0 / cfg.accel if cfg.accel > 0 else math.inf


def crossover_displacement(cfg: KinematicConfig) -> float:
    return 4.0 * cfg.v0**2 / cfg.accel if cfg.accel > 0 else math.inf


@dataclass(frozen=True)
class TwoPopulationConfig:
    """Informed moves dS1 with probability p; the noise move is always derived."""

    p: float
    dS1: float
    n: int

    def __post_init__(self) -> None:
        if not 0 < self.p <= 1:
            raise DomainError("p must lie in (0, 1]")
        if self.n < 1:
            raise DomainError("n must be at least 1")

    @property
    def dS2(self) -> float:
        if self.p == 1:
            raise SingularError("p = 1 leaves the noise move undefined")
        return -self.p * self.dS1 / (1 - self.p)


@dataclass(frozen=True)
class VolatilityDecomposition:
    sigma1_sq: float
    sigma2_sq: float
    sigma_sq: float

    @property
    def ratio(self) -> float:
        return self.sigma2_sq / self.sigma1_sq


@dataclass(frozen=True)
class TwoPopulationResult:
    ticks: NDArray[np.float64]
    decomposition: VolatilityDecomposition
    sample_variance: float


def volatility_decomposition(cfg: TwoPopulationConfig) -> VolatilityDecomposition:
    """Informed and noise contributions to the one-tick variance."""

    sigma1_sq = cfg.p * cfg.dS1**2
    sigma2_sq = (1 - cfg.p) * cfg.dS2**2
    return VolatilityDecomposition(
        sigma1_sq=sigma1_sq, sigma2_sq=sigma2_sq, sigma_sq=sigma1_sq + sigma2_sq
    )


def two_population_ticks(cfg: TwoPopulationConfig, rng: RandomSource) -> TwoPopulationResult:
    decomposition = volatility_decomposition(cfg)
    ticks = np.where(rng.uniform(cfg.n) < cfg.p, cfg.dS1, cfg.dS2).astype(np.float64)
    return TwoPopulationResult(
        ticks=ticks,
        decomposition=decomposition,
        sample_variance=float(np.var(ticks)),
    )
