"""
Shared domain types for the quasi-microstructure laboratory

Price and return series, tail estimates, the seeded random-source contract,
the reference stylized-fact exponents and the error hierarchy used by every
other module.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from numpy.typing import ArrayLike, NDArray


SPACING_RTOL = 1e-9


class LabError(ValueError):
    """Base class for every domain error raised by the laboratory."""


class DomainError(LabError):
    """An argument lies outside the domain of the model."""


class SpacingError(LabError):
    """Time spacing is nonuniform or incompatible with the requested interval."""


class SampleSizeError(LabError):
    """Too few samples for the requested estimate."""


class DegenerateSampleError(LabError):
    """Samples carry no spread, so the estimate is undefined."""


class ConstraintError(LabError):
    """A model constraint does not hold for the given parameters."""


class SingularError(LabError):
    """The equation to solve has a zero coefficient on the unknown."""


class ResolutionError(LabError):
    """The time grid is too coarse for the hazard it has to resolve."""


class SupportError(LabError):
    """A sampling support is empty or not normalizable."""


class StationarityError(LabError):
    """A variance recursion is not stationary."""


class OrderingError(LabError):
    """Values that must be strictly increasing are not."""


class SegmentSizeError(LabError):
    """A regression segment holds too few samples."""


class FitError(LabError):
    """No admissible fit exists for the given data and search space."""


class ConvergenceError(LabError):
    """An optimizer stopped before convergence; ``best`` holds its best iterate."""

    def __init__(self, message: str, best: object = None):
        super().__init__(message)
        self.best = best


def _frozen_array(values: ArrayLike) -> NDArray[np.float64]:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


def uniform_spacing(times: NDArray[np.float64]) -> float:
    """Return the common step of a uniform time grid or raise SpacingError."""

    steps = np.diff(times)
    step = float(steps[0])
    if not np.allclose(steps, step, rtol=SPACING_RTOL, atol=0.0):
        raise SpacingError("time grid is not uniformly spaced")
    return step


@dataclass(frozen=True)
class PriceSeries:
    """Timestamped strictly positive prices."""

    times: NDArray[np.float64]
    prices: NDArray[np.float64]

    def __post_init__(self) -> None:
        times = _frozen_array(self.times)
        prices = _frozen_array(self.prices)
        if times.ndim != 1 or times.shape != prices.shape:
            raise DomainError("times and prices must be 1-D arrays of equal length")
        if times.size and not np.all(np.isfinite(times)):
            raise DomainError("times must be finite")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise OrderingError("times must be strictly increasing")
        if np.any(~(prices > 0)):
            raise DomainError("every price must be strictly positive")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "prices", prices)

    def __len__(self) -> int:
        return int(self.prices.size)

    @property
    def spacing(self) -> float:
        if len(self) < 2:
            raise SampleSizeError("a price series needs at least 2 points")
        return uniform_spacing(self.times)


@dataclass(frozen=True)
class ReturnSeries:
    """Log-returns over a fixed interval ``dt``."""

    times: NDArray[np.float64]
    returns: NDArray[np.float64]
    dt: float

    def __post_init__(self) -> None:
        times = _frozen_array(self.times)
        returns = _frozen_array(self.returns)
        if times.ndim != 1 or times.shape != returns.shape:
            raise DomainError("times and returns must be 1-D arrays of equal length")
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise OrderingError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "returns", returns)
        object.__setattr__(self, "dt", float(self.dt))

    def __len__(self) -> int:
        return int(self.returns.size)


@dataclass(frozen=True)
class TailEstimate:
    """Hill estimate of a CCDF exponent."""

    exponent: float
    std_error: float
    k: int
    threshold: float

    def __post_init__(self) -> None:
        if not self.exponent > 0:
            raise DomainError("tail exponent must be positive")
        if self.k < 2:
            raise SampleSizeError("a tail estimate needs k >= 2")
        if not self.threshold > 0:
            raise DomainError("tail threshold must be positive")


@dataclass(frozen=True)
class StylizedTargets:
    """Reference exponents for returns, volume, trade counts and sizes."""

    xi_r: float = 3.0
    xi_v: float = 1.5
    xi_n: float = 3.4
    xi_s: float = 1.05


STYLIZED_TARGETS = StylizedTargets()


def stream_id_for(name: str) -> int:
    """Map an operation name to a stable 64-bit stream id."""

    digest = hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass
class RandomSource:
    """
    Seeded single-owner random stream.

    The generator is numpy's counter-based Philox keyed through
    ``SeedSequence(seed, spawn_key=(stream_id,))``, so a (seed, stream_id)
    pair yields the same sequence on every platform and distinct stream ids
    yield independent streams.
    """

    seed: int
    stream_id: int = 0
    _generator: np.random.Generator | None = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= value < 2**64:
                raise DomainError(f"{name} must be a 64-bit unsigned integer")

    @classmethod
    def for_operation(cls, seed: int, name: str) -> "RandomSource":
        return cls(seed=seed, stream_id=stream_id_for(name))

    def spawn(self, stream_id: int) -> "RandomSource":
        return RandomSource(seed=self.seed, stream_id=stream_id)

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
            self._generator = np.random.Generator(np.random.Philox(sequence))
        return self._generator

    def standard_normal(self, size: int) -> NDArray[np.float64]:
        return self.generator.standard_normal(size)

    def uniform(self, size: int) -> NDArray[np.float64]:
        """Uniform draws on [0, 1)."""
        return self.generator.random(size)


def log_returns(series: PriceSeries, dt: float) -> ReturnSeries:
    """
    Log-returns of ``series`` over the interval ``dt``.

    ``dt`` must be a positive integer multiple of the series' native spacing.
    """

    if len(series) < 2:
        raise SampleSizeError("log-returns need at least 2 prices")
    if not dt > 0:
        raise SpacingError("dt must be positive")
    native = series.spacing
    ratio = dt / native
    stride = int(round(ratio))
    if stride < 1 or not math.isclose(ratio, stride, rel_tol=SPACING_RTOL):
        raise SpacingError(
            f"dt={dt!r} is not a positive integer multiple of the spacing {native!r}"
        )
    if stride >= len(series):
        raise SampleSizeError("dt spans the whole series")

    log_prices = np.log(series.prices)
    return ReturnSeries(
        times=series.times[stride:],
        returns=log_prices[stride:] - log_prices[:-stride],
        dt=dt,
    )


def prices_from_returns(returns: ReturnSeries, p0: float, t0: float | None = None) -> PriceSeries:
    """Rebuild a price path from unit-stride log-returns."""

    if not p0 > 0:
        raise DomainError("p0 must be positive")
    if not len(returns):
        raise SampleSizeError("no returns to compound")
    start = returns.times[0] - returns.dt if t0 is None else t0
    log_path = np.concatenate(([0.0], np.cumsum(returns.returns)))
    return PriceSeries(
        times=np.concatenate(([start], returns.times)),
        prices=p0 * np.exp(log_path),
    )


def _positive_samples(samples: Iterable[float] | ArrayLike) -> NDArray[np.float64]:
    if not hasattr(samples, "__len__"):
        samples = list(samples)
    values = np.asarray(samples, dtype=np.float64)
    if values.ndim != 1:
        raise DomainError("samples must be one-dimensional")
    if np.any(~(values > 0)):
        raise DomainError("samples must be strictly positive")
    return values


def empirical_ccdf(samples: Iterable[float] | ArrayLike) -> list[tuple[float, float]]:
    """
    Empirical survival function as ascending (value, tail-probability) pairs.

    The i-th sorted value (1-based) carries probability (n - i) / n, so ties
    keep their sorted order and the last pair is always 0.
    """

    values = _positive_samples(samples)
    n = values.size
    if n < 2:
        raise SampleSizeError("an empirical CCDF needs at least 2 samples")
    ordered = np.sort(values, kind="stable")
    probabilities = (n - np.arange(1, n + 1)) / n
    return [(float(value), float(prob)) for value, prob in zip(ordered, probabilities)]


def ccdf_slope(
    pairs: list[tuple[float, float]], low: float, high: float
) -> tuple[float, float]:
    """Least-squares log-log slope of CCDF pairs with values in [low, high]."""

    values = np.array([value for value, _ in pairs])
    probabilities = np.array([prob for _, prob in pairs])
    mask = (values >= low) & (values <= high) & (probabilities > 0)
    if np.count_nonzero(mask) < 3:
        raise SampleSizeError("fewer than 3 CCDF points inside the fitting window")
    x = np.log(values[mask])
    y = np.log(probabilities[mask])
    coefficients, covariance = np.polyfit(x, y, 1, cov=True)
    return float(coefficients[0]), float(math.sqrt(covariance[0, 0]))


def pareto_samples(
    exponent: float, n: int, rng: RandomSource, x_min: float = 1.0
) -> NDArray[np.float64]:
    """Inverse-CDF draws with P(X > x) = (x / x_min) ** -exponent."""

    if not exponent > 0 or not x_min > 0:
        raise DomainError("Pareto exponent and x_min must be positive")
    u = rng.uniform(n)
    return x_min * (1.0 - u) ** (-1.0 / exponent)
