"""
Fitting and prediction

Hill tail exponents, GARCH maximum likelihood, the least-action variance
predictor, quasicontinuous variance interpolation, log-periodic crash fits
and regime-slope measurement.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Literal

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicSpline
from scipy.optimize import least_squares, minimize
from scipy.signal import lfilter, lfiltic
from scipy.special import expit

from core import (
    ConvergenceError,
    DegenerateSampleError,
    DomainError,
    FitError,
    OrderingError,
    PriceSeries,
    RandomSource,
    ReturnSeries,
    SampleSizeError,
    SegmentSizeError,
    StationarityError,
    TailEstimate,
    _positive_samples,
)


MIN_TAIL_POINTS = 20
GRADIENT_TOL = 1e-6
GRADIENT_STEP = 1e-5
PERSISTENCE_CAP = 1.0 - 1e-6
STATIONARITY_MARGIN = 1e-3
RELIABLE_GARCH_LENGTH = 500
GARCH_STARTS = ((0.05, 0.90), (0.10, 0.80), (0.20, 0.70), (0.05, 0.50), (0.30, 0.30))
MAX_CONDITION = 1e13
MIN_JLS_POINTS = 30
SEGMENT_BINS = 20
MIN_SEGMENT_SAMPLES = 50

# (omega, beta) pairs: the published empirical fit and the least-action limit
REPORTED_GARCH_COEFFICIENTS = (0.0082, 0.9505)
LEAST_ACTION_GARCH_COEFFICIENTS = (0.0, 1.0)


def hill_tail_exponent(
    samples: Iterable[float] | ArrayLike, tail_fraction: float = 0.05
) -> TailEstimate:
    """
    Hill estimate of the CCDF exponent from the top ``tail_fraction`` of samples.

    Uses the k = floor(tail_fraction * n) largest order statistics above the
    threshold x_(k+1). Rescaling every sample by a positive constant leaves
    the exponent unchanged and rescales the threshold.
    """

    if not 0 < tail_fraction <= 0.5:
        raise DomainError("tail_fraction must lie in (0, 0.5]")
    values = _positive_samples(samples)
    n = values.size
    k = int(math.floor(tail_fraction * n * (1 + 1e-12)))
    if k < MIN_TAIL_POINTS:
        raise SampleSizeError(
            f"only {k} tail points for tail_fraction={tail_fraction}; need {MIN_TAIL_POINTS}"
        )

    ordered = np.sort(values)
    threshold = float(ordered[n - k - 1])
    excess = float(np.sum(np.log(ordered[n - k :] / threshold)))
    if not excess > 0:
        raise DegenerateSampleError("tail points carry no spread above the threshold")

    exponent = k / excess
    return TailEstimate(
        exponent=exponent, std_error=exponent / math.sqrt(k), k=k, threshold=threshold
    )


@dataclass(frozen=True)
class GarchSpec:
    omega: float
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    mu: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if self.omega < 0 or any(a < 0 for a in self.alpha) or any(b < 0 for b in self.beta):
            raise DomainError("GARCH coefficients must be nonnegative")

    @property
    def persistence(self) -> float:
        return sum(self.alpha) + sum(self.beta)

    @property
    def is_stationary(self) -> bool:
        return self.persistence < 1

    @property
    def unconditional_variance(self) -> float:
        if not self.is_stationary:
            raise StationarityError(f"persistence {self.persistence:.6g} is not below 1")
        return self.omega / (1 - self.persistence)


def garch_conditional_variance(
    spec: GarchSpec, returns: ArrayLike, presample: float | None = None
) -> NDArray[np.float64]:
    """
    Conditional variance path h_t of a GARCH(p, q) model over ``returns``.

    Presample squared innovations and variances default to the unconditional
    variance for a stationary spec and to the sample mean squared innovation
    otherwise.
    """

    shocks = np.asarray(returns, dtype=np.float64) - spec.mu
    squared = shocks**2
    if presample is None:
        presample = spec.unconditional_variance if spec.is_stationary else float(np.mean(squared))

    p, q, n = len(spec.alpha), len(spec.beta), squared.size
    padded = np.concatenate((np.full(p, presample), squared))
    forcing = np.full(n, spec.omega)
    for lag, a in enumerate(spec.alpha, start=1):
        forcing += a * padded[p - lag : p - lag + n]

    if not q:
        return forcing
    denominator = np.concatenate(([1.0], -np.asarray(spec.beta)))
    initial = lfiltic([1.0], denominator, np.full(q, presample))
    variance, _ = lfilter([1.0], denominator, forcing, zi=initial)
    return variance


@dataclass(frozen=True)
class GarchPath(ReturnSeries):
    """Simulated returns together with the conditional variance h_t behind each one."""

    variances: NDArray[np.float64]

    def __post_init__(self) -> None:
        super().__post_init__()
        variances = np.array(self.variances, dtype=np.float64)
        if variances.shape != self.returns.shape:
            raise DomainError("one conditional variance is needed per return")
        variances.setflags(write=False)
        object.__setattr__(self, "variances", variances)


def garch_simulate(
    spec: GarchSpec, n: int, rng: RandomSource, zero_innovations: bool = False
) -> GarchPath:
    """
    Simulate n returns from a stationary GARCH(p, q) spec.

    The recursion starts at the unconditional variance. With
    ``zero_innovations`` every shock is zero, which leaves a deterministic
    variance path relaxing geometrically towards omega / (1 - sum(beta)).
    """

    if n < 1:
        raise DomainError("n must be at least 1")
    start = spec.unconditional_variance
    z = np.zeros(n) if zero_innovations else rng.standard_normal(n)

    p, q = len(spec.alpha), len(spec.beta)
    squared_history = [start] * p
    variance_history = [start] * q
    returns = np.empty(n)
    variances = np.empty(n)
    for t in range(n):
        h = spec.omega
        for lag, a in enumerate(spec.alpha, start=1):
            h += a * squared_history[-lag]
        for lag, b in enumerate(spec.beta, start=1):
            h += b * variance_history[-lag]
        shock = math.sqrt(h) * z[t]
        returns[t] = spec.mu + shock
        variances[t] = h
        if p:
            squared_history.append(shock * shock)
            squared_history.pop(0)
        if q:
            variance_history.append(h)
            variance_history.pop(0)

    return GarchPath(
        times=np.arange(1, n + 1, dtype=np.float64), returns=returns, dt=1.0, variances=variances
    )


@dataclass(frozen=True)
class GarchFit:
    spec: GarchSpec
    log_likelihood: float
    converged: bool
    iterations: int
    stationary: bool
    std_errors: tuple[float, float, float, float] = (math.nan,) * 4
    start_log_likelihoods: tuple[float, ...] = ()

    @property
    def persistence(self) -> float:
        return self.spec.persistence


def _unpack(theta: NDArray[np.float64]) -> tuple[float, float, float, float]:
    persistence = PERSISTENCE_CAP * expit(theta[1])
    alpha = persistence * expit(theta[2])
    return math.exp(theta[0]), alpha, persistence - alpha, float(theta[3])


def _pack(omega: float, alpha: float, beta: float, mu: float) -> NDArray[np.float64]:
    persistence = alpha + beta
    return np.array(
        [
            math.log(omega),
            math.log(persistence / (PERSISTENCE_CAP - persistence)),
            math.log(alpha / beta),
            mu,
        ]
    )


def _garch_nll(y: NDArray[np.float64], omega: float, alpha: float, beta: float, mu: float) -> float:
    """Mean Gaussian negative log-likelihood with a backcast presample."""

    shocks = y - mu
    squared = shocks**2
    backcast = float(np.mean(squared))
    forcing = omega + alpha * np.concatenate(([backcast], squared[:-1]))
    variance, _ = lfilter([1.0], [1.0, -beta], forcing, zi=[beta * backcast])
    if np.any(~(variance > 0)):
        return math.inf
    return 0.5 * float(np.mean(math.log(2 * math.pi) + np.log(variance) + squared / variance))


def _central_gradient(
    objective: Callable[[NDArray[np.float64]], float], x: NDArray[np.float64]
) -> NDArray[np.float64]:
    gradient = np.empty_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = GRADIENT_STEP
        gradient[i] = (objective(x + step) - objective(x - step)) / (2 * GRADIENT_STEP)
    return gradient


def _central_hessian(
    objective: Callable[[NDArray[np.float64]], float], x: NDArray[np.float64]
) -> NDArray[np.float64]:
    size = x.size
    steps = 1e-4 * np.maximum(1.0, np.abs(x))
    hessian = np.empty((size, size))
    for i in range(size):
        for j in range(i, size):
            ei = np.zeros(size)
            ej = np.zeros(size)
            ei[i] = steps[i]
            ej[j] = steps[j]
            value = (
                objective(x + ei + ej)
                - objective(x + ei - ej)
                - objective(x - ei + ej)
                + objective(x - ei - ej)
            ) / (4 * steps[i] * steps[j])
            hessian[i, j] = hessian[j, i] = value
    return hessian


def _standard_errors(y: NDArray[np.float64], natural: NDArray[np.float64]) -> NDArray[np.float64]:
    def total_nll(x: NDArray[np.float64]) -> float:
        if x[0] <= 0 or x[1] < 0 or x[2] < 0:
            return math.inf
        return y.size * _garch_nll(y, *x)

    try:
        covariance = np.linalg.inv(_central_hessian(total_nll, natural))
    except np.linalg.LinAlgError:
        return np.full(4, math.nan)
    diagonal = np.diag(covariance)
    if not np.all(np.isfinite(diagonal)) or np.any(diagonal <= 0):
        return np.full(4, math.nan)
    return np.sqrt(diagonal)


def garch_fit(returns: ReturnSeries | ArrayLike, max_iterations: int = 1000) -> GarchFit:
    """
    Gaussian maximum-likelihood GARCH(1,1) fit.

    The data are standardized, then the mean negative log-likelihood is
    minimized by BFGS from five fixed starting points in a transformed space
    where omega > 0, alpha and beta are nonnegative and alpha + beta stays
    below 1 - 1e-6. Estimates are mapped back to the data's units.
    """

    data = returns.returns if isinstance(returns, ReturnSeries) else np.asarray(returns, dtype=np.float64)
    if data.size < 2:
        raise SampleSizeError("GARCH fitting needs at least 2 returns")
    if data.size < RELIABLE_GARCH_LENGTH:
        logger.warning(
            "GARCH fit on {} returns; estimates below {} points are unreliable",
            data.size,
            RELIABLE_GARCH_LENGTH,
        )
    center = float(np.mean(data))
    scale = float(np.std(data))
    if not scale > 0:
        raise DegenerateSampleError("constant returns carry no variance to model")
    y = (data - center) / scale

    def objective(theta: NDArray[np.float64]) -> float:
        return _garch_nll(y, *_unpack(theta))

    def gradient(theta: NDArray[np.float64]) -> NDArray[np.float64]:
        return _central_gradient(objective, theta)

    best = None
    start_values = []
    for alpha0, beta0 in GARCH_STARTS:
        theta0 = _pack(1.0 - alpha0 - beta0, alpha0, beta0, 0.0)
        start_values.append(objective(theta0))
        result = minimize(
            objective,
            theta0,
            jac=gradient,
            method="BFGS",
            options={"gtol": GRADIENT_TOL / 10, "maxiter": max_iterations},
        )
        logger.debug(
            "GARCH start ({}, {}): nll={:.10g} after {} iterations",
            alpha0,
            beta0,
            result.fun,
            result.nit,
        )
        if best is None or result.fun < best.fun:
            best = result

    omega, alpha, beta, mu = _unpack(best.x)
    natural_errors = _standard_errors(y, np.array([omega, alpha, beta, mu]))
    n = y.size
    fit = GarchFit(
        spec=GarchSpec(omega=omega * scale**2, alpha=(alpha,), beta=(beta,), mu=center + mu * scale),
        log_likelihood=-n * best.fun - n * math.log(scale),
        converged=bool(np.linalg.norm(gradient(best.x)) < GRADIENT_TOL),
        iterations=int(best.nit),
        stationary=alpha + beta < 1 - STATIONARITY_MARGIN,
        std_errors=(
            float(natural_errors[0] * scale**2),
            float(natural_errors[1]),
            float(natural_errors[2]),
            float(natural_errors[3] * scale),
        ),
        start_log_likelihoods=tuple(-n * value - n * math.log(scale) for value in start_values),
    )
    if not fit.converged:
        raise ConvergenceError(
            f"GARCH fit did not converge within {max_iterations} iterations", best=fit
        )
    return fit


def least_action_predict(h_now: float, realized_return_rate: float, mu: float, c: float) -> float:
    """
    One-step least-action variance prediction.

    h(t + dt) = h(t) + c * (r - mu)**2 with c = sqrt(b / a) * dt, which is the
    GARCH(1,1) recursion with omega = 0, alpha = c and beta = 1.
    """

    if not c > 0:
        raise DomainError("c must be positive")
    if not h_now >= 0:
        raise DomainError("variance must be nonnegative")
    if not (math.isfinite(realized_return_rate) and math.isfinite(mu) and math.isfinite(h_now)):
        raise DomainError("inputs must be finite")
    innovation = realized_return_rate - mu
    return h_now + c * innovation * innovation


def least_action_predict_corrected(
    h_now: float, realized_return_rate: float, mu: float, c: float, c1_over_b: float
) -> float:
    """Predictor keeping the first-integral correction h' = c h2 (1 + (c1/b) / h2**2)."""

    if not c > 0:
        raise DomainError("c must be positive")
    innovation = realized_return_rate - mu
    h2 = innovation * innovation
    if h2 == 0:
        if c1_over_b:
            raise DomainError("the correction term is undefined for a zero innovation")
        return h_now
    return h_now + c * h2 * (1 + c1_over_b / (h2 * h2))


def least_action_path(h0: float, rates: ArrayLike, mu: float, c: float) -> NDArray[np.float64]:
    """Iterate the predictor over ``rates``; the result starts with h0."""

    path = [float(h0)]
    for rate in np.asarray(rates, dtype=np.float64):
        path.append(least_action_predict(path[-1], float(rate), mu, c))
    return np.array(path)


def least_action_garch_spec(c: float, mu: float = 0.0) -> GarchSpec:
    return GarchSpec(omega=0.0, alpha=(c,), beta=(1.0,), mu=mu)


def realized_variance(series: PriceSeries, mu: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Per-interval variance ((dP - mu P dt) / P)**2 / dt at each interval's start.
    """

    dt = series.spacing
    prices = series.prices
    rates = np.diff(prices) / (prices[:-1] * dt)
    return series.times[:-1].copy(), (rates - mu) ** 2 * dt


@dataclass(frozen=True)
class VarianceTriple:
    """
    Continuous, discrete and quasicontinuous variances side by side.

    ``h2`` is a cubic spline through the discrete knots (``knot_times``,
    ``h1``) and returns the knot values exactly at knot times. ``clamped``
    records whether the spline dips below zero anywhere on the knot span.
    """

    knot_times: NDArray[np.float64]
    h1: NDArray[np.float64]
    spline: CubicSpline = field(repr=False)
    clamped: bool
    h0: Callable[[NDArray[np.float64]], NDArray[np.float64]] | None = field(default=None, repr=False)

    def h2(self, times: ArrayLike) -> NDArray[np.float64]:
        times = np.asarray(times, dtype=np.float64)
        if np.any(times < self.knot_times[0]) or np.any(times > self.knot_times[-1]):
            raise DomainError("h2 is only defined on the knot span")
        values = np.maximum(self.spline(times), 0.0)
        index = np.clip(np.searchsorted(self.knot_times, times), 0, self.knot_times.size - 1)
        on_knot = self.knot_times[index] == times
        values[on_knot] = self.h1[index[on_knot]]
        return values


def interpolate_variance(
    knot_times: ArrayLike,
    h1_values: ArrayLike,
    boundary: Literal["natural", "not-a-knot"] = "natural",
    h0: Callable[[NDArray[np.float64]], NDArray[np.float64]] | None = None,
) -> VarianceTriple:
    times = np.asarray(knot_times, dtype=np.float64)
    values = np.asarray(h1_values, dtype=np.float64)
    if times.shape != values.shape or times.ndim != 1:
        raise DomainError("knot times and values must be 1-D arrays of equal length")
    if times.size < 3:
        raise SampleSizeError("interpolation needs at least 3 knots")
    if np.any(np.diff(times) <= 0):
        raise OrderingError("knot times must be strictly increasing")
    if np.any(~(values >= 0)):
        raise DomainError("variances must be nonnegative")

    spline = CubicSpline(times, values, bc_type=boundary)
    stationary = spline.derivative().roots(extrapolate=False)
    clamped = bool(stationary.size and np.min(spline(stationary)) < 0)
    if clamped:
        logger.warning("variance spline dips below zero between knots; clamping to 0")
    return VarianceTriple(
        knot_times=times, h1=values, spline=spline, clamped=clamped, h0=h0
    )


@dataclass(frozen=True)
class JlsParams:
    A: float
    B: float
    C: float
    t_c: float
    m: float
    omega: float
    phi: float

    def __post_init__(self) -> None:
        if not 0 < self.m < 1:
            raise DomainError("m must lie in (0, 1)")
        if not self.omega > 0:
            raise DomainError("omega must be positive")

    @property
    def oscillation_dominates(self) -> bool:
        """True when |C| > |B|, outside the recommended regime."""
        return abs(self.C) > abs(self.B)


def jls_evaluate(params: JlsParams, t: float | ArrayLike) -> float | NDArray[np.float64]:
    """Expected log-price A + (t_c - t)**m (B + C cos(omega ln(t_c - t) - phi))."""

    tau = params.t_c - np.asarray(t, dtype=np.float64)
    if np.any(~(tau > 0)):
        raise DomainError("log-periodic values are only defined before t_c")
    power = tau**params.m
    value = params.A + power * (
        params.B + params.C * np.cos(params.omega * np.log(tau) - params.phi)
    )
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class JlsSearch:
    """Grid bounds (low, high, points) for t_c, m and omega."""

    t_c: tuple[float, float, int]
    m: tuple[float, float, int] = (0.05, 0.95, 15)
    omega: tuple[float, float, int] = (2.0, 20.0, 30)

    def __post_init__(self) -> None:
        for name in ("t_c", "m", "omega"):
            low, high, points = getattr(self, name)
            if points < 1 or high < low:
                raise DomainError(f"{name} grid needs high >= low and at least 1 point")
        if not (0 < self.m[0] and self.m[1] < 1):
            raise DomainError("m grid must lie inside (0, 1)")
        if not self.omega[0] > 0:
            raise DomainError("omega grid must be positive")

    @classmethod
    def around(cls, series: PriceSeries, points: int = 50) -> "JlsSearch":
        """Default critical-time range from 2% to 50% of the span past the last point."""
        span = float(series.times[-1] - series.times[0])
        last = float(series.times[-1])
        return cls(t_c=(last + 0.02 * span, last + 0.5 * span, points))

    @property
    def size(self) -> tuple[int, int, int]:
        return (self.t_c[2], self.m[2], self.omega[2])

    @staticmethod
    def axis(bounds: tuple[float, float, int]) -> NDArray[np.float64]:
        return np.linspace(bounds[0], bounds[1], bounds[2])


@dataclass(frozen=True)
class JlsFit:
    params: JlsParams
    rmse: float
    search_grid_size: tuple[int, int, int]
    skipped: int = 0


def _jls_design(times: NDArray[np.float64], t_c: float, m: float, omega: float) -> NDArray[np.float64]:
    tau = t_c - times
    power = tau**m
    phase = omega * np.log(tau)
    return np.column_stack((np.ones_like(tau), power, power * np.cos(phase), power * np.sin(phase)))


def _jls_scan(
    times: NDArray[np.float64],
    y: NDArray[np.float64],
    t_c: float,
    m_axis: NDArray[np.float64],
    omega_axis: NDArray[np.float64],
) -> tuple[float, tuple[float, float, float] | None, int]:
    """Best (sse, point) over one critical time, solving all omegas at once."""

    tau = t_c - times
    log_tau = np.log(tau)
    phase = np.outer(omega_axis, log_tau)
    best_sse, best_point, skipped = math.inf, None, 0
    for m in m_axis:
        power = tau**m
        design = np.empty((omega_axis.size, times.size, 4))
        design[:, :, 0] = 1.0
        design[:, :, 1] = power
        design[:, :, 2] = power * np.cos(phase)
        design[:, :, 3] = power * np.sin(phase)
        gram = np.einsum("kni,knj->kij", design, design)
        moment = np.einsum("kni,n->ki", design, y)
        usable = np.linalg.cond(gram) < MAX_CONDITION
        skipped += int(np.count_nonzero(~usable))
        if not np.any(usable):
            continue
        coefficients = np.linalg.solve(gram[usable], moment[usable][:, :, None])[:, :, 0]
        residuals = y[None, :] - np.einsum("kni,ki->kn", design[usable], coefficients)
        sse = np.sum(residuals**2, axis=1)
        index = int(np.argmin(sse))
        if sse[index] < best_sse:
            best_sse = float(sse[index])
            best_point = (t_c, float(m), float(omega_axis[usable][index]))
    return best_sse, best_point, skipped


def _jls_linear(
    times: NDArray[np.float64], y: NDArray[np.float64], point: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    design = _jls_design(times, *point)
    coefficients, *_ = np.linalg.lstsq(design, y, rcond=None)
    return coefficients, y - design @ coefficients


def jls_fit(series: PriceSeries, search: JlsSearch | None = None, threads: int = 1) -> JlsFit:
    """
    Fit the log-periodic crash model to ln(price).

    For every grid point of (t_c, m, omega) the linear parameters
    (A, B, C cos phi, C sin phi) are solved by least squares; ill-conditioned
    points are skipped. The grid minimum, with ties kept in lexicographic
    grid order, is polished by a bounded local least-squares search.
    """

    if len(series) < MIN_JLS_POINTS:
        raise SampleSizeError(f"log-periodic fitting needs at least {MIN_JLS_POINTS} points")
    search = search or JlsSearch.around(series)
    times = series.times
    last = float(times[-1])
    if not search.t_c[0] > last:
        raise DomainError("the t_c search range must start after the last observation")
    y = np.log(series.prices)

    t_c_axis = JlsSearch.axis(search.t_c)
    m_axis = JlsSearch.axis(search.m)
    omega_axis = JlsSearch.axis(search.omega)

    def scan(t_c: float) -> tuple[float, tuple[float, float, float] | None, int]:
        return _jls_scan(times, y, float(t_c), m_axis, omega_axis)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        scans = list(pool.map(scan, t_c_axis))

    skipped = sum(result[2] for result in scans)
    candidates = [(sse, point) for sse, point, _ in scans if point is not None]
    if not candidates:
        raise FitError("every grid point was rank-deficient")
    # min() keeps the first of equal values, which is the lexicographic grid order
    grid_sse, grid_point = min(candidates, key=lambda item: item[0])
    logger.debug(
        "log-periodic grid {} points, {} skipped, best {} (sse={:.3g})",
        math.prod(search.size),
        skipped,
        grid_point,
        grid_sse,
    )

    lower = np.array([max(search.t_c[0], last + 1e-9 * max(1.0, abs(last))), max(search.m[0], 1e-6), search.omega[0]])
    upper = np.array([search.t_c[1], min(search.m[1], 1 - 1e-6), search.omega[1]])
    upper = np.maximum(upper, lower + 1e-9 * np.maximum(1.0, np.abs(lower)))
    start = np.clip(np.array(grid_point), lower, upper)
    polished = least_squares(
        lambda point: _jls_linear(times, y, point)[1],
        start,
        bounds=(lower, upper),
        method="trf",
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
    )

    best_point = start
    coefficients, residuals = _jls_linear(times, y, start)
    candidate_coefficients, candidate_residuals = _jls_linear(times, y, polished.x)
    if np.sum(candidate_residuals**2) <= np.sum(residuals**2):
        best_point, coefficients, residuals = polished.x, candidate_coefficients, candidate_residuals

    t_c, m, omega = (float(value) for value in best_point)
    params = JlsParams(
        A=float(coefficients[0]),
        B=float(coefficients[1]),
        C=float(math.hypot(coefficients[2], coefficients[3])),
        t_c=t_c,
        m=m,
        omega=omega,
        phi=float(math.atan2(coefficients[3], coefficients[2]) % (2 * math.pi)),
    )
    if params.oscillation_dominates:
        logger.warning("fitted |C| exceeds |B|; the hazard would turn negative")
    return JlsFit(
        params=params,
        rmse=float(math.sqrt(np.mean(residuals**2))),
        search_grid_size=search.size,
        skipped=skipped,
    )


@dataclass(frozen=True)
class RegimeSlopes:
    breakpoints: tuple[float, ...]
    slopes: tuple[float, ...]
    slope_errors: tuple[float, ...]
    counts: tuple[int, ...] = ()

    @property
    def exponents(self) -> tuple[float, ...]:
        """Density exponents xi = -slope."""
        return tuple(-slope for slope in self.slopes)


def _segment_slope(
    segment: NDArray[np.float64], low: float, high: float, total: int
) -> tuple[float, float]:
    edges = np.geomspace(low, high, SEGMENT_BINS + 1)
    counts, _ = np.histogram(segment, bins=edges)
    filled = counts > 0
    if np.count_nonzero(filled) < 4:
        raise SegmentSizeError("fewer than 4 occupied bins in a segment")
    density = counts[filled] / (total * np.diff(edges)[filled])
    centers = np.sqrt(edges[:-1] * edges[1:])[filled]
    coefficients, covariance = np.polyfit(
        np.log(centers), np.log(density), 1, w=np.sqrt(counts[filled]), cov=True
    )
    return float(coefficients[0]), float(math.sqrt(covariance[0, 0]))


def regime_slopes(
    samples: Iterable[float] | ArrayLike, breakpoints: Iterable[float] = ()
) -> RegimeSlopes:
    """
    Log-log density slopes of ``samples`` on the segments cut by ``breakpoints``.

    Each segment is histogrammed into 20 log-spaced bins and the log density
    is regressed on the log bin center with sqrt(count) weights.
    """

    values = _positive_samples(samples)
    cuts = tuple(float(point) for point in breakpoints)
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise OrderingError("breakpoints must be strictly increasing")
    low, high = float(values.min()), float(values.max())
    if cuts and (cuts[0] <= low or cuts[-1] >= high):
        raise DomainError("breakpoints must lie strictly inside the sample range")

    edges = (low, *cuts, high)
    slopes, errors, counts = [], [], []
    for index, (start, stop) in enumerate(zip(edges, edges[1:])):
        last = index == len(edges) - 2
        mask = (values >= start) & ((values <= stop) if last else (values < stop))
        segment = values[mask]
        if segment.size < MIN_SEGMENT_SAMPLES:
            raise SegmentSizeError(
                f"segment [{start:.4g}, {stop:.4g}] holds {segment.size} samples; "
                f"need {MIN_SEGMENT_SAMPLES}"
            )
        slope, error = _segment_slope(segment, start, stop, values.size)
        slopes.append(slope)
        errors.append(error)
        counts.append(int(segment.size))
    return RegimeSlopes(
        breakpoints=cuts, slopes=tuple(slopes), slope_errors=tuple(errors), counts=tuple(counts)
    )


def kinematic_crossover(
    dt_samples: ArrayLike, ds_samples: ArrayLike, bins: int = 40
) -> float:
    """
    Interval where the local log-log exponent of displacement vs interval
    crosses 1.5, halfway between the drift (1) and acceleration (2) regimes.
    """

    intervals = _positive_samples(dt_samples)
    displacements = _positive_samples(ds_samples)
    if intervals.shape != displacements.shape:
        raise DomainError("interval and displacement samples must pair up")
    edges = np.geomspace(intervals.min(), intervals.max(), bins + 1)
    which = np.clip(np.searchsorted(edges, intervals, side="right") - 1, 0, bins - 1)
    log_dt, log_ds = np.log(intervals), np.log(displacements)
    centers, levels = [], []
    for index in range(bins):
        mask = which == index
        if np.any(mask):
            centers.append(float(np.median(log_dt[mask])))
            levels.append(float(np.median(log_ds[mask])))
    if len(centers) < 3:
        raise SampleSizeError("too few occupied interval bins")

    centers_arr = np.array(centers)
    exponents = np.diff(levels) / np.diff(centers_arr)
    midpoints = 0.5 * (centers_arr[1:] + centers_arr[:-1])
    above = exponents >= 1.5
    crossings = np.flatnonzero(~above[:-1] & above[1:])
    if not crossings.size:
        raise FitError("the local exponent never crosses 1.5 in the sampled range")
    i = int(crossings[0])
    fraction = (1.5 - exponents[i]) / (exponents[i + 1] - exponents[i])
    return float(math.exp(midpoints[i] + fraction * (midpoints[i + 1] - midpoints[i])))
