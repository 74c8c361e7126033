"""Diffusion pseudo-likelihood via unit-diffusion transform and bridges.

Distinct diffusion coefficients give mutually singular path laws, so no
likelihood exists on raw paths across theta. The working decomposition keeps
the discrete observations and re-expresses the path between them as bridges
pinned to zero, which are dominated by the standard Brownian-bridge law.
All path-space integrals are trapezoid sums on uniform grids; that is an
implementation device approximating the continuous-time objects.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .likelihood import NEG_INF, ModelFamily, SampleSpace

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

MEASURE_OBS_BRIDGE = "obs-bridge-product"
MEASURE_OBS_BRIDGE_TILTED = "obs-bridge-tilted"


@dataclass(frozen=True)
class SDESpec:
    """dY = a(Y, theta) dt + sigma(Y, theta) dW on a state interval.

    Closed forms for the space transform, its inverse, the unit-diffusion
    drift, its x-derivative, and the drift integral may be supplied; generic
    quadrature / bracketing routes are used otherwise. sigma must stay
    bounded away from zero on the working interval.
    """

    name: str
    drift: Callable              # a(y, theta)
    sigma: Callable              # sigma(y, theta) > 0
    dsigma_dy: Callable          # d sigma / d y, closed form
    state: tuple[float, float]
    base_point: float
    eta: Callable | None = None          # closed-form transform
    eta_inv: Callable | None = None      # closed-form inverse, vectorized in x
    alpha_fn: Callable | None = None     # closed-form unit-diffusion drift (x, theta)
    dalpha_dx: Callable | None = None    # closed-form d alpha / d x
    drift_integral_fn: Callable | None = None   # closed-form A(u, theta)


@dataclass(frozen=True)
class ObservationSet:
    """Strictly increasing observation times with values."""

    times: tuple
    values: tuple

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")
        if len(self.times) < 2:
            raise ValueError("need at least two observations")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")

    @property
    def n_intervals(self) -> int:
        return len(self.times) - 1


def observations_from_csv(path) -> ObservationSet:
    """Read (t, y) rows; a leading header row is tolerated."""
    times, values = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                t, y = float(row[0]), float(row[1])
            except ValueError:
                continue  # header
            times.append(t)
            values.append(y)
    return ObservationSet(times=tuple(times), values=tuple(values))


def observations_to_csv(obs: ObservationSet, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "y"])
        for t, y in zip(obs.times, obs.values):
            writer.writerow([repr(t), repr(y)])


@dataclass(frozen=True)
class TransformedObservations:
    """Observation values pushed through the space transform at one theta.

    The transform is strictly increasing in y (sigma > 0), so the transformed
    values preserve the ordering of ties-free observations; violations signal
    a broken sigma.
    """

    theta: object
    values: tuple

    def __post_init__(self):
        if len(self.values) < 2:
            raise ValueError("need at least two transformed observations")


def transform_observations(spec: "SDESpec", obs: "ObservationSet", theta) -> TransformedObservations:
    x = tuple(lamperti(spec, y, theta) for y in obs.values)
    pairs = sorted(zip(obs.values, x))
    for (y1, x1), (y2, x2) in zip(pairs, pairs[1:]):
        if y1 < y2 and not x1 < x2:
            raise ValueError("space transform is not strictly increasing; check sigma")
    return TransformedObservations(theta=theta, values=x)


@dataclass(frozen=True)
class BridgeSegment:
    """Zero-pinned path values on a uniform grid over one interval."""

    t0: float
    t1: float
    values: np.ndarray   # shape (m + 1,), endpoints exactly 0

    @property
    def n_steps(self) -> int:
        return len(self.values) - 1

    @property
    def step(self) -> float:
        return (self.t1 - self.t0) / self.n_steps

    @property
    def fractions(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_steps + 1)


@dataclass(frozen=True)
class BridgeSet:
    segments: tuple

    def __post_init__(self):
        for seg in self.segments:
            if seg.values[0] != 0.0 or seg.values[-1] != 0.0:
                raise ValueError("bridge segments must start and end at exactly 0")


# -- space transform ----------------------------------------------------------

def lamperti(spec: SDESpec, y_val: float, theta) -> float:
    """Space transform x = integral of 1/sigma from the base point to y."""
    lo, hi = spec.state
    if not lo <= y_val <= hi:
        raise ValueError(f"value {y_val} outside state interval {spec.state}")
    if spec.eta is not None:
        return float(spec.eta(y_val, theta))
    value, _ = quad(lambda u: 1.0 / spec.sigma(u, theta), spec.base_point, y_val,
                    epsabs=1e-12, limit=400)
    return value


def lamperti_derivative(spec: SDESpec, y_val: float, theta) -> float:
    return 1.0 / spec.sigma(y_val, theta)


def invert_lamperti(spec: SDESpec, x_val, theta):
    """Monotone inversion of the transform; closed form when registered."""
    if spec.eta_inv is not None:
        return spec.eta_inv(x_val, theta)
    if np.ndim(x_val) > 0:
        return np.array([invert_lamperti(spec, float(x), theta) for x in np.ravel(x_val)]
                        ).reshape(np.shape(x_val))

    def f(u):
        return lamperti(spec, u, theta) - x_val

    lo, hi = spec.state
    a = b = spec.base_point
    step = 1.0
    while f(a) > 0.0:
        a = max(lo + 1e-12 if math.isfinite(lo) else a - step, a - step)
        step *= 2.0
        if step > 1e12:
            raise ValueError("bracket search failed on the lower side")
    step = 1.0
    while f(b) < 0.0:
        b = min(hi - 1e-12 if math.isfinite(hi) else b + step, b + step)
        step *= 2.0
        if step > 1e12:
            raise ValueError("bracket search failed on the upper side")
    if a == b:
        return a
    return brentq(f, a, b, xtol=1e-12)


def unit_drift(spec: SDESpec, x_val, theta):
    """Drift of the transformed unit-diffusion process at x.

    With u the preimage of x, alpha(x) = a(u)/sigma(u) - sigma'(u)/2; this is
    the standard drift of the unit-diffusion process obtained from the space
    transform.
    """
    if spec.alpha_fn is not None:
        return spec.alpha_fn(x_val, theta)
    u = invert_lamperti(spec, x_val, theta)
    return spec.drift(u, theta) / spec.sigma(u, theta) - 0.5 * spec.dsigma_dy(u, theta)


def unit_drift_derivative(spec: SDESpec, x_val, theta, h: float = 1e-5):
    if spec.dalpha_dx is not None:
        return spec.dalpha_dx(x_val, theta)
    return (unit_drift(spec, x_val + h, theta) - unit_drift(spec, x_val - h, theta)) / (2.0 * h)


def drift_integral(spec: SDESpec, u: float, theta) -> float:
    """A(u) = integral of the unit-diffusion drift from 0 to u."""
    if spec.drift_integral_fn is not None:
        return float(spec.drift_integral_fn(u, theta))
    if u == 0.0:
        return 0.0
    value, _ = quad(lambda z: float(unit_drift(spec, z, theta)), 0.0, u,
                    epsabs=1e-12, limit=400)
    return value


# -- bridges -------------------------------------------------------------------

def remove_linear(values: np.ndarray, x0: float, x1: float) -> np.ndarray:
    """Subtract the endpoint interpolation; exact zeros at matching endpoints."""
    values = np.asarray(values, dtype=float)
    frac = np.linspace(0.0, 1.0, len(values))
    return values - (1.0 - frac) * x0 - frac * x1


def add_linear(values: np.ndarray, x0: float, x1: float) -> np.ndarray:
    """Inverse of remove_linear."""
    values = np.asarray(values, dtype=float)
    frac = np.linspace(0.0, 1.0, len(values))
    return values + (1.0 - frac) * x0 + frac * x1


def sample_brownian_bridge(length: float, step: float, seed) -> np.ndarray:
    """Standard Brownian bridge on a uniform grid; endpoints exactly 0."""
    if length <= 0 or step <= 0:
        raise ValueError("length and step must be positive")
    m = round(length / step)
    if m < 1 or abs(m * step - length) > 1e-12 * max(1.0, length):
        raise ValueError(f"step {step} does not divide interval length {length}")
    rng = np.random.default_rng(seed)
    return _bridge_rows(rng, 1, m, length / m)[0]


def _bridge_rows(rng, rows: int, m: int, dt: float) -> np.ndarray:
    """(rows, m + 1) standard bridges: Brownian paths pinned back to zero."""
    incr = rng.standard_normal((rows, m)) * math.sqrt(dt)
    walk = np.cumsum(incr, axis=1)
    frac = np.linspace(0.0, 1.0, m + 1)
    out = np.empty((rows, m + 1))
    out[:, 0] = 0.0
    out[:, 1:] = walk - frac[1:][None, :] * walk[:, -1:]
    out[:, -1] = 0.0
    return out


def sample_bridge_set(times: Sequence[float], n_steps: int, seed) -> BridgeSet:
    """One standard bridge per observation interval, seeded per interval."""
    segments = []
    for i in range(len(times) - 1):
        t0, t1 = times[i], times[i + 1]
        rng = np.random.default_rng([_seed_int(seed), i])
        values = _bridge_rows(rng, 1, n_steps, (t1 - t0) / n_steps)[0]
        segments.append(BridgeSegment(t0=t0, t1=t1, values=values))
    return BridgeSet(segments=tuple(segments))


def _seed_int(seed) -> int:
    return int(seed) if np.isscalar(seed) else int(seed[0])


# -- joint density of observations and bridges ---------------------------------

def obs_bridge_log_density(spec: SDESpec, obs: ObservationSet, bridges: BridgeSet,
                           theta) -> float:
    """Joint log pseudo-density of (observations, zero-pinned bridges).

    Per interval: the transform Jacobian at the right endpoint, the standard
    Gaussian density of the standardized transformed increment, and the
    drift correction exp{A(x_n) - A(x_0) - integral of (alpha^2 + alpha')/2
    along the de-pinned path}, the integral by trapezoid on the bridge grid.
    """
    if len(bridges.segments) != obs.n_intervals:
        raise ValueError("bridge set must cover every observation interval")
    x = transform_observations(spec, obs, theta).values
    value = 0.0
    for i in range(1, len(obs.values)):
        dt = obs.times[i] - obs.times[i - 1]
        z = (x[i] - x[i - 1]) / math.sqrt(dt)
        value += math.log(lamperti_derivative(spec, obs.values[i], theta))
        value += -0.5 * z * z - LOG_SQRT_2PI
    value += drift_integral(spec, x[-1], theta) - drift_integral(spec, x[0], theta)
    for i, seg in enumerate(bridges.segments):
        path = add_linear(seg.values, x[i], x[i + 1])
        alpha = np.asarray(unit_drift(spec, path, theta), dtype=float)
        alpha_prime = np.asarray(unit_drift_derivative(spec, path, theta), dtype=float)
        integrand = 0.5 * (alpha * alpha + alpha_prime)
        value -= float(np.trapezoid(integrand, dx=seg.step))
    return value


def bridge_tilt_log_weight(obs: ObservationSet, bridges: BridgeSet) -> float:
    """A fixed positive theta-free functional of the data and bridges, used
    as the density of an alternative tilted reference measure."""
    total = sum(abs(b - a) for a, b in zip(obs.values, obs.values[1:]))
    for seg in bridges.segments:
        total += 0.5 * float(np.mean(seg.values ** 2))
    return total


def diffusion_model_family(spec: SDESpec, theta_grid: Sequence) -> ModelFamily:
    """Joint kernel and its theta-free tilted variant over (obs, bridges)."""
    family = ModelFamily(theta_grid, SampleSpace(label="obs-and-bridges"))
    family.register_log_kernel(
        MEASURE_OBS_BRIDGE,
        lambda th, ob: obs_bridge_log_density(spec, ob[0], ob[1], th))
    family.register_log_kernel(
        MEASURE_OBS_BRIDGE_TILTED,
        lambda th, ob: obs_bridge_log_density(spec, ob[0], ob[1], th)
        - bridge_tilt_log_weight(ob[0], ob[1]))
    return family


# -- Monte Carlo transition density --------------------------------------------

def transition_density_mc(spec: SDESpec, theta, t: float, x0: float, x1: float,
                          n_replicates: int, step: float, seed,
                          chunk: int = 2048) -> tuple[float, float]:
    """Transition density of the unit-diffusion process by bridge sampling.

    Returns (estimate, standard error). The estimate is the free Gaussian
    density times the average drift-correction weight along pinned Brownian
    paths from x0 to x1; replicates accumulate in fixed chunk order.
    """
    if n_replicates < 100:
        raise ValueError("need at least 100 replicates")
    m = round(t / step)
    if m < 1 or abs(m * step - t) > 1e-9 * max(1.0, t):
        raise ValueError(f"step {step} does not divide t {t}")
    dt = t / m
    frac = np.linspace(0.0, 1.0, m + 1)
    base_line = x0 + frac * (x1 - x0)
    delta_a = drift_integral(spec, x1, theta) - drift_integral(spec, x0, theta)
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_replicates:
        rows = min(chunk, n_replicates - done)
        paths = _bridge_rows(rng, rows, m, dt) + base_line[None, :]
        alpha = np.asarray(unit_drift(spec, paths, theta), dtype=float)
        alpha_prime = np.asarray(unit_drift_derivative(spec, paths, theta), dtype=float)
        integrand = 0.5 * (alpha * alpha + alpha_prime)
        integral = np.trapezoid(integrand, dx=dt, axis=1)
        weights = np.exp(delta_a - integral)
        total += float(np.sum(weights))
        total_sq += float(np.sum(weights * weights))
        done += rows
    mean = total / n_replicates
    var = max(0.0, (total_sq - n_replicates * mean * mean) / (n_replicates - 1))
    z = (x1 - x0) / math.sqrt(t)
    prefactor = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi * t)
    return prefactor * mean, prefactor * math.sqrt(var / n_replicates)


def mle_theta(spec: SDESpec, obs: ObservationSet, theta_grid: Sequence,
              n_replicates: int, step_fraction: float, seed) -> tuple[frozenset[int], list[float]]:
    """Grid argmax of the MC observed-data log likelihood.

    Bridge noise is seeded per interval only, so all grid points see common
    random numbers. step_fraction scales the trapezoid step relative to each
    interval length. Returns (argmax index set, log-likelihood curve).
    """
    theta_grid = tuple(theta_grid)
    if not theta_grid:
        raise ValueError("theta grid must be non-empty")
    curve = []
    for theta in theta_grid:
        x = transform_observations(spec, obs, theta).values
        loglik = 0.0
        for i in range(obs.n_intervals):
            dt_i = obs.times[i + 1] - obs.times[i]
            est, _ = transition_density_mc(
                spec, theta, dt_i, x[i], x[i + 1], n_replicates,
                dt_i * step_fraction, seed=[_seed_int(seed), i])
            if est <= 0.0:
                loglik = NEG_INF
                break
            loglik += math.log(est)
            loglik += math.log(lamperti_derivative(spec, obs.values[i + 1], theta))
        curve.append(loglik)
    top = max(curve)
    if top == NEG_INF:
        raise ValueError("all grid points give zero estimated likelihood")
    return frozenset(i for i, v in enumerate(curve) if v == top), curve


# -- catalog --------------------------------------------------------------------

def ou_spec(sigma0: float = 1.0) -> SDESpec:
    """Mean-reverting drift -theta y with constant diffusion sigma0."""
    return SDESpec(
        name="ou",
        drift=lambda y, th: -th * y,
        sigma=lambda y, th: sigma0,
        dsigma_dy=lambda y, th: 0.0,
        state=(-math.inf, math.inf),
        base_point=0.0,
        eta=lambda y, th: y / sigma0,
        eta_inv=lambda x, th: sigma0 * x,
        alpha_fn=lambda x, th: -th * x,
        dalpha_dx=lambda x, th: -th + 0.0 * x,
        drift_integral_fn=lambda u, th: -0.5 * th * u * u,
    )


def brownian_drift_spec() -> SDESpec:
    """Constant drift theta with unit diffusion."""
    return SDESpec(
        name="brownian-drift",
        drift=lambda y, th: th,
        sigma=lambda y, th: 1.0,
        dsigma_dy=lambda y, th: 0.0,
        state=(-math.inf, math.inf),
        base_point=0.0,
        eta=lambda y, th: y,
        eta_inv=lambda x, th: x,
        alpha_fn=lambda x, th: th + 0.0 * x,
        dalpha_dx=lambda x, th: 0.0 * x,
        drift_integral_fn=lambda u, th: th * u,
    )


def logistic_spec() -> SDESpec:
    """Logistic-type drift theta y (1 - y) with multiplicative sigma(u) = u."""
    return SDESpec(
        name="logistic",
        drift=lambda y, th: th * y * (1.0 - y),
        sigma=lambda y, th: y,
        dsigma_dy=lambda y, th: 1.0,
        state=(1e-9, math.inf),
        base_point=1.0,
        eta=lambda y, th: math.log(y),
        eta_inv=lambda x, th: np.exp(x),
        alpha_fn=lambda x, th: th * (1.0 - np.exp(x)) - 0.5,
        dalpha_dx=lambda x, th: -th * np.exp(x),
        drift_integral_fn=lambda u, th: th * (u - math.exp(u) + 1.0) - 0.5 * u,
    )


SDE_CATALOG = {
    "ou": ou_spec,
    "brownian-drift": brownian_drift_spec,
    "logistic": logistic_spec,
}


def ou_exact_transition_density(theta: float, t: float, x0: float, x1: float) -> float:
    """Closed-form transition density of the unit-diffusion mean-reverting
    process, the oracle for the MC estimator."""
    mean = x0 * math.exp(-theta * t)
    var = (1.0 - math.exp(-2.0 * theta * t)) / (2.0 * theta)
    z = (x1 - mean) / math.sqrt(var)
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi * var)


def simulate_ou(theta: float, x0: float, times: Sequence[float], seed) -> ObservationSet:
    """Exact sampling along the given times using the transition density."""
    rng = np.random.default_rng(seed)
    values = [float(x0)]
    for i in range(1, len(times)):
        dt = times[i] - times[i - 1]
        mean = values[-1] * math.exp(-theta * dt)
        var = (1.0 - math.exp(-2.0 * theta * dt)) / (2.0 * theta)
        values.append(float(mean + math.sqrt(var) * rng.standard_normal()))
    return ObservationSet(times=tuple(float(t) for t in times), values=tuple(values))
