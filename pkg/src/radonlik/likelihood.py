"""Model families as density kernels and likelihood-curve machinery.

A model family couples a finite parameter grid with one density kernel per
registered dominating measure. Likelihood curves are log-density values over
the grid at a fixed observation; the proportionality checker verifies that
two curves differ by a parameter-free constant, which is the working test
that two dominating measures lead to the same inference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .measures import DominatingMeasure

NEG_INF = float("-inf")


@dataclass(frozen=True)
class SampleSpace:
    """Descriptor of where observations live.

    Scalar spaces carry atoms and/or a 1-D region and support membership
    checks; structured spaces (point patterns, paths) are label-only.
    """

    label: str = "omega"
    atoms: tuple = ()
    region: tuple[float, float] | None = None

    def contains(self, omega) -> bool:
        if not self.atoms and self.region is None:
            return True  # label-only space: no scalar membership test
        if self.atoms and omega in self.atoms:
            return True
        if self.region is not None:
            lo, hi = self.region
            try:
                return lo <= omega <= hi
            except TypeError:
                return False
        return False


class ModelFamily:
    """Parameter grid plus density kernels keyed by dominating-measure id.

    Kernels may be registered in linear domain (values in [0, inf)) or
    directly in log domain; evaluation is always log-domain. An optional
    closed-form interval mass function `interval_mass(theta, lo, hi)`
    short-circuits quadrature in neighborhood-mass computations.
    """

    def __init__(self, theta_grid: Sequence, sample_space: SampleSpace | None = None,
                 interval_mass: Callable | None = None):
        self.theta_grid = tuple(theta_grid)
        if not self.theta_grid:
            raise ValueError("theta grid must be non-empty")
        self.sample_space = sample_space if sample_space is not None else SampleSpace()
        self.interval_mass = interval_mass
        self._log_kernels: dict[str, Callable] = {}
        self._vec_kernels: dict[str, Callable] = {}

    @property
    def measure_ids(self) -> tuple[str, ...]:
        return tuple(self._log_kernels)

    def register_kernel(self, measure_id: str, kernel: Callable,
                        theta_vectorized: bool = False) -> None:
        """Register a linear-domain density kernel (theta, omega) -> [0, inf).

        With theta_vectorized=True the kernel must also accept a theta array
        and return the density array; prior integration exploits this.
        """

        def log_kernel(theta, omega):
            value = kernel(theta, omega)
            if value < 0:
                raise ValueError(f"kernel for {measure_id!r} returned negative value {value}")
            return math.log(value) if value > 0 else NEG_INF

        self._log_kernels[measure_id] = log_kernel
        if theta_vectorized:
            self._vec_kernels[measure_id] = kernel

    def vectorized_kernel(self, measure_id: str) -> Callable | None:
        return self._vec_kernels.get(measure_id)

    def register_log_kernel(self, measure_id: str, log_kernel: Callable) -> None:
        self._log_kernels[measure_id] = log_kernel

    def log_kernel(self, measure_id: str, theta, omega) -> float:
        if measure_id not in self._log_kernels:
            raise KeyError(f"no kernel registered for measure id {measure_id!r}")
        return self._log_kernels[measure_id](theta, omega)


@dataclass(frozen=True)
class LogLikelihoodCurve:
    """Log-density over the parameter grid at one observation."""

    measure_id: str
    observation_id: str
    thetas: tuple
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.thetas):
            raise ValueError("curve length must equal grid length")

    def shifted(self, constant: float) -> "LogLikelihoodCurve":
        vals = tuple(v + constant if v != NEG_INF else NEG_INF for v in self.values)
        return LogLikelihoodCurve(self.measure_id, self.observation_id, self.thetas, vals)


@dataclass(frozen=True)
class ProportionalityReport:
    constant_log_ratio: float | None
    max_deviation: float
    passed: bool


def eval_log_density(family: ModelFamily, measure_id: str, theta, omega) -> float:
    """Log of the registered kernel; -inf where the kernel vanishes."""
    if not family.sample_space.contains(omega):
        raise ValueError(f"observation {omega!r} outside sample space {family.sample_space.label!r}")
    return family.log_kernel(measure_id, theta, omega)


def likelihood_curve(family: ModelFamily, measure_id: str, omega,
                     observation_id: str = "obs") -> LogLikelihoodCurve:
    values = tuple(eval_log_density(family, measure_id, theta, omega)
                   for theta in family.theta_grid)
    return LogLikelihoodCurve(measure_id=measure_id, observation_id=observation_id,
                              thetas=family.theta_grid, values=values)


def check_proportionality(curve1: LogLikelihoodCurve, curve2: LogLikelihoodCurve,
                          tol: float = 1e-8) -> ProportionalityReport:
    """Do the two curves differ by a parameter-free constant?

    The log-ratio is taken over grid points where both curves are finite and
    centered at its median; the check passes when the worst deviation from
    the median is within tol and the -inf patterns of the curves coincide.
    """
    if curve1.thetas != curve2.thetas:
        raise ValueError("curves do not share a theta grid")
    if curve1.observation_id != curve2.observation_id:
        raise ValueError("curves were computed at different observations")
    finite1 = [v != NEG_INF for v in curve1.values]
    finite2 = [v != NEG_INF for v in curve2.values]
    patterns_match = finite1 == finite2
    deltas = [a - b for a, b, f1, f2 in zip(curve1.values, curve2.values, finite1, finite2)
              if f1 and f2]
    if not deltas:
        return ProportionalityReport(constant_log_ratio=None,
                                     max_deviation=math.inf, passed=False)
    center = float(np.median(deltas))
    max_dev = max(abs(d - center) for d in deltas)
    return ProportionalityReport(constant_log_ratio=center, max_deviation=max_dev,
                                 passed=patterns_match and max_dev <= tol)


def argmax_indices(curve: LogLikelihoodCurve) -> frozenset[int]:
    top = max(curve.values)
    return frozenset(i for i, v in enumerate(curve.values) if v == top)


def argmax_invariance(curve1: LogLikelihoodCurve, curve2: LogLikelihoodCurve) -> bool:
    """True iff both curves attain their maxima on the same grid index set."""
    if curve1.thetas != curve2.thetas:
        raise ValueError("curves do not share a theta grid")
    return argmax_indices(curve1) == argmax_indices(curve2)


def _mass_in_ball(family: ModelFamily, measure: DominatingMeasure, theta,
                  center: float, radius: float) -> float:
    """P_theta mass of a closed 1-D ball, via the registered kernel."""
    if family.interval_mass is not None:
        return family.interval_mass(theta, center - radius, center + radius)
    mass = 0.0
    for atom in measure.atoms_in_ball(center, radius):
        mass += math.exp(family.log_kernel(measure.id, theta, atom)) * measure.atom_mass(atom)
    if measure.region is not None:
        lo = max(measure.region[0], center - radius)
        hi = min(measure.region[1], center + radius)
        if hi > lo:
            atoms_inside = [a for a in measure.atoms if lo < a < hi]

            def integrand(y):
                return math.exp(family.log_kernel(measure.id, theta, y))

            value, _ = quad(integrand, lo, hi, points=atoms_inside or None,
                            epsabs=1e-13, limit=200)
            mass += measure.lebesgue_scale * value
    return mass


def neighborhood_density_limit(family: ModelFamily, measure: DominatingMeasure, theta,
                               omega0: float, radii: Sequence[float]) -> list[float]:
    """Shrinking-ball mass ratios P_theta(B(omega0, r)) / nu(B(omega0, r)).

    The sequence of ratios converges to the continuous density version at
    omega0 (or to the atom mass at an atom of the base measure).
    """
    radii = list(radii)
    if not radii or any(r <= 0 for r in radii):
        raise ValueError("radii must be positive")
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly decreasing")
    ratios = []
    for r in radii:
        denom = measure.ball_mass(omega0, r)
        if denom == 0.0:
            raise ValueError(f"base measure puts no mass on the ball of radius {r} at {omega0}")
        ratios.append(_mass_in_ball(family, measure, theta, omega0, r) / denom)
    return ratios


def total_mass(family: ModelFamily, measure: DominatingMeasure, theta) -> float:
    """Integral of the registered kernel against the measure; should be 1."""
    mass = 0.0
    for atom, weight in zip(measure.atoms, measure.atom_weights):
        mass += math.exp(family.log_kernel(measure.id, theta, atom)) * weight
    if measure.region is not None:
        lo, hi = measure.region
        atoms_inside = [a for a in measure.atoms if lo < a < hi]

        def integrand(y):
            return math.exp(family.log_kernel(measure.id, theta, y))

        value, _ = quad(integrand, lo, hi, points=atoms_inside or None,
                        epsabs=1e-10, limit=200)
        mass += measure.lebesgue_scale * value
    return mass


def finite_family(atoms: Sequence, mass_rows: Sequence[Sequence[float]], theta_grid: Sequence,
                  measure_id: str = "counting") -> ModelFamily:
    """Finite discrete family from a (grid x atoms) probability mass table."""
    atoms = tuple(atoms)
    table = {}
    for theta, row in zip(theta_grid, mass_rows):
        row = tuple(row)
        if len(row) != len(atoms):
            raise ValueError("each mass row must cover every atom")
        if any(p < 0 for p in row):
            raise ValueError("masses must be nonnegative")
        total = sum(row)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"masses for theta {theta!r} sum to {total}, not 1")
        table[theta] = dict(zip(atoms, row))
    family = ModelFamily(theta_grid, SampleSpace(label="atoms", atoms=atoms))
    family.register_kernel(measure_id, lambda theta, omega: table[theta][omega])
    return family
