"""Exact computations free of simulation noise.

Three tools live here: a dynamic program for the reflected symmetric walk's
first passage to a level, the Brownian two-sided exit tail it converges to
under diffusive scaling, and the handful of closed-form constants that the
statistical experiments are measured against.  Everything in this module is
deterministic, so test expectations can be equalities, not confidence bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gapenv import _check_epsilon, gamma_of_epsilon


@dataclass
class DistributionVector:
    """Occupation law of the reflected walk on {0, ..., m} with m absorbing.

    probabilities[j] is the mass at height j among not-yet-absorbed paths;
    absorbed_mass accumulates everything that has reached m.  One call to
    propagate advances a single time step: 0 steps to 1 surely, interior
    sites split evenly, and mass entering m is absorbed immediately.
    """

    probabilities: np.ndarray
    absorbed_mass: float = 0.0

    @classmethod
    def point_mass(cls, level: int, at: int = 0) -> "DistributionVector":
        if level < 1:
            raise ValueError(f"level must be at least 1, got {level}")
        if not 0 <= at <= level:
            raise ValueError(f"start must lie in [0, {level}], got {at}")
        q = np.zeros(level + 1)
        q[at] = 1.0
        return cls(probabilities=q)

    @property
    def level(self) -> int:
        return self.probabilities.size - 1

    @property
    def surviving_mass(self) -> float:
        return float(self.probabilities[: self.level].sum())

    @property
    def total_mass(self) -> float:
        return self.surviving_mass + self.absorbed_mass

    def propagate(self) -> None:
        m = self.level
        q = self.probabilities
        nq = np.zeros_like(q)
        nq[1] += q[0]
        if m >= 2:
            nq[2 : m + 1] += 0.5 * q[1:m]
            nq[0 : m - 1] += 0.5 * q[1:m]
        self.absorbed_mass += float(nq[m])
        nq[m] = 0.0
        self.probabilities = nq


@dataclass(frozen=True)
class FirstPassageLaw:
    """Tail of the first-passage time of the reflected walk to `level`.

    tail_probabilities[t] = P(T >= t) for t = 0, ..., horizon, and
    mean_hitting_time = sum of the tails from t = 1, which equals E[T]
    when the horizon captures essentially all of the mass and otherwise a
    lower bound (flagged by mean_is_lower_bound).
    """

    level: int
    horizon: int
    tail_probabilities: np.ndarray
    mean_hitting_time: float
    mean_is_lower_bound: bool

    def tail_at(self, t: int) -> float:
        if not 0 <= t <= self.horizon:
            raise ValueError(f"t must lie in [0, {self.horizon}], got {t}")
        return float(self.tail_probabilities[t])


_MASS_TOLERANCE = 1e-12


def dp_first_passage_reflected(level: int, horizon: int | None = None) -> FirstPassageLaw:
    """Exact first-passage law of the walk reflected at 0 and absorbed at `level`.

    The walk starts at 0.  The default horizon, 50 * level**2, leaves less
    than 1e-12 unabsorbed mass, so the summed tails give the exact mean
    E[T] = level**2 up to float rounding.
    """
    if level < 1:
        raise ValueError(f"level must be at least 1, got {level}")
    if horizon is None:
        horizon = 50 * level * level
    if horizon < level:
        raise ValueError(f"horizon must be at least level={level}, got {horizon}")
    state = DistributionVector.point_mass(level)
    tails = np.ones(horizon + 1)
    for t in range(1, horizon + 1):
        surviving = state.surviving_mass
        tails[t] = surviving
        if surviving == 0.0:
            tails[t:] = 0.0
            break
        state.propagate()
    mean = float(tails[1:].sum())
    return FirstPassageLaw(
        level=level,
        horizon=horizon,
        tail_probabilities=tails,
        mean_hitting_time=mean,
        mean_is_lower_bound=state.absorbed_mass < 1.0 - _MASS_TOLERANCE,
    )


def normal_cdf(x: float) -> float:
    """Standard normal distribution function via the complementary error function."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


_BM_TERM_CUTOFF = 1e-14


def bm_two_sided_tail(t: float) -> float:
    """P(max over s <= t of |B_s| < 1) for a standard Brownian motion.

    Computed from the alternating image-charge series
    sum_k (-1)**k [Phi((2k+1)/sqrt(t)) - Phi((2k-1)/sqrt(t))], truncated once
    the terms fall below 1e-14 and clamped to [0, 1] against the last term's
    rounding.  This is the diffusive limit of the reflected walk's two-sided
    exit tail.
    """
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    s = math.sqrt(t)
    total = 2.0 * normal_cdf(1.0 / s) - 1.0
    k = 1
    while True:
        term = 2.0 * (normal_cdf((2 * k + 1) / s) - normal_cdf((2 * k - 1) / s))
        if k % 2:
            total -= term
        else:
            total += term
        if abs(term) < _BM_TERM_CUTOFF:
            break
        k += 1
    return min(1.0, max(0.0, total))


@dataclass(frozen=True)
class DerivedConstants:
    """Closed-form quantities implied by the gap exponent epsilon.

    alpha = gamma / (2 * expected_gap) is the per-gap coefficient entering
    the slow-crossing rate, and beta_floor a universal lower bound on the
    conditional slow-crossing probability; their product over two bounds the
    crossing rate from below.
    """

    epsilon: float
    gamma: float = field(init=False)
    expected_gap: float = field(init=False)
    alpha: float = field(init=False)
    beta_floor: float = 0.3

    def __post_init__(self) -> None:
        _check_epsilon(self.epsilon)
        g = gamma_of_epsilon(self.epsilon)
        r = 4.0 ** -self.epsilon
        mean = 4.0 * (1.0 - r) / (1.0 - 2.0 * r)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "expected_gap", mean)
        object.__setattr__(self, "alpha", g / (2.0 * mean))

    @property
    def crossing_rate_ceiling(self) -> float:
        return self.alpha * self.beta_floor / 2.0


def derived_constants(epsilon: float) -> DerivedConstants:
    """Bundle gamma, the mean gap, alpha, and the beta floor for `epsilon`."""
    return DerivedConstants(epsilon=epsilon)
