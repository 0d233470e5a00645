"""Heavy-tailed gap law and the cookie environments built on top of it.

The counterexample environment places cookie sites (sites whose jump-right
probability is p at every visit) at renewal points on both half-lines.  The
spacing law is supported on powers of two:

    P(Z = 2**n) = gamma / 4**(epsilon * n)   for n >= 2,

with 1/2 < epsilon < 1, so the mean spacing is finite while the spacing has
infinite variance.  Every site strictly between consecutive cookie sites is
symmetric forever.  The whole picture may be translated left by a shift drawn
uniformly below the first left gap.

Layouts materialize lazily.  Gaps are drawn in fixed-size blocks from a
counter-based generator keyed by (env_seed, side, block_index), so any query
order, and any number of querying threads, observe identical values.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

# Gaps are materialized in blocks of this many draws; the block is the unit of
# the counter-based stream, so changing it would change every layout.
_BLOCK = 8192

_SIDE_RIGHT = 0
_SIDE_LEFT = 1
_SHIFT_STREAM = 2

_MIN_EXPONENT = 2


def _check_epsilon(epsilon: float) -> None:
    if not 0.5 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie strictly between 0.5 and 1, got {epsilon}")


def _check_p(p: float) -> None:
    if not 0.5 < p < 1.0:
        raise ValueError(f"p must lie strictly between 0.5 and 1, got {p}")


def gamma_of_epsilon(epsilon: float) -> float:
    """Normalizer of the gap law: (1 - r) / r**2 with r = 4**(-epsilon).

    Equals the reciprocal of sum_{n>=2} 4**(-epsilon*n).
    """
    _check_epsilon(epsilon)
    r = 4.0 ** -epsilon
    return (1.0 - r) / (r * r)


@dataclass(frozen=True)
class GapDistribution:
    """Law of the spacing between consecutive cookie sites.

    The exponent of the spacing is 2 + G with G geometric of success
    probability 1 - ratio_r, which reproduces the power-law pmf above.
    """

    epsilon: float
    gamma: float = field(init=False)
    ratio_r: float = field(init=False)

    def __post_init__(self) -> None:
        _check_epsilon(self.epsilon)
        r = 4.0 ** -self.epsilon
        object.__setattr__(self, "ratio_r", r)
        object.__setattr__(self, "gamma", (1.0 - r) / (r * r))

    def pmf(self, n: int) -> float:
        """P(Z = 2**n); zero below the minimal exponent."""
        if n < _MIN_EXPONENT:
            return 0.0
        return (1.0 - self.ratio_r) * self.ratio_r ** (n - _MIN_EXPONENT)

    @property
    def expected_gap(self) -> float:
        r = self.ratio_r
        return 4.0 * (1.0 - r) / (1.0 - 2.0 * r)


def sample_gap(dist: GapDistribution, rng_stream: Generator) -> int:
    """Draw one gap, a power of two >= 4, by exact geometric inversion.

    A single uniform u in (0, 1] gives the exponent
    n = 2 + floor(log(u) / log(ratio_r)); no truncation of the support.
    """
    u = 1.0 - rng_stream.random()
    return 1 << (_MIN_EXPONENT + int(math.log(u) / math.log(dist.ratio_r)))


def sample_gaps(dist: GapDistribution, rng_stream: Generator, size: int) -> np.ndarray:
    """Vectorized sample_gap; returns an int64 array of gap values."""
    exps = _exponents_from_uniforms(1.0 - rng_stream.random(size), dist.ratio_r)
    return np.int64(1) << exps


def _exponents_from_uniforms(u: np.ndarray, ratio_r: float) -> np.ndarray:
    return _MIN_EXPONENT + np.floor(np.log(u) / math.log(ratio_r)).astype(np.int64)


def _gap_exponent_block(env_seed: int, side: int, block_index: int, ratio_r: float) -> np.ndarray:
    """Block of gap exponents as a pure function of (env_seed, side, block)."""
    ss = SeedSequence(entropy=(int(env_seed), side, block_index))
    u = 1.0 - Generator(Philox(ss)).random(_BLOCK)
    return _exponents_from_uniforms(u, ratio_r)


class RenewalLayout:
    """Two half-line renewal sequences of cookie sites plus a left shift.

    Partial sums of the right gaps sit at positive positions, mirrored sums
    of the left gaps at negative positions, and the whole set is translated
    by shift_u.  Extension is thread-safe; because every gap is a pure
    function of (env_seed, side, index), layouts with equal seeds are
    identical no matter who asks for what first.
    """

    def __init__(self, distribution: GapDistribution, env_seed: int, shift_u: int = 0):
        self.distribution = distribution
        self.env_seed = int(env_seed)
        self._lock = threading.Lock()
        self._sums = [np.zeros(0, np.int64), np.zeros(0, np.int64)]
        self._exps = [np.zeros(0, np.int64), np.zeros(0, np.int64)]
        self._blocks = [0, 0]
        self.shift_u = 0
        if shift_u:
            self.set_shift(shift_u)

    # -- materialization ---------------------------------------------------

    def _extend_one_block(self, side: int) -> None:
        block = self._blocks[side]
        exps = _gap_exponent_block(self.env_seed, side, block, self.distribution.ratio_r)
        gaps = np.int64(1) << exps
        base = self._sums[side][-1] if self._sums[side].size else np.int64(0)
        self._sums[side] = np.concatenate([self._sums[side], base + np.cumsum(gaps)])
        self._exps[side] = np.concatenate([self._exps[side], exps])
        self._blocks[side] = block + 1

    def _ensure_sum(self, side: int, limit: int) -> None:
        """Materialize until the last partial sum on `side` reaches `limit`."""
        if limit <= 0:
            return
        while True:
            sums = self._sums[side]
            if sums.size and int(sums[-1]) >= limit:
                return
            with self._lock:
                sums = self._sums[side]
                if not (sums.size and int(sums[-1]) >= limit):
                    self._extend_one_block(side)

    def _ensure_count(self, side: int, count: int) -> None:
        while self._sums[side].size < count:
            with self._lock:
                if self._sums[side].size < count:
                    self._extend_one_block(side)

    def ensure_right_sum(self, limit: int) -> None:
        self._ensure_sum(_SIDE_RIGHT, limit)

    def ensure_left_magnitude(self, limit: int) -> None:
        self._ensure_sum(_SIDE_LEFT, limit)

    # -- views -------------------------------------------------------------

    @property
    def right_sums(self) -> np.ndarray:
        """Materialized prefix of the right partial sums (unshifted)."""
        return self._sums[_SIDE_RIGHT]

    @property
    def left_sums(self) -> np.ndarray:
        """Materialized prefix of the left partial sums, as negative positions."""
        return -self._sums[_SIDE_LEFT]

    @property
    def right_gap_exponents(self) -> np.ndarray:
        return self._exps[_SIDE_RIGHT]

    @property
    def left_gap_exponents(self) -> np.ndarray:
        return self._exps[_SIDE_LEFT]

    def materialized_gap_count(self, side: int = _SIDE_RIGHT) -> int:
        return int(self._sums[side].size)

    def gap_bounds(self, gap_index: int) -> tuple[int, int]:
        """Absolute (left site, right site) of right-side gap `gap_index` (1-based).

        Only materialized gaps may be addressed; extend the layout first.
        """
        if gap_index < 1:
            raise ValueError("gap_index is 1-based")
        sums = self._sums[_SIDE_RIGHT]
        if gap_index > sums.size:
            raise ValueError(f"gap {gap_index} is not materialized (have {sums.size})")
        left = int(sums[gap_index - 2]) if gap_index >= 2 else 0
        right = int(sums[gap_index - 1])
        return left + self.shift_u, right + self.shift_u

    # -- shift -------------------------------------------------------------

    def first_left_gap(self) -> int:
        self._ensure_count(_SIDE_LEFT, 1)
        return int(self._sums[_SIDE_LEFT][0])

    def set_shift(self, shift_u: int) -> None:
        first = self.first_left_gap()
        if not 0 <= shift_u < first:
            raise ValueError(f"shift must lie in [0, {first}), got {shift_u}")
        self.shift_u = int(shift_u)

    # -- classification ----------------------------------------------------

    def is_cookie_site(self, site: int) -> bool:
        x = site - self.shift_u
        if x == 0:
            return True
        side = _SIDE_RIGHT if x > 0 else _SIDE_LEFT
        magnitude = abs(x)
        self._ensure_sum(side, magnitude)
        sums = self._sums[side]
        i = int(np.searchsorted(sums, magnitude))
        return i < sums.size and int(sums[i]) == magnitude

    def cookie_sites_between(self, lo: int, hi: int) -> np.ndarray:
        """Sorted cookie-site positions inside the inclusive window [lo, hi]."""
        if lo > hi:
            raise ValueError("window bounds out of order")
        self._ensure_sum(_SIDE_RIGHT, hi - self.shift_u)
        self._ensure_sum(_SIDE_LEFT, self.shift_u - lo)
        parts = []
        if lo <= self.shift_u <= hi:
            parts.append(np.array([self.shift_u], np.int64))
        right = self._sums[_SIDE_RIGHT] + self.shift_u
        parts.append(right[(right >= lo) & (right <= hi)])
        left = self.shift_u - self._sums[_SIDE_LEFT]
        parts.append(left[(left >= lo) & (left <= hi)])
        return np.sort(np.concatenate(parts))


def cookie_flags(layout: RenewalLayout, lo: int, hi: int) -> np.ndarray:
    """Boolean site-classification array over the inclusive window [lo, hi]."""
    flags = np.zeros(hi - lo + 1, dtype=np.bool_)
    flags[layout.cookie_sites_between(lo, hi) - lo] = True
    return flags


def build_layout(epsilon: float, env_seed: int, draw_shift: bool = False) -> RenewalLayout:
    """Construct a lazily materialized layout for the given seed.

    With draw_shift the translation is uniform on {0, ..., first left gap - 1},
    conditionally on that gap; otherwise the shift is zero.
    """
    layout = RenewalLayout(GapDistribution(epsilon), env_seed)
    if draw_shift:
        first = layout.first_left_gap()
        word = SeedSequence(entropy=(int(env_seed), _SHIFT_STREAM)).generate_state(1, np.uint64)[0]
        # the gap is a power of two, so the modulus introduces no bias
        layout.set_shift(int(word) % first)
    return layout


class CookieEnvironment:
    """Maps (site, visit index) to the probability of jumping right."""

    p: float

    def probability(self, site: int, visit: int) -> float:
        raise NotImplementedError

    def is_cookie_site(self, site: int) -> bool:
        raise NotImplementedError

    def descriptor(self) -> dict:
        """Flat record from which the environment can be rebuilt."""
        raise NotImplementedError


def _check_visit(visit: int) -> None:
    if visit < 1:
        raise ValueError(f"visit numbers are 1-based, got {visit}")


@dataclass(frozen=True)
class HomogeneousEnvironment(CookieEnvironment):
    """Every site starts with M cookies of strength p.

    M = 0 gives the symmetric walk.
    """

    M: int
    p: float

    def __post_init__(self) -> None:
        if self.M < 0:
            raise ValueError(f"cookie count must be non-negative, got {self.M}")
        _check_p(self.p)

    def probability(self, site: int, visit: int) -> float:
        _check_visit(visit)
        return self.p if visit <= self.M else 0.5

    def is_cookie_site(self, site: int) -> bool:
        return self.M >= 1

    def descriptor(self) -> dict:
        return {"variant": "homogeneous", "p": self.p, "M": self.M}


@dataclass(frozen=True, eq=False)
class CounterexampleEnvironment(CookieEnvironment):
    """Cookie sites at the layout's renewal points, symmetric in between."""

    layout: RenewalLayout
    p: float

    def __post_init__(self) -> None:
        _check_p(self.p)

    def probability(self, site: int, visit: int) -> float:
        _check_visit(visit)
        return self.p if self.layout.is_cookie_site(site) else 0.5

    def is_cookie_site(self, site: int) -> bool:
        return self.layout.is_cookie_site(site)

    def descriptor(self) -> dict:
        return {
            "variant": "counterexample",
            "p": self.p,
            "epsilon": self.layout.distribution.epsilon,
            "env_seed": self.layout.env_seed,
            "shift_u": self.layout.shift_u,
        }


def environment_from_descriptor(record: dict) -> CookieEnvironment:
    """Rebuild an environment from its flat descriptor record."""
    variant = record.get("variant")
    if variant == "homogeneous":
        return HomogeneousEnvironment(M=int(record["M"]), p=float(record["p"]))
    if variant == "counterexample":
        layout = build_layout(float(record["epsilon"]), int(record["env_seed"]))
        shift = int(record.get("shift_u", 0))
        if shift:
            layout.set_shift(shift)
        return CounterexampleEnvironment(layout=layout, p=float(record["p"]))
    raise ValueError(f"unknown environment variant {variant!r}")


def probability_at(env: CookieEnvironment, site: int, visit: int) -> float:
    """Right-jump probability at `site` on the visit with 1-based index `visit`."""
    return env.probability(site, visit)


def window_dump(env: CookieEnvironment, lo: int, hi: int) -> list[tuple[int, bool]]:
    """One (site, is_cookie_site) record per site of the inclusive window."""
    if lo > hi:
        raise ValueError("window bounds out of order")
    if isinstance(env, CounterexampleEnvironment):
        flags = cookie_flags(env.layout, lo, hi)
        return [(lo + i, bool(flags[i])) for i in range(hi - lo + 1)]
    return [(site, env.is_cookie_site(site)) for site in range(lo, hi + 1)]
