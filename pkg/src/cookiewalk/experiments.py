"""Statistical experiments built on the simulators and checked against oracles.

Reproducibility scheme: every experiment takes one master seed and derives
per-purpose, per-replica Philox streams through SeedSequence entropy tuples
(master_seed, purpose, replica, ...).  Purposes never collide, replicas never
collide, and results are independent of the thread count because replicas own
their streams and are collected in submission order.
"""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from . import kernels
from .gapenv import (
    CounterexampleEnvironment,
    GapDistribution,
    RenewalLayout,
    _exponents_from_uniforms,
    build_layout,
    cookie_flags,
    environment_from_descriptor,
)
from .oracle import derived_constants
from .walker import _CHUNK, _PAD, CoupledRunRecord, coupled_run, crossing_time

_STREAM_ENV = 1
_STREAM_WALK = 2
_STREAM_CROSSING = 3
_STREAM_COUPLING = 4
_STREAM_GAPS = 5

_DEFAULT_EPSILON = 0.75


# -- seed derivation ---------------------------------------------------------


def derived_env_seeds(master_seed: int, count: int) -> np.ndarray:
    """Environment seeds for `count` replicas, derived from the master seed."""
    rng = Generator(Philox(SeedSequence(entropy=(int(master_seed), _STREAM_ENV))))
    return rng.integers(0, 2**63, size=count, dtype=np.int64)


def derived_walk_seeds(master_seed: int, count: int) -> np.ndarray:
    """Walk seeds for `count` replicas, derived from the master seed."""
    rng = Generator(Philox(SeedSequence(entropy=(int(master_seed), _STREAM_WALK))))
    return rng.integers(0, 2**63, size=count, dtype=np.int64)


def _walk_stream(master_seed: int, replica: int) -> Generator:
    return Generator(Philox(SeedSequence(entropy=(int(master_seed), _STREAM_WALK, replica))))


def _crossing_streams(master_seed: int, replica: int) -> tuple[Generator, Generator]:
    env = Generator(Philox(SeedSequence(entropy=(int(master_seed), _STREAM_CROSSING, replica, 0))))
    walk = Generator(Philox(SeedSequence(entropy=(int(master_seed), _STREAM_CROSSING, replica, 1))))
    return env, walk


def _coupling_stream(master_seed: int, replica: int) -> Generator:
    return Generator(Philox(SeedSequence(entropy=(int(master_seed), _STREAM_COUPLING, replica))))


def gap_sample_stream(master_seed: int) -> Generator:
    """Stream reserved for direct gap-law sampling (histograms, demos)."""
    return Generator(Philox(SeedSequence(entropy=(int(master_seed), _STREAM_GAPS))))


def _map_replicas(fn: Callable[[int], object], count: int, threads: Optional[int]) -> list:
    """Run fn(0..count-1), in order, optionally on a thread pool.

    Replicas derive their own streams from their index, so the schedule
    cannot influence any result; pool.map preserves ordering.
    """
    if threads is None or threads <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


# -- interval estimates ------------------------------------------------------


def wilson_interval(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    The bounds are widened to the empirical proportion where float rounding
    would otherwise leave it outside by one ulp (visible at successes = 0 or
    successes = trials).
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes must lie in [0, {trials}], got {successes}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must lie in (0, 1), got {level}")
    z = statistics.NormalDist().inv_cdf(0.5 + level / 2.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials)) / denom
    low = max(0.0, center - half)
    high = min(1.0, center + half)
    return min(low, phat), max(high, phat)


@dataclass(frozen=True)
class EstimateCI:
    """Point estimate with a standard error and a 95% interval.

    For binomial data the interval is the Wilson score interval; for sample
    means it is the normal interval, stored in the same slots.
    """

    point: float
    replicas: int
    std_error: float
    wilson_low: float
    wilson_high: float

    @classmethod
    def from_binomial(cls, successes: int, trials: int, level: float = 0.95) -> "EstimateCI":
        low, high = wilson_interval(successes, trials, level)
        phat = successes / trials
        return cls(
            point=phat,
            replicas=trials,
            std_error=math.sqrt(phat * (1.0 - phat) / trials),
            wilson_low=low,
            wilson_high=high,
        )

    @classmethod
    def from_samples(cls, values: Sequence[float], level: float = 0.95) -> "EstimateCI":
        n = len(values)
        if n < 1:
            raise ValueError("at least one sample is required")
        arr = np.asarray(values, dtype=np.float64)
        point = float(arr.mean())
        se = float(arr.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        z = statistics.NormalDist().inv_cdf(0.5 + level / 2.0)
        return cls(
            point=point,
            replicas=n,
            std_error=se,
            wilson_low=point - z * se,
            wilson_high=point + z * se,
        )


# -- conditioned gap crossings (annealed) -------------------------------------


class _LeftField:
    """Cookie positions left of a gap being crossed, drawn lazily per replica.

    Relative coordinates: the crossed gap's left cookie site is 0, and
    further cookie sites sit at the negated partial sums of fresh gaps from
    this replica's environment stream.
    """

    def __init__(self, ratio_r: float, env_stream: Generator):
        self._ratio = ratio_r
        self._rng = env_stream
        self._sums = np.zeros(0, np.int64)

    def _ensure(self, magnitude: int) -> None:
        while not (self._sums.size and int(self._sums[-1]) >= magnitude):
            exps = _exponents_from_uniforms(1.0 - self._rng.random(64), self._ratio)
            base = self._sums[-1] if self._sums.size else np.int64(0)
            self._sums = np.concatenate([self._sums, base + np.cumsum(np.int64(1) << exps)])

    def flags(self, lo: int, hi: int, target: int) -> np.ndarray:
        out = np.zeros(hi - lo + 1, dtype=np.bool_)
        for site in (0, target):
            if lo <= site <= hi:
                out[site - lo] = True
        if lo < 0:
            self._ensure(-lo)
            left = -self._sums
            sel = left[(left >= lo) & (left <= hi)]
            out[sel - lo] = True
        return out


def _conditioned_crossing(
    n: int,
    p: float,
    ratio_r: float,
    env_stream: Generator,
    walk_stream: Generator,
    step_cap: int,
) -> Optional[int]:
    """Crossing time of a gap conditioned to size exactly 2**n, or None if capped.

    The walk starts one site right of the gap's left cookie site and runs
    until it reaches the right cookie site at 2**n; every site strictly
    inside the gap is symmetric and the half-line left of the gap carries a
    fresh renewal field.
    """
    target = 1 << n
    field = _LeftField(ratio_r, env_stream)
    lo = -_PAD
    pad = _PAD
    flags = field.flags(lo, target, target)
    uniforms = walk_stream.random(_CHUNK)
    pos, time, used = 1, 0, 0
    while True:
        pos, time, used, code = kernels.classified_run(
            pos, time, target, lo, target, flags, p, uniforms, used, step_cap
        )
        if code == kernels.HIT_TARGET:
            return time
        if code == kernels.HIT_STEP_CAP:
            return None
        if code == kernels.NEED_UNIFORMS:
            uniforms = walk_stream.random(_CHUNK)
            used = 0
        elif code == kernels.HIT_LEFT_EDGE:
            pad *= 2
            lo -= pad
            flags = field.flags(lo, target, target)


@dataclass(frozen=True)
class CrossingTailReport:
    """Monte Carlo summary of P(crossing time of a size-2**n gap > 4**n)."""

    n: int
    p: float
    threshold: int
    step_cap: int
    replicas: int
    slow: int
    censored: int
    estimate: EstimateCI


def crossing_tail_report(
    n: int,
    p: float,
    replicas: int,
    seed: int,
    step_cap: Optional[int] = None,
    threads: Optional[int] = None,
    epsilon: float = _DEFAULT_EPSILON,
) -> CrossingTailReport:
    """Annealed estimate of the slow-crossing probability for exponent n.

    Each replica draws a fresh environment conditioned on the crossed gap
    having size exactly 2**n.  A run stopped by the step cap is counted as
    slow, which is sound because the cap exceeds the slowness threshold 4**n;
    with that convention, raising the cap can only move runs out of the
    censored bucket, never out of the slow count.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if replicas < 100:
        raise ValueError(f"at least 100 replicas are required, got {replicas}")
    threshold = 4**n
    cap = 100 * threshold if step_cap is None else step_cap
    if cap <= threshold:
        raise ValueError(f"step_cap must exceed the threshold {threshold}, got {cap}")
    ratio_r = GapDistribution(epsilon).ratio_r

    def one(i: int) -> Optional[int]:
        env_stream, walk_stream = _crossing_streams(seed, i)
        return _conditioned_crossing(n, p, ratio_r, env_stream, walk_stream, cap)

    times = _map_replicas(one, replicas, threads)
    slow = sum(1 for t in times if t is None or t > threshold)
    censored = sum(1 for t in times if t is None)
    return CrossingTailReport(
        n=n,
        p=p,
        threshold=threshold,
        step_cap=cap,
        replicas=replicas,
        slow=slow,
        censored=censored,
        estimate=EstimateCI.from_binomial(slow, replicas),
    )


def estimate_crossing_tail(n: int, p: float, replicas: int, seed: int) -> EstimateCI:
    """Wilson-interval estimate of the annealed slow-crossing probability."""
    return crossing_tail_report(n, p, replicas, seed).estimate


# -- renewal counting ----------------------------------------------------------


@dataclass(frozen=True)
class RenewalCounts:
    """Exact gap counts of one layout up to a horizon.

    total is the number of right-half-line gaps whose right boundary lies
    strictly below the horizon, and by_exponent splits that count by gap
    size; the split always partitions the total.
    """

    horizon: int
    total: int
    by_exponent: dict[int, int]


def renewal_counts(layout: RenewalLayout, horizon: int) -> RenewalCounts:
    """Count materializable gaps with partial sum below `horizon`, by exponent.

    Counting is exact and simulation-free; it reads the layout's unshifted
    right partial sums.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    layout.ensure_right_sum(horizon)
    sums = layout.right_sums
    mask = sums < horizon
    exps = layout.right_gap_exponents[mask]
    values, counts = np.unique(exps, return_counts=True)
    return RenewalCounts(
        horizon=horizon,
        total=int(mask.sum()),
        by_exponent={int(v): int(c) for v, c in zip(values, counts)},
    )


# -- quenched divergence profile ----------------------------------------------


@dataclass(frozen=True)
class SpeedProfile:
    """Trajectory summaries: position checkpoints and first-passage ratios.

    checkpoints holds (step, position, position/step) triples ordered by
    step; first_passage_profile holds (K, T_K, T_K/K) with None entries for
    levels the run never reached before its cap.
    """

    checkpoints: tuple[tuple[int, int, float], ...]
    first_passage_profile: tuple[tuple[int, Optional[int], Optional[float]], ...]

    def max_ratio(self, k_limit: Optional[int] = None) -> float:
        """Largest T_K/K over reached levels K <= k_limit."""
        best = 0.0
        for k, t, ratio in self.first_passage_profile:
            if k_limit is not None and k > k_limit:
                break
            if ratio is not None and ratio > best:
                best = ratio
        return best

    def running_max(self) -> list[tuple[int, float]]:
        """(K, max over levels <= K of T/K) along the reached prefix."""
        out = []
        best = 0.0
        for k, t, ratio in self.first_passage_profile:
            if ratio is None:
                break
            best = max(best, ratio)
            out.append((k, best))
        return out


def tk_over_k_profile(
    env_seed: int,
    walk_seed: int,
    k_max: int,
    step_cap: Optional[int] = None,
    epsilon: float = _DEFAULT_EPSILON,
    p: float = 0.75,
) -> SpeedProfile:
    """First-passage times T_K for K = 1..k_max of one quenched run.

    One walk starts at the origin of a fresh unshifted counterexample layout
    and runs until it has visited k_max or spent step_cap steps (default
    2000 * k_max); levels not reached by then are censored.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be at least 1, got {k_max}")
    cap = 2000 * k_max if step_cap is None else step_cap
    if cap < k_max:
        raise ValueError(f"step_cap must be at least k_max={k_max}, got {cap}")
    layout = build_layout(epsilon, env_seed)
    rng = Generator(Philox(SeedSequence(int(walk_seed))))
    hit = np.full(k_max, -1, dtype=np.int64)
    lo = -_PAD
    hi = k_max + _PAD
    pad = _PAD
    flags = cookie_flags(layout, lo, hi)
    uniforms = rng.random(_CHUNK)
    pos, time, used, next_target = 0, 0, 0, 1
    while True:
        pos, time, used, next_target, code = kernels.progressive_run(
            pos, time, next_target, lo, flags, p, uniforms, used, cap, hit
        )
        if code in (kernels.HIT_TARGET, kernels.HIT_STEP_CAP):
            break
        if code == kernels.NEED_UNIFORMS:
            uniforms = rng.random(_CHUNK)
            used = 0
        elif code == kernels.HIT_LEFT_EDGE:
            pad *= 2
            lo -= pad
            flags = cookie_flags(layout, lo, hi)
        elif code == kernels.HIT_RIGHT_EDGE:
            pad *= 2
            hi += pad
            flags = cookie_flags(layout, lo, hi)
    profile = []
    for k in range(1, k_max + 1):
        t = int(hit[k - 1])
        if t < 0:
            profile.append((k, None, None))
        else:
            profile.append((k, t, t / k))
    checkpoints = []
    k = 1
    while k <= k_max:
        t = int(hit[k - 1])
        if t > 0:
            checkpoints.append((t, k, k / t))
        k *= 2
    t_last = int(hit[k_max - 1])
    if k_max > 1 and (k_max & (k_max - 1)) != 0 and t_last > 0:
        checkpoints.append((t_last, k_max, k_max / t_last))
    return SpeedProfile(
        checkpoints=tuple(checkpoints),
        first_passage_profile=tuple(profile),
    )


# -- homogeneous and annealed speed ---------------------------------------------


def _grow_left(arr: np.ndarray, by: int) -> np.ndarray:
    grown = np.zeros(arr.size + by, dtype=arr.dtype)
    grown[by:] = arr
    return grown


def _grow_right(arr: np.ndarray, by: int) -> np.ndarray:
    grown = np.zeros(arr.size + by, dtype=arr.dtype)
    grown[: arr.size] = arr
    return grown


def _homogeneous_positions(
    m_cookies: int, p: float, checkpoints: Sequence[int], rng: Generator
) -> list[int]:
    """Positions of one homogeneous walk from 0 at each checkpoint step."""
    visits = np.zeros(2 * _PAD + 1, dtype=np.int64)
    origin = _PAD
    visits[origin] = 1
    pad = _PAD
    uniforms = rng.random(_CHUNK)
    pos, time, used = 0, 0, 0
    out = []
    for cap in checkpoints:
        while True:
            pos, time, used, code = kernels.homogeneous_run(
                pos, time, m_cookies, p, uniforms, used, cap, visits, origin, 0, False
            )
            if code == kernels.HIT_STEP_CAP:
                break
            if code == kernels.NEED_UNIFORMS:
                uniforms = rng.random(_CHUNK)
                used = 0
            elif code == kernels.HIT_LEFT_EDGE:
                pad *= 2
                visits = _grow_left(visits, pad)
                origin += pad
            elif code == kernels.HIT_RIGHT_EDGE:
                pad *= 2
                visits = _grow_right(visits, pad)
        out.append(pos)
    return out


def _classified_positions(
    layout: RenewalLayout, p: float, checkpoints: Sequence[int], rng: Generator
) -> list[int]:
    """Positions of one counterexample walk from 0 at each checkpoint step."""
    unreachable = checkpoints[-1] + 1
    lo, hi = -_PAD, _PAD
    pad = _PAD
    flags = cookie_flags(layout, lo, hi)
    uniforms = rng.random(_CHUNK)
    pos, time, used = 0, 0, 0
    out = []
    for cap in checkpoints:
        while True:
            pos, time, used, code = kernels.classified_run(
                pos, time, unreachable, lo, hi, flags, p, uniforms, used, cap
            )
            if code == kernels.HIT_STEP_CAP:
                break
            if code == kernels.NEED_UNIFORMS:
                uniforms = rng.random(_CHUNK)
                used = 0
            elif code == kernels.HIT_LEFT_EDGE:
                pad *= 2
                lo -= pad
                flags = cookie_flags(layout, lo, hi)
            elif code == kernels.HIT_RIGHT_EDGE:
                pad *= 2
                hi += pad
                flags = cookie_flags(layout, lo, hi)
        out.append(pos)
    return out


def speed_samples(
    descriptor: dict,
    checkpoints: Sequence[int],
    replicas: int,
    seed: int,
    threads: Optional[int] = None,
) -> np.ndarray:
    """Matrix of Y_step/step ratios, one row per replica, one column per checkpoint.

    Homogeneous descriptors share the stateless environment across replicas.
    Counterexample descriptors with an env_seed reuse that single layout
    (quenched); without one, each replica draws its own from the master seed
    (annealed).
    """
    if replicas < 1:
        raise ValueError(f"at least one replica is required, got {replicas}")
    caps = [int(c) for c in checkpoints]
    if not caps or any(c < 1 for c in caps) or sorted(caps) != caps:
        raise ValueError("checkpoints must be a non-empty ascending list of positive steps")
    variant = descriptor.get("variant")
    if variant == "homogeneous":
        env = environment_from_descriptor(descriptor)

        def positions(i: int) -> list[int]:
            return _homogeneous_positions(env.M, env.p, caps, _walk_stream(seed, i))

    elif variant == "counterexample":
        p = float(descriptor["p"])
        epsilon = float(descriptor.get("epsilon", _DEFAULT_EPSILON))
        if "env_seed" in descriptor and descriptor["env_seed"] is not None:
            shared = environment_from_descriptor(descriptor).layout

            def positions(i: int) -> list[int]:
                return _classified_positions(shared, p, caps, _walk_stream(seed, i))

        else:
            env_seeds = derived_env_seeds(seed, replicas)

            def positions(i: int) -> list[int]:
                layout = build_layout(epsilon, int(env_seeds[i]))
                return _classified_positions(layout, p, caps, _walk_stream(seed, i))

    else:
        raise ValueError(f"unknown environment variant {variant!r}")

    rows = _map_replicas(positions, replicas, threads)
    ratios = np.array(rows, dtype=np.float64) / np.array(caps, dtype=np.float64)
    return ratios


def speed_estimate(
    descriptor: dict,
    steps: int,
    checkpoints: Sequence[int],
    replicas: int,
    seed: int,
    threads: Optional[int] = None,
) -> list[EstimateCI]:
    """Mean Y_n/n across replicas at each checkpoint, with normal CIs."""
    caps = sorted(int(c) for c in checkpoints)
    if caps and steps < caps[-1]:
        raise ValueError(f"steps={steps} is below the last checkpoint {caps[-1]}")
    ratios = speed_samples(descriptor, caps, replicas, seed, threads)
    return [EstimateCI.from_samples(ratios[:, j]) for j in range(len(caps))]


# -- binomial floor -------------------------------------------------------------


@dataclass(frozen=True)
class BinomialFloorReport:
    """Empirical slow-crossing counts versus their binomial lower-bound model.

    first_parameter is half the guaranteed number of size-2**n gaps below the
    horizon, required_count the slow-crossing count demanded of them, and the
    check is that the empirical tail probability is no more than 3 standard
    errors below the Bin(first_parameter, beta) tail.
    """

    n: int
    horizon: int
    replicas: int
    c: float
    beta: float
    first_parameter: int
    required_count: int
    empirical_tail: float
    binomial_tail: float
    std_error: float

    @property
    def passes(self) -> bool:
        return self.empirical_tail >= self.binomial_tail - 3.0 * self.std_error


def _binomial_upper_tail(trials: int, prob: float, required: int) -> float:
    """P(Bin(trials, prob) >= required), by exact summation."""
    if required <= 0:
        return 1.0
    if required > trials:
        return 0.0
    total = 0.0
    for k in range(required, trials + 1):
        total += math.comb(trials, k) * prob**k * (1.0 - prob) ** (trials - k)
    return min(1.0, total)


def binomial_floor_check(
    n: int,
    K: int,
    replicas: int,
    c: float = 0.04,
    beta: Optional[float] = None,
    p: float = 0.75,
    epsilon: float = _DEFAULT_EPSILON,
    seed: int = 1,
    step_cap: Optional[int] = None,
    threads: Optional[int] = None,
) -> BinomialFloorReport:
    """Compare slow-crossing counts below a horizon against a binomial floor.

    Each replica builds a fresh environment, finds every size-2**n gap whose
    right partial sum is below K, and crosses each one once; the replica
    scores a success when at least ceil(c * K / 4**(epsilon*n)) of those
    crossings are slow.  The success frequency must not fall more than 3
    standard errors below the tail of Bin(first_parameter, beta), where
    first_parameter = ceil(alpha * K * 4**(-epsilon*n) / 2) understates the
    available gaps and beta understates the per-gap slow probability.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if K < 1:
        raise ValueError(f"K must be at least 1, got {K}")
    if replicas < 1:
        raise ValueError(f"at least one replica is required, got {replicas}")
    if c < 0.0:
        raise ValueError(f"c must be non-negative, got {c}")
    constants = derived_constants(epsilon)
    if beta is None:
        beta = constants.beta_floor
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    density = 4.0 ** (-epsilon * n)
    first_parameter = math.ceil(constants.alpha * K * density / 2.0)
    if first_parameter < 1:
        raise ValueError(
            f"n={n}, K={K} give a degenerate binomial (first parameter 0); increase K"
        )
    required = math.ceil(c * K * density)
    threshold = 4**n
    cap = 100 * threshold if step_cap is None else step_cap
    env_seeds = derived_env_seeds(seed, replicas)

    def one(i: int) -> bool:
        layout = build_layout(epsilon, int(env_seeds[i]))
        env = CounterexampleEnvironment(layout=layout, p=p)
        layout.ensure_right_sum(K)
        sums = layout.right_sums
        qualifying = np.nonzero((layout.right_gap_exponents == n) & (sums < K))[0]
        walk = _walk_stream(seed, i)
        slow = 0
        for idx in qualifying:
            record = crossing_time(env, layout, int(idx) + 1, cap, walk)
            if record.hitting_time is None or record.hitting_time > threshold:
                slow += 1
        return slow >= required

    outcomes = _map_replicas(one, replicas, threads)
    successes = sum(outcomes)
    empirical = successes / replicas
    return BinomialFloorReport(
        n=n,
        horizon=K,
        replicas=replicas,
        c=c,
        beta=beta,
        first_parameter=first_parameter,
        required_count=required,
        empirical_tail=empirical,
        binomial_tail=_binomial_upper_tail(first_parameter, beta, required),
        std_error=math.sqrt(empirical * (1.0 - empirical) / replicas),
    )


# -- coupled crossings -----------------------------------------------------------


def coupled_crossing_records(
    p: float,
    n: int,
    replicas: int,
    seed: int,
    step_cap: Optional[int] = None,
    threads: Optional[int] = None,
) -> list[CoupledRunRecord]:
    """Replicated coupled runs of the reflected and single-cookie-site walks."""
    if replicas < 1:
        raise ValueError(f"at least one replica is required, got {replicas}")
    cap = 400 * 4**n if step_cap is None else step_cap

    def one(i: int) -> CoupledRunRecord:
        return coupled_run(p, n, cap, _coupling_stream(seed, i))

    return _map_replicas(one, replicas, threads)
