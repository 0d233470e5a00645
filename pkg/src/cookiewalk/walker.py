"""Walk-level simulation: single steps, first passages, crossings, coupling.

Two layers coexist.  WalkState plus step() is a direct, dict-backed
implementation of the walk that consumes one uniform per step; it is the
reference semantics and is what the compiled kernels are tested against.
The first-passage drivers dispatch to those kernels for the two concrete
environment families and fall back to step() for anything else, growing
windows and refilling uniform buffers as the kernels request, so buffer and
window sizes never influence the sampled path.

The coupling between the reflected symmetric walk and the single-cookie-site
walk is kept in plain Python on purpose; its step logic is the delicate part
and stays readable here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from . import kernels
from .gapenv import (
    CookieEnvironment,
    CounterexampleEnvironment,
    HomogeneousEnvironment,
    RenewalLayout,
    cookie_flags,
)

_CHUNK = 1 << 15
_PAD = 256

#: Sentinel hitting time of a run stopped by its step cap.
CENSORED = None

RngLike = Union[Generator, SeedSequence, int, None]


def _as_generator(rng_stream: RngLike) -> Generator:
    """Coerce a seed, SeedSequence, or Generator into a Philox generator."""
    if isinstance(rng_stream, Generator):
        return rng_stream
    if isinstance(rng_stream, SeedSequence):
        return Generator(Philox(rng_stream))
    if rng_stream is None:
        return Generator(Philox(SeedSequence()))
    return Generator(Philox(SeedSequence(int(rng_stream))))


@dataclass
class WalkState:
    """Mutable state of one walk: position, clock, and per-site visit counts.

    visit_counts[x] is the number of arrivals at x so far, including the
    arrival the walk is currently sitting on, so the counts always sum to
    time + 1.
    """

    position: int
    time: int
    visit_counts: dict[int, int]
    rng_stream: Generator

    @classmethod
    def fresh(cls, start: int, rng_stream: RngLike = None) -> "WalkState":
        return cls(
            position=start,
            time=0,
            visit_counts={start: 1},
            rng_stream=_as_generator(rng_stream),
        )


def step(state: WalkState, env: CookieEnvironment) -> int:
    """Advance the walk one step, consuming exactly one uniform.

    The jump-right probability is env.probability(x, k) where k is the
    1-based index of the current visit to x.  Returns the new position.
    """
    x = state.position
    thresh = env.probability(x, state.visit_counts[x])
    if state.rng_stream.random() < thresh:
        x += 1
    else:
        x -= 1
    state.position = x
    state.time += 1
    state.visit_counts[x] = state.visit_counts.get(x, 0) + 1
    return x


def run_walk(
    state: WalkState,
    env: CookieEnvironment,
    steps: int,
    record_every: int = 0,
) -> list[tuple[int, int]]:
    """Run `steps` steps, optionally recording (time, position) checkpoints.

    With record_every > 0 the trajectory is sampled at every multiple of
    record_every (including the entry state) and at the final step.
    """
    if steps < 0:
        raise ValueError(f"steps must be non-negative, got {steps}")
    records: list[tuple[int, int]] = []
    if record_every > 0:
        records.append((state.time, state.position))
    for _ in range(steps):
        step(state, env)
        if record_every > 0 and state.time % record_every == 0:
            records.append((state.time, state.position))
    if record_every > 0 and records[-1][0] != state.time:
        records.append((state.time, state.position))
    return records


@dataclass(frozen=True)
class FirstPassageRecord:
    """Outcome of a first-passage run; hitting_time is CENSORED (None) when
    the step cap fired before the target was reached."""

    target: int
    hitting_time: Optional[int]
    step_cap: int

    @property
    def censored(self) -> bool:
        return self.hitting_time is None


def _refill(rng: Generator) -> np.ndarray:
    return rng.random(_CHUNK)


def _classified_first_passage(
    layout: RenewalLayout,
    p: float,
    start: int,
    target: int,
    step_cap: int,
    rng: Generator,
) -> Optional[int]:
    """Kernel driver for environments where bias is a function of the site."""
    lo = min(start, target) - _PAD
    hi = max(start, target) + _PAD
    flags = cookie_flags(layout, lo, hi)
    pad = _PAD
    uniforms = _refill(rng)
    pos, time, used = start, 0, 0
    while True:
        pos, time, used, code = kernels.classified_run(
            pos, time, target, lo, hi, flags, p, uniforms, used, step_cap
        )
        if code == kernels.HIT_TARGET:
            return time
        if code == kernels.HIT_STEP_CAP:
            return None
        if code == kernels.NEED_UNIFORMS:
            uniforms = _refill(rng)
            used = 0
        elif code == kernels.HIT_LEFT_EDGE:
            pad *= 2
            lo -= pad
            flags = cookie_flags(layout, lo, hi)
        elif code == kernels.HIT_RIGHT_EDGE:
            pad *= 2
            hi += pad
            flags = cookie_flags(layout, lo, hi)


def _homogeneous_first_passage(
    env: HomogeneousEnvironment,
    start: int,
    target: int,
    step_cap: int,
    rng: Generator,
) -> Optional[int]:
    """Kernel driver tracking per-site visit counts in a growable array."""
    lo = min(start, target) - _PAD
    hi = max(start, target) + _PAD
    origin = -lo
    visits = np.zeros(hi - lo + 1, dtype=np.int64)
    visits[origin + start] = 1
    pad = _PAD
    uniforms = _refill(rng)
    pos, time, used = start, 0, 0
    while True:
        pos, time, used, code = kernels.homogeneous_run(
            pos, time, env.M, env.p, uniforms, used, step_cap, visits, origin, target, True
        )
        if code == kernels.HIT_TARGET:
            return time
        if code == kernels.HIT_STEP_CAP:
            return None
        if code == kernels.NEED_UNIFORMS:
            uniforms = _refill(rng)
            used = 0
        elif code == kernels.HIT_LEFT_EDGE:
            pad *= 2
            grown = np.zeros(visits.size + pad, dtype=np.int64)
            grown[pad:] = visits
            visits = grown
            origin += pad
        elif code == kernels.HIT_RIGHT_EDGE:
            pad *= 2
            grown = np.zeros(visits.size + pad, dtype=np.int64)
            grown[: visits.size] = visits
            visits = grown


def _generic_first_passage(
    env: CookieEnvironment,
    start: int,
    target: int,
    step_cap: int,
    rng: Generator,
) -> Optional[int]:
    state = WalkState.fresh(start, rng)
    while state.position != target:
        if state.time >= step_cap:
            return None
        step(state, env)
    return state.time


def first_passage(
    start: int,
    env: CookieEnvironment,
    target: int,
    step_cap: int,
    rng_stream: RngLike = None,
) -> FirstPassageRecord:
    """First hitting time of `target` from `start`, censored at `step_cap`.

    The cap must admit the straight-line path, so step_cap >= |target - start|.
    A run that hits the target at exactly the cap counts as a hit; CENSORED
    means the hitting time strictly exceeds the cap.
    """
    distance = abs(target - start)
    if step_cap < distance:
        raise ValueError(
            f"step_cap={step_cap} cannot reach target at distance {distance}"
        )
    rng = _as_generator(rng_stream)
    if isinstance(env, CounterexampleEnvironment):
        t = _classified_first_passage(env.layout, env.p, start, target, step_cap, rng)
    elif isinstance(env, HomogeneousEnvironment):
        t = _homogeneous_first_passage(env, start, target, step_cap, rng)
    else:
        t = _generic_first_passage(env, start, target, step_cap, rng)
    return FirstPassageRecord(target=target, hitting_time=t, step_cap=step_cap)


def crossing_time(
    env: CookieEnvironment,
    layout: RenewalLayout,
    gap_index: int,
    step_cap: int,
    rng_stream: RngLike = None,
) -> FirstPassageRecord:
    """Time to cross the gap with 1-based index `gap_index` on the right half-line.

    The walk starts one site right of the gap's left cookie site and runs in
    the full environment until it first reaches the right cookie site, so it
    may wander left out of the gap along the way.  Addressing a gap that is
    not materialized yet raises ValueError.
    """
    if not isinstance(env, CounterexampleEnvironment) or env.layout is not layout:
        raise ValueError("env must be the counterexample environment built on layout")
    left, right = layout.gap_bounds(gap_index)
    start = left + 1
    return first_passage(start, env, right, step_cap, rng_stream)


# -- coupling ----------------------------------------------------------------


@dataclass
class CoupledState:
    """Joint state of the reflected walk and the single-cookie-site walk.

    Positions are relative to interval_origin, the cookie site at the left
    end of the interval being crossed.  While `split` is False the walks sit
    on the same site and move off shared uniforms; after a split each moves
    on its own uniforms until the positions coincide again.
    """

    erw_position: int
    reflected_position: int
    interval_origin: int = 0
    split: bool = False
    time: int = 0
    ever_split: bool = False


def _erw_move(position: int, p: float, u: float) -> int:
    thresh = p if position == 0 else 0.5
    return position + 1 if u < thresh else position - 1


def coupled_step(state: CoupledState, p: float, rng_stream: Generator) -> None:
    """Advance both walks one step under the monotone coupling.

    Coupled at the origin, the shared uniform sends the reflected walk right
    unconditionally and the cookie walk right exactly when u < p, so the pair
    splits with probability 1 - p.  Coupled elsewhere they move together.
    Split, each walk moves on its own uniform (the reflected walk's forced
    step off 0 consumes none) and they re-couple on meeting.
    """
    x = state.reflected_position
    y = state.erw_position
    if not state.split:
        u = rng_stream.random()
        if x == 0:
            x = 1
            y = _erw_move(y, p, u)
            if y != x:
                state.split = True
                state.ever_split = True
        else:
            d = 1 if u < 0.5 else -1
            x += d
            y += d
    else:
        if x == 0:
            x = 1
        else:
            x += 1 if rng_stream.random() < 0.5 else -1
        y = _erw_move(y, p, rng_stream.random())
        if x == y:
            state.split = False
    state.reflected_position = x
    state.erw_position = y
    state.time += 1


@dataclass(frozen=True)
class CoupledRunRecord:
    """Crossing times of both walks of one coupled run to level 2**n."""

    n: int
    reflected_time: Optional[int]
    erw_time: Optional[int]
    ever_split: bool
    total_steps: int
    domination_violations: int


def coupled_run(
    p: float,
    n: int,
    step_cap: int,
    rng_stream: RngLike = None,
) -> CoupledRunRecord:
    """Run the coupling from relative position 1 until both walks reach 2**n.

    Requires n >= 2 and 0.5 < p <= 1; p = 1 is the degenerate case where the
    pair never splits and both times coincide.  Once one walk is absorbed at
    the level the other continues alone on its own uniforms.  Every step of
    the joint phase checks the domination (cookie walk never above the
    reflected walk); violations are counted, not raised, so the invariant can
    be asserted by callers.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if not 0.5 < p <= 1.0:
        raise ValueError(f"p must lie in (0.5, 1], got {p}")
    if step_cap < 1:
        raise ValueError(f"step_cap must be positive, got {step_cap}")
    rng = _as_generator(rng_stream)
    state = CoupledState(erw_position=1, reflected_position=1)
    level = 1 << n
    reflected_time: Optional[int] = None
    erw_time: Optional[int] = None
    violations = 0
    while state.time < step_cap and (reflected_time is None or erw_time is None):
        if reflected_time is None and erw_time is None:
            coupled_step(state, p, rng)
            if state.erw_position > state.reflected_position:
                violations += 1
            if state.reflected_position == level:
                reflected_time = state.time
            if state.erw_position == level:
                erw_time = state.time
        elif erw_time is None:
            state.erw_position = _erw_move(state.erw_position, p, rng.random())
            state.time += 1
            if state.erw_position == level:
                erw_time = state.time
        else:
            if state.reflected_position == 0:
                state.reflected_position = 1
            else:
                state.reflected_position += 1 if rng.random() < 0.5 else -1
            state.time += 1
            if state.reflected_position == level:
                reflected_time = state.time
    return CoupledRunRecord(
        n=n,
        reflected_time=reflected_time,
        erw_time=erw_time,
        ever_split=state.ever_split,
        total_steps=state.time,
        domination_violations=violations,
    )
