"""Step semantics, first-passage drivers, crossings, and the coupling."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.random import Generator, Philox, SeedSequence

from cookiewalk.gapenv import (
    CookieEnvironment,
    CounterexampleEnvironment,
    HomogeneousEnvironment,
    build_layout,
)
from cookiewalk.walker import (
    CENSORED,
    CoupledState,
    WalkState,
    _generic_first_passage,
    coupled_run,
    coupled_step,
    crossing_time,
    first_passage,
    run_walk,
    step,
)


def gen(seed):
    return Generator(Philox(SeedSequence(seed)))


class ScriptedEnvironment(CookieEnvironment):
    """Deterministic test double: jump right exactly on even sites."""

    def __init__(self):
        self.calls = []

    def probability(self, site, visit):
        self.calls.append((site, visit))
        return 1.0 if site % 2 == 0 else 0.0


class AlwaysRight(CookieEnvironment):
    def probability(self, site, visit):
        return 1.0


# -- reference semantics -------------------------------------------------------


def test_step_visit_indexing_is_arrival_inclusive():
    env = ScriptedEnvironment()
    state = WalkState.fresh(0, 9)
    for _ in range(10):
        step(state, env)
    # The walk oscillates 0 -> 1 -> 0 -> ..., so the visit index passed to
    # the environment counts arrivals at each site including the current one.
    assert state.position == 0
    assert state.visit_counts == {0: 6, 1: 5}
    assert env.calls == [
        (0, 1), (1, 1), (0, 2), (1, 2), (0, 3),
        (1, 3), (0, 4), (1, 4), (0, 5), (1, 5),
    ]


@settings(max_examples=40, deadline=None)
@given(
    m=st.integers(0, 5),
    steps=st.integers(0, 300),
    seed=st.integers(0, 2**32 - 1),
)
def test_visit_counts_sum_to_time_plus_one(m, steps, seed):
    env = HomogeneousEnvironment(M=m, p=0.75)
    state = WalkState.fresh(0, seed)
    run_walk(state, env, steps)
    assert state.time == steps
    assert sum(state.visit_counts.values()) == steps + 1
    assert state.visit_counts[state.position] >= 1


def test_run_walk_records():
    env = HomogeneousEnvironment(M=1, p=0.75)
    state = WalkState.fresh(0, 4)
    records = run_walk(state, env, 12, record_every=5)
    assert [t for t, _ in records] == [0, 5, 10, 12]
    assert records[-1][1] == state.position

    state = WalkState.fresh(0, 4)
    records = run_walk(state, env, 10, record_every=5)
    assert [t for t, _ in records] == [0, 5, 10]

    state = WalkState.fresh(0, 4)
    assert run_walk(state, env, 7) == []
    with pytest.raises(ValueError):
        run_walk(state, env, -1)


def test_first_step_frequency_matches_bias():
    env = HomogeneousEnvironment(M=1, p=0.75)
    right = 0
    replicas = 4000
    for i in range(replicas):
        state = WalkState.fresh(0, SeedSequence(entropy=(515, i)))
        right += step(state, env) == 1
    se = (0.75 * 0.25 / replicas) ** 0.5
    assert abs(right / replicas - 0.75) < 3 * se


# -- kernel drivers against the reference --------------------------------------


@pytest.mark.parametrize("seed", [3, 7, 11, 19, 23, 31])
def test_homogeneous_kernel_matches_reference(seed):
    env = HomogeneousEnvironment(M=3, p=0.75)
    cap = 200_000
    fast = first_passage(0, env, 300, cap, SeedSequence(seed))
    slow = _generic_first_passage(env, 0, 300, cap, gen(seed))
    assert fast.hitting_time == slow


@pytest.mark.parametrize("seed", [5, 13, 17, 29])
def test_homogeneous_kernel_matches_reference_left_target(seed):
    env = HomogeneousEnvironment(M=2, p=0.6)
    cap = 100_000
    fast = first_passage(0, env, -40, cap, SeedSequence(seed))
    slow = _generic_first_passage(env, 0, -40, cap, gen(seed))
    assert fast.hitting_time == slow


@pytest.mark.parametrize("seed", [2, 6, 10, 14, 22, 26])
def test_classified_kernel_matches_reference(seed):
    layout = build_layout(0.75, env_seed=41)
    layout.ensure_right_sum(2_000)
    env = CounterexampleEnvironment(layout, 0.75)
    target = layout.gap_bounds(3)[1]
    cap = 200_000
    fast = first_passage(1, env, target, cap, SeedSequence(seed))
    slow = _generic_first_passage(env, 1, target, cap, gen(seed))
    assert fast.hitting_time == slow


@pytest.mark.parametrize("seed", [4, 17, 18])
def test_homogeneous_kernel_window_growth(seed):
    # These seeds dip below -256 on the way to +120 under the symmetric
    # walk, so the driver must regrow its visit array without disturbing
    # the uniform stream.
    env = HomogeneousEnvironment(M=0, p=0.75)
    cap = 300_000
    fast = first_passage(0, env, 120, cap, SeedSequence(seed))
    slow = _generic_first_passage(env, 0, 120, cap, gen(seed))
    assert fast.hitting_time == slow
    assert fast.hitting_time is not None


def test_classified_kernel_window_growth():
    # Seed 4 at p = 0.51 wanders to -334 before crossing, regrowing the
    # cookie-flag window on the left.
    layout = build_layout(0.75, env_seed=41)
    layout.ensure_right_sum(2_000)
    env = CounterexampleEnvironment(layout, 0.51)
    target = layout.gap_bounds(8)[1]
    cap = 300_000
    fast = first_passage(1, env, target, cap, SeedSequence(4))
    slow = _generic_first_passage(env, 1, target, cap, gen(4))
    assert fast.hitting_time == slow
    assert fast.hitting_time is not None


def test_kernel_path_independent_of_step_cap():
    # The same stream must yield the same path whatever the cap, so an
    # uncensored time is identical under a larger cap.
    layout = build_layout(0.75, env_seed=41)
    layout.ensure_right_sum(2_000)
    env = CounterexampleEnvironment(layout, 0.75)
    target = layout.gap_bounds(2)[1]
    for seed in range(8):
        short = first_passage(1, env, target, 30_000, SeedSequence(seed))
        long = first_passage(1, env, target, 400_000, SeedSequence(seed))
        if short.hitting_time is not None:
            assert long.hitting_time == short.hitting_time
        else:
            assert long.hitting_time is None or long.hitting_time > 30_000


def test_first_passage_seed_forms_agree():
    env = HomogeneousEnvironment(M=3, p=0.75)
    a = first_passage(0, env, 50, 100_000, 99)
    b = first_passage(0, env, 50, 100_000, SeedSequence(99))
    c = first_passage(0, env, 50, 100_000, gen(99))
    assert a == b == c


def test_first_passage_trivial_and_errors():
    layout = build_layout(0.75, env_seed=1)
    cex = CounterexampleEnvironment(layout, 0.75)
    hom = HomogeneousEnvironment(M=3, p=0.75)
    for env in (cex, hom, AlwaysRight()):
        assert first_passage(5, env, 5, 10, 0).hitting_time == 0
    with pytest.raises(ValueError):
        first_passage(0, hom, 10, 9, 0)


def test_always_right_is_ballistic():
    rec = first_passage(0, AlwaysRight(), 7, 100, 0)
    assert rec.hitting_time == 7
    assert not rec.censored


def test_hit_at_exact_cap_counts_as_hit():
    rec = first_passage(0, AlwaysRight(), 5, 5, 0)
    assert rec.hitting_time == 5
    assert not rec.censored


def test_censored_record():
    rec = first_passage(0, AlwaysRight(), -5, 5, 0)
    assert rec.hitting_time is CENSORED
    assert rec.censored
    assert rec.step_cap == 5


def test_censoring_frequency_matches_free_walk_dp():
    # Symmetric walk (M = 0) from 0: the probability of reaching +3 within
    # 21 steps is computed exactly by a small occupation-law recursion, and
    # the censoring frequency must agree with its complement.
    cap = 21
    law = {0: 1.0}
    hit = 0.0
    for _ in range(cap):
        nxt = {}
        for x, q in law.items():
            for y in (x - 1, x + 1):
                if y == 3:
                    hit += 0.5 * q
                else:
                    nxt[y] = nxt.get(y, 0.0) + 0.5 * q
        law = nxt
    env = HomogeneousEnvironment(M=0, p=0.75)
    replicas = 4000
    censored = sum(
        first_passage(0, env, 3, cap, SeedSequence(entropy=(808, i))).censored
        for i in range(replicas)
    )
    want = 1.0 - hit
    se = (want * (1.0 - want) / replicas) ** 0.5
    assert abs(censored / replicas - want) < 3 * se


# -- crossings ------------------------------------------------------------------


def test_crossing_time_basics():
    layout = build_layout(0.75, env_seed=7)
    layout.ensure_right_sum(500)
    env = CounterexampleEnvironment(layout, 0.75)
    left, right = layout.gap_bounds(1)
    rec = crossing_time(env, layout, 1, 100_000, 3)
    assert rec.target == right
    assert rec.hitting_time is None or rec.hitting_time >= right - left - 1


def test_crossing_time_layout_mismatch():
    layout = build_layout(0.75, env_seed=7)
    other = build_layout(0.75, env_seed=8)
    env = CounterexampleEnvironment(layout, 0.75)
    with pytest.raises(ValueError):
        crossing_time(env, other, 1, 1000, 0)
    with pytest.raises(ValueError):
        crossing_time(HomogeneousEnvironment(M=1, p=0.75), layout, 1, 1000, 0)


def test_crossing_time_unmaterialized_gap():
    layout = build_layout(0.75, env_seed=7)
    layout.ensure_right_sum(100)
    env = CounterexampleEnvironment(layout, 0.75)
    with pytest.raises(ValueError):
        crossing_time(env, layout, layout.materialized_gap_count() + 1, 1000, 0)


# -- coupling -------------------------------------------------------------------


def test_coupled_step_invariants():
    state = CoupledState(erw_position=1, reflected_position=1)
    rng = gen(272)
    for _ in range(2000):
        coupled_step(state, 0.7, rng)
        x, y = state.reflected_position, state.erw_position
        assert x >= 0
        assert y <= x
        assert (x - y) % 2 == 0
        assert state.split == (x != y)
    assert state.ever_split


def test_coupled_run_degenerate_p_one():
    rec = coupled_run(1.0, 3, 100_000, 55)
    assert rec.reflected_time == rec.erw_time
    assert not rec.ever_split
    assert rec.domination_violations == 0


@pytest.mark.parametrize("seed", range(12))
def test_coupled_run_domination_and_parity(seed):
    rec = coupled_run(0.75, 2, 10_000, seed)
    assert rec.domination_violations == 0
    # Y <= X throughout, so the cookie walk can never be absorbed while the
    # reflected walk is still running.
    assert not (rec.erw_time is not None and rec.reflected_time is None)
    if rec.reflected_time is not None and rec.erw_time is not None:
        assert rec.erw_time >= rec.reflected_time
    for t in (rec.reflected_time, rec.erw_time):
        if t is not None:
            assert t % 2 == 1


def test_coupled_run_deterministic():
    assert coupled_run(0.75, 2, 10_000, 123) == coupled_run(0.75, 2, 10_000, 123)


def test_coupled_run_validation():
    with pytest.raises(ValueError):
        coupled_run(0.75, 1, 100, 0)
    with pytest.raises(ValueError):
        coupled_run(0.5, 2, 100, 0)
    with pytest.raises(ValueError):
        coupled_run(1.1, 2, 100, 0)
    with pytest.raises(ValueError):
        coupled_run(0.75, 2, 0, 0)
