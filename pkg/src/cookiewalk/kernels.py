"""Compiled inner loops for the walk simulators.

Each kernel consumes exactly one caller-supplied uniform per step and returns
a resume code instead of raising, so the drivers in walker.py and
experiments.py can grow windows, refill uniform buffers, or stop, and then
call back in without perturbing the random stream.  Results are therefore
independent of buffer sizes and window placement.
"""

from __future__ import annotations

import numba
import numpy as np

HIT_TARGET = 0
HIT_LEFT_EDGE = 1
NEED_UNIFORMS = 2
HIT_STEP_CAP = 3
HIT_RIGHT_EDGE = 4


@numba.njit(cache=True, nogil=True)
def classified_run(pos, time, target, lo, hi, is_cookie, p, uniforms, used, step_cap):
    """Advance a walk whose bias depends only on site classification.

    is_cookie[site - lo] marks the sites that jump right with probability p;
    all other sites are symmetric.  Stops on reaching `target`, exhausting
    `uniforms` (resume after refilling), touching a window edge (resume after
    regrowing), or reaching `step_cap` total steps.
    """
    n_uniforms = uniforms.shape[0]
    while True:
        if pos == target:
            return pos, time, used, HIT_TARGET
        if time >= step_cap:
            return pos, time, used, HIT_STEP_CAP
        if pos <= lo:
            return pos, time, used, HIT_LEFT_EDGE
        if pos >= hi:
            return pos, time, used, HIT_RIGHT_EDGE
        if used >= n_uniforms:
            return pos, time, used, NEED_UNIFORMS
        thresh = p if is_cookie[pos - lo] else 0.5
        if uniforms[used] < thresh:
            pos += 1
        else:
            pos -= 1
        used += 1
        time += 1


@numba.njit(cache=True, nogil=True)
def progressive_run(pos, time, next_target, lo, is_cookie, p, uniforms, used, step_cap, hit_times):
    """classified_run variant that records first-passage times to 1..len(hit_times).

    hit_times[k - 1] receives the time of the first visit to level k; the run
    finishes (HIT_TARGET) once the last level is reached.  The right window
    edge is len(is_cookie) + lo - 1 as usual.
    """
    n_uniforms = uniforms.shape[0]
    k_max = hit_times.shape[0]
    hi = lo + is_cookie.shape[0] - 1
    while True:
        while next_target <= k_max and pos == next_target:
            hit_times[next_target - 1] = time
            next_target += 1
        if next_target > k_max:
            return pos, time, used, next_target, HIT_TARGET
        if time >= step_cap:
            return pos, time, used, next_target, HIT_STEP_CAP
        if pos <= lo:
            return pos, time, used, next_target, HIT_LEFT_EDGE
        if pos >= hi:
            return pos, time, used, next_target, HIT_RIGHT_EDGE
        if used >= n_uniforms:
            return pos, time, used, next_target, NEED_UNIFORMS
        thresh = p if is_cookie[pos - lo] else 0.5
        if uniforms[used] < thresh:
            pos += 1
        else:
            pos -= 1
        used += 1
        time += 1


@numba.njit(cache=True, nogil=True)
def homogeneous_run(pos, time, m_cookies, p, uniforms, used, step_cap, visits, origin, target, has_target):
    """Advance a walk whose bias depends on the per-site visit count.

    visits[origin + site] counts completed arrivals, capped at m_cookies + 1
    since larger counts are indistinguishable.  The current site's count
    already includes the present arrival, so the threshold uses it directly.
    """
    n_uniforms = uniforms.shape[0]
    size = visits.shape[0]
    while True:
        if has_target and pos == target:
            return pos, time, used, HIT_TARGET
        if time >= step_cap:
            return pos, time, used, HIT_STEP_CAP
        idx = origin + pos
        if idx <= 0:
            return pos, time, used, HIT_LEFT_EDGE
        if idx >= size - 1:
            return pos, time, used, HIT_RIGHT_EDGE
        if used >= n_uniforms:
            return pos, time, used, NEED_UNIFORMS
        thresh = p if visits[idx] <= m_cookies else 0.5
        if uniforms[used] < thresh:
            pos += 1
        else:
            pos -= 1
        used += 1
        time += 1
        idx = origin + pos
        if visits[idx] <= m_cookies:
            visits[idx] += 1
