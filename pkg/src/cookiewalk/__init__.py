"""Simulation and exact computation for excited random walks on the integers.

The package centers on a family of cookie environments with heavy-tailed
spacing between cookie sites: the spacing law has finite mean but infinite
variance, cookie sites carry infinitely many cookies of strength p, and the
walk nevertheless has zero speed.  Alongside the simulators sit exact
dynamic-programming oracles for the reflected symmetric walk and closed-form
constants, so the statistical experiments can be checked against computation
that involves no randomness at all.
"""

from .gapenv import (
    CookieEnvironment,
    CounterexampleEnvironment,
    GapDistribution,
    HomogeneousEnvironment,
    RenewalLayout,
    build_layout,
    environment_from_descriptor,
    gamma_of_epsilon,
    probability_at,
    sample_gap,
    window_dump,
)
from .oracle import (
    DerivedConstants,
    DistributionVector,
    FirstPassageLaw,
    bm_two_sided_tail,
    derived_constants,
    dp_first_passage_reflected,
    normal_cdf,
)
from .walker import (
    CENSORED,
    CoupledRunRecord,
    CoupledState,
    FirstPassageRecord,
    WalkState,
    coupled_run,
    crossing_time,
    first_passage,
    run_walk,
    step,
)
from .experiments import (
    EstimateCI,
    RenewalCounts,
    SpeedProfile,
    binomial_floor_check,
    estimate_crossing_tail,
    renewal_counts,
    speed_estimate,
    tk_over_k_profile,
    wilson_interval,
)

__version__ = "0.1.0"

__all__ = [
    "CENSORED",
    "CookieEnvironment",
    "CoupledRunRecord",
    "CoupledState",
    "CounterexampleEnvironment",
    "DerivedConstants",
    "DistributionVector",
    "EstimateCI",
    "FirstPassageLaw",
    "FirstPassageRecord",
    "GapDistribution",
    "HomogeneousEnvironment",
    "RenewalCounts",
    "RenewalLayout",
    "SpeedProfile",
    "WalkState",
    "binomial_floor_check",
    "bm_two_sided_tail",
    "build_layout",
    "coupled_run",
    "crossing_time",
    "derived_constants",
    "dp_first_passage_reflected",
    "environment_from_descriptor",
    "estimate_crossing_tail",
    "first_passage",
    "gamma_of_epsilon",
    "normal_cdf",
    "probability_at",
    "renewal_counts",
    "run_walk",
    "sample_gap",
    "speed_estimate",
    "step",
    "tk_over_k_profile",
    "wilson_interval",
    "window_dump",
]
