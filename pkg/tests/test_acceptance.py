"""Acceptance suite: nine end-to-end checks at full scale.

Each test prints one PASS or FAIL line with the measured quantities so a
plain pytest run doubles as the acceptance report.  Tolerances and scales
are stated inline; the statistical checks run on fixed master seeds, so
every number here is reproducible bit for bit.
"""

import statistics
import subprocess
import sys
import time

import numpy as np

from test_oracle import enumerated_tails

from cookiewalk.experiments import (
    coupled_crossing_records,
    crossing_tail_report,
    derived_env_seeds,
    derived_walk_seeds,
    EstimateCI,
    gap_sample_stream,
    renewal_counts,
    speed_samples,
    tk_over_k_profile,
)
from cookiewalk.gapenv import GapDistribution, build_layout, gamma_of_epsilon, sample_gaps
from cookiewalk.oracle import (
    bm_two_sided_tail,
    derived_constants,
    dp_first_passage_reflected,
    normal_cdf,
)

EPSILONS = (0.55, 0.6, 0.75, 0.9)


def _report(capsys, line):
    with capsys.disabled():
        print(line, flush=True)


def test_ac1_sampler_law(capsys):
    # 10**6 draws at epsilon = 0.75: empirical pmf at gaps 4, 8, 16 within
    # 4 standard errors of (1 - r) r**(n-2); total runtime below 5 s.
    t0 = time.monotonic()
    dist = GapDistribution(0.75)
    draws = 10**6
    gaps = sample_gaps(dist, gap_sample_stream(1), draws)
    deviations = []
    for n in (2, 3, 4):
        pmf = dist.pmf(n)
        freq = np.count_nonzero(gaps == (1 << n)) / draws
        se = (pmf * (1.0 - pmf) / draws) ** 0.5
        deviations.append(abs(freq - pmf) / se)
    elapsed = time.monotonic() - t0
    ok = all(d < 4.0 for d in deviations) and elapsed < 5.0
    detail = (
        "pmf deviations at 4,8,16 = "
        + ",".join(f"{d:.2f}" for d in deviations)
        + f" SE (limit 4), runtime {elapsed:.2f}s (limit 5s)"
    )
    _report(capsys, f"AC1 {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_ac2_closed_forms(capsys):
    # gamma and the mean gap against direct series summation, 1e-10, for
    # epsilon in {0.55, 0.6, 0.75, 0.9}.  gamma's series converges within
    # 200 terms at every epsilon; the mean's series has term ratio 2r,
    # which at epsilon = 0.55 leaves about 3e-5 after 200 terms, so its
    # summation runs until the partial sum stops moving instead of being
    # cut at a fixed count.
    worst_gamma = 0.0
    worst_mean = 0.0
    for epsilon in EPSILONS:
        dist = GapDistribution(epsilon)
        gamma_series = 1.0 / sum(4.0 ** (-epsilon * n) for n in range(2, 202))
        worst_gamma = max(worst_gamma, abs(gamma_of_epsilon(epsilon) - gamma_series))
        mean_series = 0.0
        for n in range(2, 4000):
            term = (1 << n) * dist.pmf(n)
            if mean_series > 0.0 and term < mean_series * 1e-17:
                break
            mean_series += term
        worst_mean = max(worst_mean, abs(dist.expected_gap - mean_series))
    ok = worst_gamma < 1e-10 and worst_mean < 1e-10
    detail = (
        f"max |closed form - series| over epsilon {EPSILONS}: "
        f"gamma {worst_gamma:.2e}, mean gap {worst_mean:.2e} (limit 1e-10)"
    )
    _report(capsys, f"AC2 {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_ac3_oracle_exactness(capsys):
    # DP equals exhaustive path enumeration exactly for levels up to 4 and
    # horizon 16, and the DP mean hitting time equals level**2 to 1e-9.
    exact = True
    for level in (1, 2, 3, 4):
        law = dp_first_passage_reflected(level, horizon=16)
        brute = enumerated_tails(level, 16)
        exact = exact and all(law.tail_at(t) == brute[t] for t in range(17))
    worst_mean = max(
        abs(dp_first_passage_reflected(m).mean_hitting_time - m * m) for m in (2, 4, 8, 16)
    )
    ok = exact and worst_mean < 1e-9
    detail = (
        f"enumeration match (m <= 4, horizon 16): {exact}; "
        f"max |mean - m^2| = {worst_mean:.2e} (limit 1e-9)"
    )
    _report(capsys, f"AC3 {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_ac4_donsker_consistency(capsys):
    # DP tails P(T_{2^n} >= 4^n) for n = 2..7; the n = 7 value within 0.02
    # of the Brownian two-sided tail at 1; both that constant and the
    # one-sided tail 1 - Phi(1) are reported; runtime below 60 s.
    t0 = time.monotonic()
    tails = [
        dp_first_passage_reflected(1 << n, horizon=4**n).tail_at(4**n) for n in range(2, 8)
    ]
    bm = bm_two_sided_tail(1.0)
    one_sided = 1.0 - normal_cdf(1.0)
    gap = abs(tails[-1] - bm)
    elapsed = time.monotonic() - t0
    ok = gap < 0.02 and elapsed < 60.0
    detail = (
        f"tails n=2..7 = {', '.join(f'{t:.6f}' for t in tails)}; "
        f"two-sided limit {bm:.6f}, one-sided 1-Phi(1) {one_sided:.6f}; "
        f"n=7 gap {gap:.2e} (limit 0.02), runtime {elapsed:.2f}s (limit 60s)"
    )
    _report(capsys, f"AC4 {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_ac5_crossing_floor(capsys):
    # Monte Carlo slow-crossing estimates at n in {2,3,4}, p = 0.75, 10**5
    # replicas each, never more than 3 standard errors below the reflected
    # DP tail; plus over 10**6 coupled steps with the cookie walk never
    # above the reflected walk.
    margins = []
    ok = True
    for n in (2, 3, 4):
        report = crossing_tail_report(n, 0.75, 10**5, seed=1)
        dp_tail = dp_first_passage_reflected(1 << n, 4**n).tail_at(4**n)
        floor = dp_tail - 3.0 * report.estimate.std_error
        margins.append(report.estimate.point - dp_tail)
        ok = ok and report.estimate.point >= floor
    records = coupled_crossing_records(0.75, 6, 14, seed=1)
    steps = sum(r.total_steps for r in records)
    violations = sum(r.domination_violations for r in records)
    ok = ok and steps >= 10**6 and violations == 0
    detail = (
        "estimate - dp_tail at n=2,3,4 = "
        + ",".join(f"{m:+.4f}" for m in margins)
        + f" (floor -3 SE); coupled steps {steps} (need >= 1e6), "
        + f"domination violations {violations} (need 0)"
    )
    _report(capsys, f"AC5 {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_ac6_renewal_density(capsys):
    # At epsilon = 0.75 and K = 10**6, over 100 environment seeds derived
    # from master seed 1: N(K)/K within 5% of 1/E[Z] in at least 95 seeds,
    # and the size-4 and size-8 gap counts at least alpha * 4**(-eps*n) * K
    # in at least 95 seeds.
    constants = derived_constants(0.75)
    horizon = 10**6
    rate = 1.0 / constants.expected_gap
    floors = {n: constants.alpha * 4.0 ** (-0.75 * n) * horizon for n in (2, 3)}
    seeds = derived_env_seeds(1, 100)
    within = 0
    floor_hits = {2: 0, 3: 0}
    for seed in seeds:
        layout = build_layout(0.75, int(seed))
        counts = renewal_counts(layout, horizon)
        if abs(counts.total / horizon - rate) <= 0.05 * rate:
            within += 1
        for n in (2, 3):
            if counts.by_exponent.get(n, 0) >= floors[n]:
                floor_hits[n] += 1
    ok = within >= 95 and floor_hits[2] >= 95 and floor_hits[3] >= 95
    detail = (
        f"N(K)/K within 5% of 1/E[Z] in {within}/100 seeds (need >= 95); "
        f"size-4 floor in {floor_hits[2]}/100, size-8 floor in {floor_hits[3]}/100 (need >= 95)"
    )
    _report(capsys, f"AC6 {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_ac7_divergence_profile(capsys):
    # Over 50 (environment, walk) seed pairs from master seed 1 with
    # K_max = 10**4: the median running max of T_K/K exceeds
    # 0.04 * 4**((1 - eps) n) at n = 2 (= 0.08), and the median at
    # K_max = 10**4 strictly exceeds the median at K_max = 10**3.
    env_seeds = derived_env_seeds(1, 50)
    walk_seeds = derived_walk_seeds(1, 50)
    profiles = [
        tk_over_k_profile(int(e), int(w), 10**4)
        for e, w in zip(env_seeds, walk_seeds)
    ]
    median_full = statistics.median(p.max_ratio() for p in profiles)
    median_small = statistics.median(p.max_ratio(10**3) for p in profiles)
    threshold = 0.04 * 4.0 ** ((1.0 - 0.75) * 2)
    ok = median_full > threshold and median_full > median_small
    detail = (
        f"median max T_K/K: {median_full:.1f} at K_max=1e4 vs {median_small:.1f} at "
        f"K_max=1e3 (must grow), threshold {threshold:.2f}"
    )
    _report(capsys, f"AC7 {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_ac8_homogeneous_regimes(capsys):
    # p = 0.75: M = 3 gives strictly decreasing Y_n/n over n in
    # {1e4, 1e5, 1e6} with at least 90% of 200 replicas positive at 1e6;
    # M = 20 gives a 95% CI for Y_1e6/1e6 excluding zero; combined runtime
    # under 15 minutes.
    t0 = time.monotonic()
    checkpoints = [10**4, 10**5, 10**6]
    slow = speed_samples({"variant": "homogeneous", "M": 3, "p": 0.75}, checkpoints, 200, seed=1)
    points = slow.mean(axis=0)
    positive = float(np.mean(slow[:, 2] > 0.0))
    fast = speed_samples({"variant": "homogeneous", "M": 20, "p": 0.75}, [10**6], 200, seed=1)
    ci = EstimateCI.from_samples(fast[:, 0])
    elapsed = time.monotonic() - t0
    ok = (
        points[0] > points[1] > points[2]
        and positive >= 0.9
        and (ci.wilson_low > 0.0 or ci.wilson_high < 0.0)
        and elapsed < 900.0
    )
    detail = (
        f"M=3 ratios {points[0]:.4f} > {points[1]:.4f} > {points[2]:.4f}, "
        f"positive fraction {positive:.2f} (need >= 0.90); "
        f"M=20 CI [{ci.wilson_low:.4f}, {ci.wilson_high:.4f}] excludes 0; "
        f"runtime {elapsed:.1f}s (limit 900s)"
    )
    _report(capsys, f"AC8 {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_ac9_reproducibility(capsys, tmp_path):
    # Identical configuration and master seed give byte-identical CSVs,
    # including across different --threads values, exercised through the
    # real command-line entry point.
    def run(command_args, out_dir):
        result = subprocess.run(
            [sys.executable, "-m", "cookiewalk.cli"] + command_args + ["--out", str(out_dir)],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        return out_dir

    crossing = ["crossing", "--replicas", "200", "--seed", "13"]
    a = run(crossing + ["--threads", "1"], tmp_path / "crossing_serial")
    b = run(crossing + ["--threads", "3"], tmp_path / "crossing_pooled")
    crossing_same = (a / "crossing.csv").read_bytes() == (b / "crossing.csv").read_bytes()

    speed = ["speed", "--variant", "homogeneous", "--steps", "2000", "--replicas", "40", "--seed", "5"]
    c = run(speed + ["--threads", "1"], tmp_path / "speed_serial")
    d = run(speed + ["--threads", "4"], tmp_path / "speed_pooled")
    speed_same = (c / "speed.csv").read_bytes() == (d / "speed.csv").read_bytes()

    ok = crossing_same and speed_same
    detail = (
        f"crossing bytes identical across threads 1 vs 3: {crossing_same}; "
        f"speed bytes identical across threads 1 vs 4: {speed_same}"
    )
    _report(capsys, f"AC9 {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail
