"""Command-line front end: config parsing, dispatch, CSV and SVG output.

Configuration layering, lowest to highest precedence: dataclass defaults,
a flat key=value config file, the COOKIEWALK_OUT and COOKIEWALK_THREADS
environment variables, then explicit flags.  Every CSV starts with comment
lines that echo the complete effective configuration in the same key=value
format, so a result file can be re-run by pointing --config at its comment
block.  Usage problems exit with status 2, runtime failures with 1.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import os
import sys
from dataclasses import dataclass
from typing import Optional

_COMMANDS = (
    "gaps",
    "env",
    "walk",
    "speed",
    "crossing",
    "renewal",
    "tkprofile",
    "regime",
    "oracle",
    "constants",
)

_OUT_ENV_VAR = "COOKIEWALK_OUT"
_THREADS_ENV_VAR = "COOKIEWALK_THREADS"

# configuration fields never echoed into output comments: they select where
# and how results are produced, not what is computed
_UNECHOED_FIELDS = ("out_path", "plot", "threads")


@dataclass
class RunConfig:
    command: str = ""
    epsilon: float = 0.75
    p: float = 0.75
    M: Optional[int] = None
    n: Optional[int] = None
    K: Optional[int] = None
    k_max: Optional[int] = None
    steps: Optional[int] = None
    step_cap: Optional[int] = None
    replicas: int = 10_000
    master_seed: int = 1
    out_path: str = "results"
    plot: bool = False
    threads: Optional[int] = None
    variant: str = "counterexample"
    lo: Optional[int] = None
    hi: Optional[int] = None
    seeds: Optional[int] = None
    env_seed: Optional[int] = None
    walk_seed: Optional[int] = None
    draw_shift: bool = False
    checkpoints: Optional[str] = None
    horizon: Optional[int] = None
    record_every: Optional[int] = None
    target: Optional[int] = None
    coupling: bool = False
    m_list: str = "1,3,20"
    censor_budget: float = 1.0


_FIELD_TYPES = {
    "command": str,
    "epsilon": float,
    "p": float,
    "M": int,
    "n": int,
    "K": int,
    "k_max": int,
    "steps": int,
    "step_cap": int,
    "replicas": int,
    "master_seed": int,
    "out_path": str,
    "plot": bool,
    "threads": int,
    "variant": str,
    "lo": int,
    "hi": int,
    "seeds": int,
    "env_seed": int,
    "walk_seed": int,
    "draw_shift": bool,
    "checkpoints": str,
    "horizon": int,
    "record_every": int,
    "target": int,
    "coupling": bool,
    "m_list": str,
    "censor_budget": float,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cookiewalk",
        description=(
            "Excited random walk experiments: heavy-tailed cookie environments, "
            "exact first-passage oracles, and reproducible Monte Carlo."
        ),
    )
    parser.add_argument("command", nargs="?", choices=_COMMANDS, help="experiment to run")
    parser.add_argument("--config", metavar="FILE", help="flat key=value configuration file")
    parser.add_argument("--epsilon", type=float, help="gap-law exponent, in (0.5, 1)")
    parser.add_argument("--p", type=float, help="cookie strength, in (0.5, 1)")
    parser.add_argument("--M", type=int, help="cookies per site (homogeneous variant)")
    parser.add_argument("--n", type=int, help="gap exponent, at least 2")
    parser.add_argument("--K", type=int, help="renewal horizon")
    parser.add_argument("--k-max", dest="k_max", type=int, help="largest first-passage level")
    parser.add_argument("--steps", type=int, help="walk length in steps")
    parser.add_argument("--step-cap", dest="step_cap", type=int, help="censoring cap in steps")
    parser.add_argument("--replicas", type=int, help="number of Monte Carlo replicas")
    parser.add_argument("--seed", dest="master_seed", type=int, help="master seed")
    parser.add_argument("--out", dest="out_path", help="output directory")
    parser.add_argument("--plot", action="store_const", const=True, help="also write an SVG plot")
    parser.add_argument("--threads", type=int, help="replica worker threads")
    parser.add_argument(
        "--variant",
        choices=("homogeneous", "counterexample"),
        help="environment family for env/walk/speed",
    )
    parser.add_argument("--lo", type=int, help="window lower bound (env)")
    parser.add_argument("--hi", type=int, help="window upper bound (env)")
    parser.add_argument("--seeds", type=int, help="number of environment seeds (renewal)")
    parser.add_argument("--env-seed", dest="env_seed", type=int, help="explicit environment seed")
    parser.add_argument("--walk-seed", dest="walk_seed", type=int, help="explicit walk seed")
    parser.add_argument(
        "--draw-shift",
        dest="draw_shift",
        action="store_const",
        const=True,
        help="draw the stationarity shift of the counterexample layout",
    )
    parser.add_argument("--checkpoints", help="comma-separated checkpoint steps (speed/regime)")
    parser.add_argument("--horizon", type=int, help="oracle horizon in steps")
    parser.add_argument(
        "--record-every", dest="record_every", type=int, help="trajectory sampling stride (walk)"
    )
    parser.add_argument("--target", type=int, help="first-passage target (walk)")
    parser.add_argument(
        "--coupling",
        action="store_const",
        const=True,
        help="run the reflected/cookie-walk coupling instead of plain crossings",
    )
    parser.add_argument("--m-list", dest="m_list", help="comma-separated M values (regime)")
    parser.add_argument(
        "--censor-budget",
        dest="censor_budget",
        type=float,
        help="largest tolerated censored fraction before the run fails",
    )
    return parser


def _parse_file_value(key: str, raw: str) -> object:
    kind = _FIELD_TYPES[key]
    if kind is bool:
        lowered = raw.strip().lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise ValueError(f"expected a boolean for {key}, got {raw!r}")
    return kind(raw.strip())


def _read_config_file(path: str) -> dict:
    values: dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {text!r}")
            key, _, raw = text.partition("=")
            key = key.strip()
            if key not in _FIELD_TYPES:
                raise ValueError(f"{path}:{lineno}: unknown configuration key {key!r}")
            values[key] = _parse_file_value(key, raw)
    return values


def _parse_int_list(raw: str, label: str) -> list[int]:
    try:
        items = [int(part) for part in raw.split(",") if part.strip() != ""]
    except ValueError:
        raise ValueError(f"{label} must be a comma-separated integer list, got {raw!r}")
    if not items:
        raise ValueError(f"{label} must not be empty")
    return items


def _validate(config: RunConfig, fail) -> None:
    if config.command not in _COMMANDS:
        fail(f"unknown command {config.command!r}")
    if not 0.5 < config.epsilon < 1.0:
        fail(f"epsilon must lie strictly between 0.5 and 1, got {config.epsilon}")
    if not 0.5 < config.p < 1.0:
        fail(f"p must lie strictly between 0.5 and 1, got {config.p}")
    if config.M is not None and config.M < 0:
        fail(f"M must be non-negative, got {config.M}")
    if config.n is not None and config.n < 2:
        fail(f"n must be at least 2, got {config.n}")
    for name in ("K", "k_max", "steps", "step_cap", "seeds", "horizon", "record_every"):
        value = getattr(config, name)
        if value is not None and value < 1:
            fail(f"{name} must be positive, got {value}")
    if config.replicas < 1:
        fail(f"replicas must be positive, got {config.replicas}")
    if config.threads is not None and config.threads < 1:
        fail(f"threads must be positive, got {config.threads}")
    if config.lo is not None and config.hi is not None and config.lo > config.hi:
        fail(f"lo must not exceed hi, got {config.lo} > {config.hi}")
    if not 0.0 <= config.censor_budget <= 1.0:
        fail(f"censor_budget must lie in [0, 1], got {config.censor_budget}")
    if config.checkpoints is not None:
        try:
            marks = _parse_int_list(config.checkpoints, "checkpoints")
        except ValueError as exc:
            fail(str(exc))
            return
        if any(m < 1 for m in marks) or sorted(marks) != marks:
            fail(f"checkpoints must be ascending positive steps, got {config.checkpoints}")
        if config.steps is not None and config.steps < marks[-1]:
            fail(f"steps={config.steps} is below the last checkpoint {marks[-1]}")
    try:
        m_values = _parse_int_list(config.m_list, "m_list")
    except ValueError as exc:
        fail(str(exc))
        return
    if any(m < 0 for m in m_values):
        fail(f"m_list entries must be non-negative, got {config.m_list}")
    if config.command == "crossing" and not config.coupling and config.replicas < 100:
        fail(f"crossing requires at least 100 replicas, got {config.replicas}")
    if config.target is not None and config.step_cap is not None:
        if config.step_cap < abs(config.target):
            fail(f"step_cap={config.step_cap} cannot reach target {config.target}")


def parse_config(argv: Optional[list[str]] = None, config_file: Optional[str] = None) -> RunConfig:
    """Parse flags, an optional config file, and environment overrides.

    Precedence, lowest first: defaults, config file, environment variables,
    flags.  All usage problems exit with status 2.
    """
    parser = _build_parser()
    namespace = parser.parse_args(argv)
    values = {f.name: f.default for f in dataclasses.fields(RunConfig)}
    path = namespace.config or config_file
    if path:
        try:
            values.update(_read_config_file(path))
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
    if os.environ.get(_OUT_ENV_VAR):
        values["out_path"] = os.environ[_OUT_ENV_VAR]
    if os.environ.get(_THREADS_ENV_VAR):
        try:
            values["threads"] = int(os.environ[_THREADS_ENV_VAR])
        except ValueError:
            parser.error(f"{_THREADS_ENV_VAR} must be an integer")
    for name in values:
        flag_value = getattr(namespace, name, None)
        if flag_value is not None:
            values[name] = flag_value
    if not values["command"]:
        parser.error("a command is required")
    config = RunConfig(**values)
    _validate(config, parser.error)
    return config


# -- command implementations ---------------------------------------------------
# each returns (effective config, header, rows, info lines, censored fraction)


def _derived_env_seed(config: RunConfig) -> int:
    from .experiments import derived_env_seeds

    if config.env_seed is not None:
        return config.env_seed
    return int(derived_env_seeds(config.master_seed, 1)[0])


def _derived_walk_seed(config: RunConfig) -> int:
    from .experiments import derived_walk_seeds

    if config.walk_seed is not None:
        return config.walk_seed
    return int(derived_walk_seeds(config.master_seed, 1)[0])


def _build_environment(config: RunConfig):
    from .gapenv import CounterexampleEnvironment, HomogeneousEnvironment, build_layout

    if config.variant == "homogeneous":
        m_cookies = 3 if config.M is None else config.M
        env = HomogeneousEnvironment(M=m_cookies, p=config.p)
        effective = dataclasses.replace(config, M=m_cookies)
        return effective, env
    env_seed = _derived_env_seed(config)
    layout = build_layout(config.epsilon, env_seed, draw_shift=config.draw_shift)
    env = CounterexampleEnvironment(layout=layout, p=config.p)
    effective = dataclasses.replace(config, env_seed=env_seed)
    return effective, env


def _format(value) -> object:
    if value is None:
        return ""
    if isinstance(value, bool):
        return int(value)
    return value


def _cmd_constants(config: RunConfig):
    from .oracle import bm_two_sided_tail, derived_constants, normal_cdf

    constants = derived_constants(config.epsilon)
    rows = [
        ("epsilon", constants.epsilon),
        ("gamma", constants.gamma),
        ("ratio_r", 4.0**-constants.epsilon),
        ("expected_gap", constants.expected_gap),
        ("inverse_expected_gap", 1.0 / constants.expected_gap),
        ("alpha", constants.alpha),
        ("beta_floor", constants.beta_floor),
        ("crossing_rate_ceiling", constants.crossing_rate_ceiling),
        ("reflected_two_sided_tail_at_1", bm_two_sided_tail(1.0)),
        ("one_sided_normal_tail_at_1", 1.0 - normal_cdf(1.0)),
    ]
    return config, ("name", "value"), rows, [], 0.0


def _cmd_oracle(config: RunConfig):
    from .oracle import bm_two_sided_tail, dp_first_passage_reflected, normal_cdf

    n_top = 4 if config.n is None else config.n
    effective = dataclasses.replace(config, n=n_top)
    rows = []
    info = [
        f"info: reflected_two_sided_tail_at_1={bm_two_sided_tail(1.0)!r}",
        f"info: one_sided_normal_tail_at_1={1.0 - normal_cdf(1.0)!r}",
    ]
    for n in range(2, n_top + 1):
        level = 1 << n
        threshold = 4**n
        horizon = config.horizon
        if horizon is not None and horizon < threshold:
            raise ValueError(f"horizon={horizon} is below the tail threshold {threshold}")
        law = dp_first_passage_reflected(level, horizon)
        if law.mean_is_lower_bound:
            info.append(f"info: mean for m={level} is a lower bound (horizon too short)")
        rows.append((level, threshold, law.tail_at(threshold), law.mean_hitting_time))
    return effective, ("m", "threshold", "tail_probability", "mean_hitting_time"), rows, info, 0.0


def _cmd_gaps(config: RunConfig):
    import numpy as np

    from .experiments import gap_sample_stream
    from .gapenv import GapDistribution, sample_gaps

    dist = GapDistribution(config.epsilon)
    gaps = sample_gaps(dist, gap_sample_stream(config.master_seed), config.replicas)
    exponents = np.log2(gaps.astype(np.float64)).astype(np.int64)
    values, counts = np.unique(exponents, return_counts=True)
    rows = [
        (int(n), 1 << int(n), int(c), int(c) / config.replicas, dist.pmf(int(n)))
        for n, c in zip(values, counts)
    ]
    return config, ("exponent", "gap", "count", "frequency", "expected_pmf"), rows, [], 0.0


def _cmd_env(config: RunConfig):
    from .gapenv import window_dump

    lo = -50 if config.lo is None else config.lo
    hi = 50 if config.hi is None else config.hi
    effective, env = _build_environment(dataclasses.replace(config, lo=lo, hi=hi))
    rows = [(site, int(flag)) for site, flag in window_dump(env, lo, hi)]
    return effective, ("site", "is_cookie_site"), rows, [], 0.0


def _cmd_walk(config: RunConfig):
    from .walker import WalkState, first_passage, run_walk

    effective, env = _build_environment(config)
    if config.target is not None:
        cap = config.step_cap
        if cap is None:
            cap = max(100_000, 100 * abs(config.target))
        effective = dataclasses.replace(effective, step_cap=cap)
        from .experiments import _walk_stream

        rows = []
        censored = 0
        for i in range(config.replicas):
            record = first_passage(0, env, config.target, cap, _walk_stream(config.master_seed, i))
            censored += record.censored
            rows.append((i, config.target, _format(record.hitting_time), int(record.censored)))
        header = ("replica", "target", "hitting_time", "censored")
        return effective, header, rows, [], censored / config.replicas
    steps = 10_000 if config.steps is None else config.steps
    stride = config.record_every
    if stride is None:
        stride = max(1, steps // 1000)
    walk_seed = _derived_walk_seed(config)
    effective = dataclasses.replace(effective, steps=steps, record_every=stride, walk_seed=walk_seed)
    state = WalkState.fresh(0, walk_seed)
    records = run_walk(state, env, steps, record_every=stride)
    return effective, ("step", "position"), records, [], 0.0


def _checkpoint_list(config: RunConfig, steps: int) -> list[int]:
    if config.checkpoints is not None:
        return _parse_int_list(config.checkpoints, "checkpoints")
    marks = sorted({max(1, steps // 100), max(1, steps // 10), steps})
    return marks


def _speed_rows(descriptor: dict, checkpoints: list[int], config: RunConfig):
    import numpy as np

    from .experiments import EstimateCI, speed_samples

    ratios = speed_samples(
        descriptor, checkpoints, config.replicas, config.master_seed, config.threads
    )
    rows = []
    for j, mark in enumerate(checkpoints):
        estimate = EstimateCI.from_samples(ratios[:, j])
        positive = float(np.mean(ratios[:, j] > 0.0))
        rows.append(
            (
                mark,
                estimate.point,
                estimate.std_error,
                estimate.wilson_low,
                estimate.wilson_high,
                positive,
            )
        )
    return rows


_SPEED_HEADER = ("checkpoint", "mean_ratio", "std_error", "ci_low", "ci_high", "positive_fraction")


def _cmd_speed(config: RunConfig):
    steps = 10_000 if config.steps is None else config.steps
    checkpoints = _checkpoint_list(config, steps)
    if steps < checkpoints[-1]:
        raise ValueError(f"steps={steps} is below the last checkpoint {checkpoints[-1]}")
    effective = dataclasses.replace(
        config, steps=steps, checkpoints=",".join(str(m) for m in checkpoints)
    )
    if config.variant == "homogeneous":
        m_cookies = 3 if config.M is None else config.M
        effective = dataclasses.replace(effective, M=m_cookies)
        descriptor = {"variant": "homogeneous", "M": m_cookies, "p": config.p}
    else:
        descriptor = {"variant": "counterexample", "p": config.p, "epsilon": config.epsilon}
        if config.env_seed is not None:
            descriptor["env_seed"] = config.env_seed
    rows = _speed_rows(descriptor, checkpoints, config)
    return effective, _SPEED_HEADER, rows, [], 0.0


def _cmd_regime(config: RunConfig):
    steps = 10_000 if config.steps is None else config.steps
    checkpoints = _checkpoint_list(config, steps)
    if steps < checkpoints[-1]:
        raise ValueError(f"steps={steps} is below the last checkpoint {checkpoints[-1]}")
    effective = dataclasses.replace(
        config, steps=steps, checkpoints=",".join(str(m) for m in checkpoints)
    )
    rows = []
    for m_cookies in _parse_int_list(config.m_list, "m_list"):
        descriptor = {"variant": "homogeneous", "M": m_cookies, "p": config.p}
        for row in _speed_rows(descriptor, checkpoints, config):
            rows.append((m_cookies,) + row)
    return effective, ("M",) + _SPEED_HEADER, rows, [], 0.0


def _cmd_crossing(config: RunConfig):
    n = 2 if config.n is None else config.n
    if config.coupling:
        from .experiments import coupled_crossing_records

        cap = 400 * 4**n if config.step_cap is None else config.step_cap
        effective = dataclasses.replace(config, n=n, step_cap=cap)
        records = coupled_crossing_records(
            config.p, n, config.replicas, config.master_seed, cap, config.threads
        )
        violations = sum(r.domination_violations for r in records)
        if violations:
            raise RuntimeError(f"coupling domination violated {violations} times")
        rows = [
            (i, r.n, _format(r.reflected_time), _format(r.erw_time), int(r.ever_split))
            for i, r in enumerate(records)
        ]
        censored = sum(1 for r in records if r.erw_time is None or r.reflected_time is None)
        header = ("replica", "n", "reflected_time", "erw_time", "ever_split")
        return effective, header, rows, [], censored / config.replicas
    from .experiments import crossing_tail_report
    from .oracle import dp_first_passage_reflected

    report = crossing_tail_report(
        n,
        config.p,
        config.replicas,
        config.master_seed,
        config.step_cap,
        config.threads,
        config.epsilon,
    )
    effective = dataclasses.replace(config, n=n, step_cap=report.step_cap)
    dp_tail = dp_first_passage_reflected(1 << n, 4**n).tail_at(4**n)
    estimate = report.estimate
    rows = [
        (
            report.n,
            report.p,
            report.replicas,
            report.threshold,
            report.step_cap,
            report.slow,
            report.censored,
            estimate.point,
            estimate.std_error,
            estimate.wilson_low,
            estimate.wilson_high,
            dp_tail,
        )
    ]
    header = (
        "n",
        "p",
        "replicas",
        "threshold",
        "step_cap",
        "slow",
        "censored",
        "point",
        "std_error",
        "wilson_low",
        "wilson_high",
        "dp_tail",
    )
    return effective, header, rows, [], report.censored / report.replicas


def _cmd_renewal(config: RunConfig):
    from .experiments import derived_env_seeds, renewal_counts
    from .gapenv import build_layout

    seeds = 100 if config.seeds is None else config.seeds
    horizon = 1_000_000 if config.K is None else config.K
    effective = dataclasses.replace(config, seeds=seeds, K=horizon)
    env_seeds = derived_env_seeds(config.master_seed, seeds)
    rows = []
    for i in range(seeds):
        layout = build_layout(config.epsilon, int(env_seeds[i]))
        counts = renewal_counts(layout, horizon)
        for n in sorted(counts.by_exponent):
            rows.append((i, int(env_seeds[i]), horizon, n, counts.by_exponent[n], counts.total))
    return effective, ("seed_index", "env_seed", "K", "n", "count", "total"), rows, [], 0.0


def _cmd_tkprofile(config: RunConfig):
    from .experiments import tk_over_k_profile

    k_max = 10_000 if config.k_max is None else config.k_max
    cap = 2000 * k_max if config.step_cap is None else config.step_cap
    env_seed = _derived_env_seed(config)
    walk_seed = _derived_walk_seed(config)
    effective = dataclasses.replace(
        config, k_max=k_max, step_cap=cap, env_seed=env_seed, walk_seed=walk_seed
    )
    profile = tk_over_k_profile(env_seed, walk_seed, k_max, cap, config.epsilon, config.p)
    rows = []
    best = 0.0
    censored = 0
    for level, hitting_time, ratio in profile.first_passage_profile:
        if hitting_time is None:
            censored += 1
            rows.append((level, "", 1, "", ""))
        else:
            best = max(best, ratio)
            rows.append((level, hitting_time, 0, ratio, best))
    header = ("K", "hitting_time", "censored", "ratio", "running_max")
    return effective, header, rows, [], censored / k_max


_DISPATCH = {
    "constants": _cmd_constants,
    "oracle": _cmd_oracle,
    "gaps": _cmd_gaps,
    "env": _cmd_env,
    "walk": _cmd_walk,
    "speed": _cmd_speed,
    "regime": _cmd_regime,
    "crossing": _cmd_crossing,
    "renewal": _cmd_renewal,
    "tkprofile": _cmd_tkprofile,
}

_PLOT_AXES = {
    "constants": (None, "value", True),
    "oracle": ("m", "tail_probability", False),
    "gaps": ("exponent", "frequency", True),
    "env": ("site", "is_cookie_site", False),
    "walk": (None, "position", False),
    "speed": ("checkpoint", "mean_ratio", False),
    "regime": (None, "mean_ratio", False),
    "crossing": (None, "point", False),
    "renewal": (None, "count", True),
    "tkprofile": ("K", "running_max", False),
}

# walk and crossing emit a different header in their first-passage and
# coupling modes; these axes apply when the primary y column is absent
_ALT_PLOT_AXES = {
    "walk": ("replica", "hitting_time", False),
    "crossing": ("replica", "erw_time", False),
}


def _config_echo_lines(config: RunConfig) -> list[str]:
    lines = []
    for field in dataclasses.fields(RunConfig):
        if field.name in _UNECHOED_FIELDS:
            continue
        value = getattr(config, field.name)
        if value is None:
            continue
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{field.name}={value}")
    return lines


def _write_csv(path: str, config: RunConfig, header, rows, info: list[str]) -> None:
    from . import __version__

    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# cookiewalk {__version__}\n")
        for line in _config_echo_lines(config):
            fh.write(f"# {line}\n")
        for line in info:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_plot(path: str, command: str, header, rows) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "cookiewalk"
    x_name, y_name, log_y = _PLOT_AXES[command]
    if y_name not in header:
        x_name, y_name, log_y = _ALT_PLOT_AXES[command]
    y_col = header.index(y_name)
    points = [
        (i if x_name is None else row[header.index(x_name)], row[y_col])
        for i, row in enumerate(rows)
        if row[y_col] != ""
    ]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if points:
        ax.plot([q[0] for q in points], [float(q[1]) for q in points], lw=1.2)
        if log_y and all(float(q[1]) > 0 for q in points):
            ax.set_yscale("log")
    ax.set_xlabel(x_name if x_name is not None else "row")
    ax.set_ylabel(y_name)
    ax.set_title(command)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def dispatch(config: RunConfig) -> int:
    """Run one command and write its CSV (and SVG with --plot) under out_path.

    Returns 0 on success, 1 on runtime failure or when the censored fraction
    exceeds the configured budget.
    """
    try:
        effective, header, rows, info, censored_fraction = _DISPATCH[config.command](config)
        os.makedirs(effective.out_path, exist_ok=True)
        csv_path = os.path.join(effective.out_path, f"{config.command}.csv")
        _write_csv(csv_path, effective, header, rows, info)
        if effective.plot:
            _write_plot(
                os.path.join(effective.out_path, f"{config.command}.svg"),
                config.command,
                header,
                rows,
            )
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"cookiewalk: error: {exc}", file=sys.stderr)
        return 1
    if censored_fraction > config.censor_budget:
        print(
            f"cookiewalk: error: censored fraction {censored_fraction:.4f} exceeds "
            f"budget {config.censor_budget:.4f}",
            file=sys.stderr,
        )
        return 1
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    return dispatch(parse_config(argv))


if __name__ == "__main__":
    sys.exit(main())
