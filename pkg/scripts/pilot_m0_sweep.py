#!/usr/bin/env python3
"""Pilot sweep over the cookie count M at fixed p.

Locates the speed transition of the homogeneous walk and shows why M = 20
is used as the comfortably ballistic reference point: at p = 0.75 the
product M(2p - 1) crosses the critical value 2 between M = 4 and M = 5,
and the measured speed keeps growing well past the transition.
"""

import argparse
import sys

from cookiewalk.experiments import EstimateCI, speed_samples


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--p", type=float, default=0.75)
    parser.add_argument("--steps", type=int, default=100_000)
    parser.add_argument("--replicas", type=int, default=200)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument(
        "--m-values",
        default="0,1,2,3,4,5,6,8,12,20,40",
        help="comma-separated cookie counts to sweep",
    )
    args = parser.parse_args(argv)

    m_values = [int(v) for v in args.m_values.split(",")]
    drift = 2.0 * args.p - 1.0
    print(f"p={args.p} steps={args.steps} replicas={args.replicas} seed={args.seed}")
    print("M,M(2p-1),mean_ratio,ci_low,ci_high,positive_fraction")
    for m in m_values:
        descriptor = {"variant": "homogeneous", "M": m, "p": args.p}
        ratios = speed_samples(descriptor, [args.steps], args.replicas, args.seed)
        estimate = EstimateCI.from_samples(ratios[:, 0])
        positive = float((ratios[:, 0] > 0).mean())
        print(
            f"{m},{m * drift:.2f},{estimate.point:.5f},"
            f"{estimate.wilson_low:.5f},{estimate.wilson_high:.5f},{positive:.3f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
