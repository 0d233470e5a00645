#!/usr/bin/env python3
"""Run every command of the cookiewalk CLI into one results directory.

The default scale matches the acceptance suite where the two coincide;
--quick shrinks everything for a smoke run.  Each command writes
<out>/<command>.csv (and an SVG next to it), so the directory is a full
picture of one master seed.
"""

import argparse
import sys

from cookiewalk.cli import main as cli_main


def commands(quick: bool, seed: int):
    replicas = "2000" if quick else "100000"
    coupled = "50" if quick else "500"
    speed_steps = "10000" if quick else "1000000"
    speed_replicas = "50" if quick else "200"
    renewal_seeds = "10" if quick else "100"
    renewal_k = "100000" if quick else "1000000"
    k_max = "1000" if quick else "10000"
    walk_steps = "10000" if quick else "100000"
    seed = str(seed)
    return [
        ["constants"],
        ["oracle", "--n", "5" if quick else "7"],
        ["gaps", "--replicas", "100000" if quick else "1000000", "--seed", seed],
        ["env", "--seed", seed],
        ["walk", "--steps", walk_steps, "--seed", seed],
        ["speed", "--variant", "homogeneous", "--M", "3",
         "--steps", speed_steps, "--replicas", speed_replicas, "--seed", seed],
        ["regime", "--m-list", "1,3,20", "--steps", speed_steps,
         "--replicas", speed_replicas, "--seed", seed],
        ["crossing", "--n", "2", "--replicas", replicas, "--seed", seed],
        # the coupled variant writes crossing.csv too, so it gets its own
        # subdirectory
        ["crossing", "--coupling", "--n", "4", "--replicas", coupled, "--seed", seed,
         "--out-suffix", "coupling"],
        ["renewal", "--seeds", renewal_seeds, "--K", renewal_k, "--seed", seed],
        ["tkprofile", "--k-max", k_max, "--seed", seed],
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--quick", action="store_true", help="reduced-scale smoke run")
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)

    failures = 0
    for command_args in commands(args.quick, args.seed):
        out_dir = args.out
        if "--out-suffix" in command_args:
            marker = command_args.index("--out-suffix")
            out_dir = f"{args.out}/{command_args[marker + 1]}"
            command_args = command_args[:marker] + command_args[marker + 2 :]
        full = command_args + ["--out", out_dir, "--plot"]
        if args.threads is not None:
            full += ["--threads", str(args.threads)]
        label = " ".join(command_args)
        print(f"running: cookiewalk {label}", flush=True)
        code = cli_main(full)
        if code != 0:
            print(f"  -> exit {code}", file=sys.stderr)
            failures += 1
    print(f"done, {failures} failures, results in {args.out}/")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
