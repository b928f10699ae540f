"""Simulate the bundled synthetic processes and compare hitting times with both bounds.

usage: python scripts/drift_synthetic.py [--trials 1000] [--seed 0]
"""
import argparse
import random

from rlsgp.drift import (bundled_processes, md_time_bound,
                         simulate_hitting_time, smd_time_bound)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    print(f"{'process':>8} {'gamma':>5} {'delta':>6} {'log_g X0':>8} "
          f"{'mean T':>9} {'+-':>6} {'smd bound':>10} {'md bound':>10}")
    for gamma in (2, 10):
        for delta in (0.1, 0.01):
            for proc in bundled_processes(gamma, delta):
                for k in (1, 4, 64):
                    x0 = float(gamma) ** k
                    mean, half = simulate_hitting_time(proc, x0, args.trials, rng)
                    print(f"{proc.name:>8} {gamma:>5} {delta:>6} {k:>8} {mean:>9.1f} "
                          f"{half:>6.1f} {smd_time_bound(proc.params(x0)):>10.1f} "
                          f"{md_time_bound(delta, x0):>10.1f}")


if __name__ == "__main__":
    main()
