"""Run the leaf-only and subtree CTT grids and print them next to reference values.

usage: python scripts/reproduce_grids.py [--runs 500] [--workers 1] [--out results]
"""
import argparse
from pathlib import Path

from rlsgp.harness import preset, run_experiment

RULES = ("n", "n+1", "2n", "inf")
# reference mean runtimes; leaf-only entries also carry the stuck proportion
REFERENCE = {
    "table2": {
        4: (51.2, 42.5, 38.8, 39.1),
        8: (147.5, 129.9, 93.5, 92.3),
        12: (325.9, 233.4, 153.6, 151.2),
        16: (544.6, 377.0, 228.3, 221.0),
    },
    "table1": {
        4: (46.3, 40.9, 42.5, 38.9),
        8: (151.8, 113.8, 98.8, 95.3),
        12: (284.1, 214.3, 170.7, 160.1),
        16: (469.9, 345.8, 232.5, 235.3),
    },
}
REFERENCE_B = {
    4: (0.008, 0.002, 0, 0),
    8: (0.002, 0.004, 0, 0),
    12: (0.016, 0.002, 0, 0),
    16: (0.008, 0.010, 0, 0),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=500)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    for name, label in (("table1", "leaf-only deletion"), ("table2", "subtree deletion")):
        out = run_experiment(preset(name, runs=args.runs, workers=args.workers,
                                    seed=args.seed, out=args.out / name))
        rows = {(r.cell.n, r.cell.limit_rule): r for r in out.summary}
        print(f"\n{label} ({args.runs} runs per cell, outputs in {args.out / name})")
        print(f"{'n':>3} {'limit':>5} {'B':>6} {'ref B':>6} {'T':>8} {'ref T':>8} "
              f"{'diff':>7} {'S':>6}")
        for n, refs in REFERENCE[name].items():
            for i, rule in enumerate(RULES):
                row = rows[(n, rule)]
                mean = row.runtime[0]
                ref_b = f"{REFERENCE_B[n][i]:.3f}" if name == "table1" else "-"
                diff = "-" if mean is None else f"{100 * (mean / refs[i] - 1):+.1f}%"
                mean_text = "-" if mean is None else f"{mean:.1f}"
                size_text = "-" if row.size[0] is None else f"{row.size[0]:.2f}"
                print(f"{n:>3} {rule:>5} {row.stuck_proportion:>6.3f} {ref_b:>6} "
                      f"{mean_text:>8} {refs[i]:>8.1f} {diff:>7} {size_text:>6}")


if __name__ == "__main__":
    main()
