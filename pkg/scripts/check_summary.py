"""Recompute summary.tsv from raw.csv without using the package, and diff them.

usage: python scripts/check_summary.py RESULTS_DIR
Exits 0 when every summary cell matches, 1 otherwise.
"""
import csv
import statistics
import sys
from pathlib import Path

KEY = ("n", "limit", "deletion", "mode", "s", "A")
SUCCESS = {"ExactOptimum", "ThresholdMet"}


def fmt(x):
    return "" if x is None else f"{x:.6f}"


def stats(values):
    if not values:
        return [None, None, None]
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return [statistics.fmean(values), std, float(statistics.median(values))]


def recompute(raw_path):
    cells = {}
    with open(raw_path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            cells.setdefault(tuple(row[k] for k in KEY), []).append(row)
    out = {}
    for key, rows in cells.items():
        ok = [r for r in rows if r["termination"] in SUCCESS]
        stuck = sum(r["termination"] == "StuckDetected" for r in rows)
        budget = sum(r["termination"] == "BudgetExhausted" for r in rows)

        def col(name):
            return [int(r[name]) for r in ok]

        values = [len(rows), len(ok), stuck, budget, fmt(stuck / len(rows))]
        values += [fmt(v) for v in stats(col("iterations"))]
        values += [fmt(v) for v in stats(col("final_leaves"))]
        values += [fmt(v) for v in stats(col("final_or_count"))[:2]]
        values += [fmt(v) for v in stats(col("or_insertions_accepted"))[:2]]
        values.append(int(len(ok) < 2))
        out[key] = [str(v) for v in values]
    return out


def compare(results_dir):
    results_dir = Path(results_dir)
    expected = recompute(results_dir / "raw.csv")
    problems = []
    with open(results_dir / "summary.tsv", newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter="\t"))
    seen = set()
    for row in rows[1:]:
        key, values = tuple(row[:6]), row[6:]
        seen.add(key)
        if key not in expected:
            problems.append(f"{key}: not in raw.csv")
        elif expected[key] != values:
            problems.append(f"{key}: summary {values} != recomputed {expected[key]}")
    problems += [f"{key}: missing from summary.tsv" for key in expected if key not in seen]
    return problems


def main(argv):
    if len(argv) != 1:
        print(__doc__, file=sys.stderr)
        return 2
    problems = compare(argv[0])
    for p in problems:
        print(p)
    print("summary matches raw records" if not problems else f"{len(problems)} mismatches")
    return 1 if problems else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
