"""Experiment runner: presets, seeded parallel runs, raw CSV and summary TSVs."""
from __future__ import annotations

import argparse
import csv
import hashlib
import itertools
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .drift import (DRIFT_TSV_HEADER, binned_drift_from_traces,
                    drift_report_rows, geometric_edges)
from .engine import Mode, RunConfig, Termination, run
from .variation import Deletion

log = logging.getLogger(__name__)

GRID_NS = (4, 8, 12, 16)
GRID_LIMITS = ("n", "n+1", "2n", "inf")
SWEEP_SAMPLE_SIZES = tuple(2**k for k in range(4, 17))
SWEEP_THRESHOLDS = (0, 8, 16, 32)
PRESETS = ("table1", "table2", "fig2", "fig3", "drift-report")

RAW_COLUMNS = ("run_id", "seed", "n", "limit", "deletion", "mode", "s", "A",
               "iterations", "termination", "final_leaves", "final_distinct_vars",
               "final_or_count", "or_insertions_accepted", "gen_error",
               "gen_error_is_estimate", "full_iterations")
SUMMARY_COLUMNS = ("n", "limit", "deletion", "mode", "s", "A", "runs", "successful",
                   "stuck", "budget_exhausted", "stuck_proportion",
                   "runtime_mean", "runtime_std", "runtime_median",
                   "size_mean", "size_std", "size_median",
                   "or_final_mean", "or_final_std", "or_inserted_mean", "or_inserted_std",
                   "low_sample")
SWEEP_COLUMNS = ("sweep_value", "mean", "std", "median", "count", "stuck_proportion")
METRICS = {"runtime": "iterations", "treesize": "final_leaves",
           "insOR": "or_insertions_accepted", "finOR": "final_or_count"}


class HarnessError(RuntimeError):
    pass


def parse_limit(text) -> float:
    if isinstance(text, (int, float)):
        value = float(text)
    elif str(text).lower() in ("inf", "infinity"):
        value = math.inf
    else:
        value = float(int(text))
    if not value >= 1:
        raise ValueError(f"limit must be >= 1 or inf, got {text}")
    return value


def resolve_limit(rule: str, n: int) -> float:
    return {"n": n, "n+1": n + 1, "2n": 2 * n, "inf": math.inf}[rule]


def limit_text(limit: float) -> str:
    return "inf" if limit == math.inf else str(int(limit))


@dataclass(frozen=True)
class Cell:
    n: int
    limit: float
    deletion: Deletion
    mode: Mode
    sample_size: Optional[int] = None
    threshold: Optional[int] = None
    limit_rule: Optional[str] = None

    @property
    def cell_id(self) -> str:
        parts = [f"n{self.n}", f"l{limit_text(self.limit)}", self.deletion.value, self.mode.value]
        if self.mode is Mode.SAMPLED:
            parts += [f"s{self.sample_size}", f"A{self.threshold}"]
        return "-".join(parts)

    def key(self) -> tuple:
        return (self.n, limit_text(self.limit), self.deletion.value, self.mode.value,
                "" if self.sample_size is None else str(self.sample_size),
                "" if self.threshold is None else str(self.threshold))

    def axis_value(self, axis: str):
        return {"n": self.n, "limit": limit_text(self.limit), "deletion": self.deletion.value,
                "s": self.sample_size, "A": self.threshold}[axis]

    def group_label(self, axis: str) -> str:
        limit = self.limit_rule or limit_text(self.limit)
        parts = {"n": f"n{self.n}", "limit": f"l{limit}", "deletion": self.deletion.value,
                 "s": f"s{self.sample_size}", "A": f"A{self.threshold}"}
        keys = ["n", "limit", "deletion"] + (["s", "A"] if self.mode is Mode.SAMPLED else [])
        return "-".join(parts[k] for k in keys if k != axis)

    def config(self, seed: int, max_iterations=None, record_drift=False) -> RunConfig:
        return RunConfig(n=self.n, limit=self.limit, deletion=self.deletion, mode=self.mode,
                         sample_size=self.sample_size, threshold=self.threshold or 0,
                         max_iterations=max_iterations, seed=seed, record_drift=record_drift)


@dataclass
class ExperimentSpec:
    name: str
    cells: list
    runs: int = 500
    seed: int = 0
    workers: int = 1
    out: Path = Path("results")
    max_iters: Optional[int] = None
    record_drift: bool = False
    sweep_axis: str = "n"
    metrics: tuple = ("runtime", "treesize")

    def validate(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        for cell in self.cells:
            cell.config(0, self.max_iters).validate()


def preset(name: str, **overrides) -> ExperimentSpec:
    if name in ("table1", "table2"):
        deletion = Deletion.LEAF if name == "table1" else Deletion.SUBTREE
        cells = [Cell(n, resolve_limit(rule, n), deletion, Mode.CTT, limit_rule=rule)
                 for n in GRID_NS for rule in GRID_LIMITS]
        spec = ExperimentSpec(name, cells, sweep_axis="n")
    elif name in ("fig2", "fig3"):
        cells = [Cell(50, math.inf, Deletion.SUBTREE, Mode.SAMPLED, s, a)
                 for a in SWEEP_THRESHOLDS for s in SWEEP_SAMPLE_SIZES]
        metrics = ("runtime", "treesize") if name == "fig2" else ("insOR", "finOR")
        spec = ExperimentSpec(name, cells, sweep_axis="s", metrics=metrics)
    elif name == "drift-report":
        cells = [Cell(12, 24, Deletion.SUBTREE, Mode.CTT)]
        spec = ExperimentSpec(name, cells, record_drift=True)
    else:
        raise ValueError(f"unknown preset {name!r}")
    return replace(spec, **overrides)


def run_seed(master: int, cell_id: str, run_index: int) -> int:
    digest = hashlib.blake2b(f"{master}/{cell_id}/{run_index}".encode(), digest_size=8)
    return int.from_bytes(digest.digest(), "little")


@dataclass
class RunRecord:
    cell: Cell
    run_id: int
    seed: int
    iterations: int
    termination: str
    final_leaves: int
    final_distinct_vars: int
    final_or_count: int
    or_insertions_accepted: int
    gen_error: float
    gen_error_is_estimate: bool
    full_iterations: int
    trace: Optional[list] = field(default=None, repr=False)

    @property
    def successful(self) -> bool:
        return self.termination in (Termination.EXACT_OPTIMUM.value,
                                    Termination.THRESHOLD_MET.value)

    def csv_row(self) -> list:
        c = self.cell
        return [self.run_id, self.seed, c.n, limit_text(c.limit), c.deletion.value,
                c.mode.value, "" if c.sample_size is None else c.sample_size,
                "" if c.threshold is None else c.threshold, self.iterations,
                self.termination, self.final_leaves, self.final_distinct_vars,
                self.final_or_count, self.or_insertions_accepted, repr(self.gen_error),
                int(self.gen_error_is_estimate), self.full_iterations]


def run_job(job) -> tuple:
    cell, run_id, seed, max_iters, record_drift = job
    try:
        r = run(cell.config(seed, max_iters, record_drift))
    except Exception as exc:  # reported per cell by the caller
        return job, None, f"{type(exc).__name__}: {exc}"
    record = RunRecord(cell, run_id, seed, r.iterations, r.termination.value,
                       r.final_leaf_count, r.final_distinct_vars, r.final_or_count,
                       r.or_insertions_accepted, r.final_generalisation_error.approx,
                       r.final_generalisation_error.is_estimate, r.full_iterations,
                       r.drift_trace)
    return job, record, None


def execute(jobs, workers: int = 1):
    if workers <= 1:
        return [run_job(job) for job in jobs]
    chunk = max(1, len(jobs) // (workers * 16))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_job, jobs, chunksize=chunk))


def _stats(values):
    if not values:
        return None, None, None
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return float(arr.mean()), std, float(np.median(arr))


@dataclass
class SummaryRow:
    cell: Cell
    runs: int
    successful: int
    stuck: int
    budget_exhausted: int
    stuck_proportion: float
    runtime: tuple
    size: tuple
    or_final: tuple
    or_inserted: tuple

    @property
    def low_sample(self) -> bool:
        return self.successful < 2

    def tsv_row(self) -> list:
        c = self.cell
        return [c.n, limit_text(c.limit), c.deletion.value, c.mode.value,
                "" if c.sample_size is None else c.sample_size,
                "" if c.threshold is None else c.threshold,
                self.runs, self.successful, self.stuck, self.budget_exhausted,
                fmt(self.stuck_proportion), *map(fmt, self.runtime), *map(fmt, self.size),
                *map(fmt, self.or_final[:2]), *map(fmt, self.or_inserted[:2]),
                int(self.low_sample)]


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def summarize(records) -> list[SummaryRow]:
    """Per-cell statistics; runtime, size and OR counters over successful runs only."""
    by_cell = {}
    for rec in records:
        by_cell.setdefault(rec.cell, []).append(rec)
    rows = []
    for cell, recs in by_cell.items():
        ok = [r for r in recs if r.successful]
        stuck = sum(r.termination == Termination.STUCK_DETECTED.value for r in recs)
        budget = sum(r.termination == Termination.BUDGET_EXHAUSTED.value for r in recs)
        rows.append(SummaryRow(
            cell, len(recs), len(ok), stuck, budget, stuck / len(recs),
            _stats([r.iterations for r in ok]),
            _stats([r.final_leaves for r in ok]),
            _stats([r.final_or_count for r in ok]),
            _stats([r.or_insertions_accepted for r in ok]),
        ))
    return rows


def _write_tsv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _check_writable(out: Path):
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise HarnessError(f"output directory {out} is not writable: {exc}") from exc


@dataclass
class ExperimentOutput:
    records: list
    summary: list
    files: list
    failed_cells: dict


def run_experiment(spec: ExperimentSpec) -> ExperimentOutput:
    spec.validate()
    out = Path(spec.out)
    _check_writable(out)

    jobs = [(cell, i, run_seed(spec.seed, cell.cell_id, i), spec.max_iters, spec.record_drift)
            for cell in spec.cells for i in range(spec.runs)]
    log.info("%s: %d cells x %d runs on %d worker(s)", spec.name, len(spec.cells),
             spec.runs, spec.workers)
    results = execute(jobs, spec.workers)

    failed = {}
    records = []
    for job, record, error in results:
        if error is not None:
            failed.setdefault(job[0].cell_id, error)
        else:
            records.append(record)
    for cell_id, error in failed.items():
        log.error("cell %s aborted: %s", cell_id, error)
    records = [r for r in records if r.cell.cell_id not in failed]

    files = []
    raw = out / "raw.csv"
    with open(raw, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_COLUMNS)
        w.writerows(r.csv_row() for r in records)
    files.append(raw)

    summary = summarize(records)
    path = out / "summary.tsv"
    _write_tsv(path, SUMMARY_COLUMNS, [row.tsv_row() for row in summary])
    files.append(path)

    groups = {}
    for row in summary:
        groups.setdefault(row.cell.group_label(spec.sweep_axis), []).append(row)
    for metric in spec.metrics:
        attr = METRICS[metric]
        for label, rows in groups.items():
            table = []
            for row in rows:
                values = [getattr(r, attr) for r in records if r.cell == row.cell and r.successful]
                mean, std, median = _stats(values)
                table.append([row.cell.axis_value(spec.sweep_axis), fmt(mean), fmt(std),
                              fmt(median), len(values), fmt(row.stuck_proportion)])
            path = out / f"{metric}-{label}.tsv"
            _write_tsv(path, SWEEP_COLUMNS, table)
            files.append(path)

    if spec.record_drift:
        for cell in spec.cells:
            if cell.mode is not Mode.CTT or cell.cell_id in failed or cell.n < 2:
                continue
            traces = [r.trace for r in records if r.cell == cell]
            edges = geometric_edges(cell.n, 2**cell.n)
            binned = binned_drift_from_traces(traces, edges)
            name = "drift.tsv" if len(spec.cells) == 1 else f"drift-{cell.cell_id}.tsv"
            rows = [[fmt(v) if isinstance(v, float) else v for v in row]
                    for row in drift_report_rows(binned, cell.n, max(cell.limit, cell.n))]
            _write_tsv(out / name, DRIFT_TSV_HEADER, rows)
            files.append(out / name)

    return ExperimentOutput(records, summary, files, failed)


# --- command line -------------------------------------------------------------

def _limit_arg(text):
    try:
        return parse_limit(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid limit {text!r}: use a positive integer or inf")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonnegative_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rlsgp", description="RLS-GP experiments on AND_n.")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--n", type=_positive_int, nargs="+")
    p.add_argument("--limit", type=_limit_arg, nargs="+")
    p.add_argument("--deletion", choices=[d.value for d in Deletion], nargs="+")
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--sample-size", type=_positive_int, nargs="+")
    p.add_argument("--threshold", type=_nonnegative_int, nargs="+")
    p.add_argument("--runs", type=_positive_int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=_positive_int)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--record-drift", action="store_true")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def parse_cli(argv) -> ExperimentSpec:
    parser = build_parser()
    args = parser.parse_args(argv)
    cell_flags = [f for f in ("n", "limit", "deletion", "mode", "sample_size", "threshold")
                  if getattr(args, f) is not None]
    common = dict(seed=args.seed, workers=args.workers, out=args.out, max_iters=args.max_iters)
    if args.runs is not None:
        common["runs"] = args.runs

    if args.preset:
        if cell_flags:
            parser.error(f"--preset conflicts with --{cell_flags[0].replace('_', '-')}")
        spec = preset(args.preset, **common)
        if args.record_drift:
            spec.record_drift = True
        return spec

    if args.n is None:
        parser.error("either --preset or --n is required")
    mode = Mode(args.mode or "ctt")
    if mode is Mode.SAMPLED and args.sample_size is None:
        parser.error("--mode sampled requires --sample-size")
    if mode is Mode.CTT and (args.sample_size is not None or args.threshold is not None):
        parser.error("--sample-size/--threshold only apply to --mode sampled")
    if mode is Mode.CTT and max(args.n) > 25:
        parser.error("--mode ctt supports n <= 25")

    limits = args.limit or [math.inf]
    deletions = [Deletion(d) for d in (args.deletion or ["subtree"])]
    sizes = args.sample_size or [None]
    thresholds = args.threshold or ([0] if mode is Mode.SAMPLED else [None])
    cells = [Cell(n, lim, d, mode, s, a)
             for n, lim, d, s, a in itertools.product(args.n, limits, deletions, sizes, thresholds)]
    axes = {"s": sizes, "A": thresholds, "limit": limits, "n": args.n, "deletion": deletions}
    sweep = next((name for name, vals in axes.items() if len(vals) > 1), "n")
    metrics = ("runtime", "treesize", "insOR", "finOR") if mode is Mode.SAMPLED else ("runtime", "treesize")
    return ExperimentSpec("custom", cells, sweep_axis=sweep, metrics=metrics,
                          record_drift=args.record_drift, **common)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    verbose = "-v" in argv or "--verbose" in argv
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    spec = parse_cli(argv)
    try:
        output = run_experiment(spec)
    except (HarnessError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print("\t".join(("cell",) + SUMMARY_COLUMNS[6:]))
    for row in output.summary:
        print("\t".join([row.cell.cell_id] + [str(v) for v in row.tsv_row()[6:]]))
    for path in output.files:
        log.info("wrote %s", path)
    return 1 if output.failed_cells else 0
