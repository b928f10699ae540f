"""Drift bounds, synthetic processes with super-multiplicative drift, and
empirical drift measured on RLS-GP traces."""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Callable, Optional

SAFETY_CAP = 10**7
MIN_BIN_COUNT = 100
Z_ONE_SIDED_95 = statistics.NormalDist().inv_cdf(0.95)


@dataclass(frozen=True)
class SMDParams:
    gamma: float
    delta: float
    x0: float

    def __post_init__(self):
        if not self.gamma > 1:
            raise ValueError("gamma must be > 1")
        if not self.delta > 0:
            raise ValueError("delta must be > 0")
        if not (self.x0 == 0 or self.x0 >= 1):
            raise ValueError("x0 must be 0 or >= 1")


def smd_time_bound(params: SMDParams) -> float:
    """Expected hitting time bound under super-multiplicative drift."""
    g, d, x0 = params.gamma, params.delta, params.x0
    if x0 == 0:
        return 0.0
    levels = math.log2(math.log(max(g, x0), g))
    return 3 / d + 2 * (2 + levels) * math.log(g) / d


def md_time_bound(delta: float, x0: float) -> float:
    """Multiplicative drift bound (1 + ln x0) / delta."""
    if not delta > 0:
        raise ValueError("delta must be > 0")
    if x0 == 0:
        return 0.0
    if x0 < 1:
        raise ValueError("x0 must be 0 or >= 1")
    return (1 + math.log(x0)) / delta


def required_fraction(x: float, gamma: float, delta: float) -> float:
    """Required expected decrease at x as a fraction of x, i.e. (log_gamma(x)+1)*delta."""
    return (math.log(x, gamma) + 1) * delta


def _clamp(y: float) -> float:
    return 0.0 if y < 1 else y


@dataclass(frozen=True)
class SyntheticProcess:
    """A Markov chain on {0} u [1, inf) given by ``step(x, rng) -> next x``."""
    name: str
    gamma: float
    delta: float
    step: Callable

    def params(self, x0: float) -> SMDParams:
        return SMDParams(self.gamma, self.delta, x0)


def exact_condition_process(gamma: float, delta: float) -> SyntheticProcess:
    """Deterministic: x -> x * (1 - (log_gamma(x)+1) delta), clamped below 1 to 0."""
    def step(x, rng):
        return _clamp(x * (1 - min(1.0, required_fraction(x, gamma, delta))))
    return SyntheticProcess("exact", gamma, delta, step)


def double_drift_process(gamma: float, delta: float) -> SyntheticProcess:
    """Two-point randomized steps with twice the required drift.

    With probability 1/2 the fraction removed is min(1, 3q), otherwise
    min(1, q), where q is the required fraction: mean 2q while 3q <= 1 and
    never below min(1, q).
    """
    def step(x, rng):
        q = required_fraction(x, gamma, delta)
        f = min(1.0, 3 * q) if rng.random() < 0.5 else min(1.0, q)
        return _clamp(x * (1 - f))
    return SyntheticProcess("double", gamma, delta, step)


def mixed_regime_process(gamma: float, delta: float) -> SyntheticProcess:
    """Exact-condition steps while x >= gamma^2, two-point random steps below."""
    exact = exact_condition_process(gamma, delta).step
    double = double_drift_process(gamma, delta).step
    cut = gamma ** 2

    def step(x, rng):
        return exact(x, rng) if x >= cut else double(x, rng)
    return SyntheticProcess("mixed", gamma, delta, step)


def bundled_processes(gamma: float, delta: float) -> list[SyntheticProcess]:
    return [exact_condition_process(gamma, delta), double_drift_process(gamma, delta),
            mixed_regime_process(gamma, delta)]


def hitting_time(step: Callable, x0: float, rng, cap: int = SAFETY_CAP) -> int:
    x = x0
    t = 0
    while x != 0:
        if t >= cap:
            raise RuntimeError("process did not hit 0")
        x = step(x, rng)
        t += 1
    return t


def simulate_hitting_time(process, x0: float, trials: int, rng,
                          cap: int = SAFETY_CAP) -> tuple[float, float]:
    """Mean first hitting time of 0 and a 95% normal-approximation half-width."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    step = process.step if hasattr(process, "step") else process
    times = [hitting_time(step, x0, rng, cap) for _ in range(trials)]
    mean = statistics.fmean(times)
    if trials == 1:
        return mean, 0.0
    half = statistics.NormalDist().inv_cdf(0.975) * statistics.stdev(times) / math.sqrt(trials)
    return mean, half


def empirical_drift(process, x: float, samples: int, rng) -> float:
    step = process.step if hasattr(process, "step") else process
    return statistics.fmean(x - step(x, rng) for _ in range(samples))


def gp_drift_lower_bound(x: float, n: int, limit: float) -> float:
    """Lower bound on the expected one-step CTT error decrease of a non-full tree."""
    if x < 1:
        raise ValueError("x must be >= 1")
    if n < 2:
        raise ValueError("n must be >= 2")
    if limit < n:
        raise ValueError("limit must be >= n")
    return (math.log(x, n) + 1) * x / (36 * limit * n)


def geometric_edges(n: int, top: float) -> list[float]:
    """Bin edges n^(k/2), k = 0, 1, ..., up to the first edge above ``top``."""
    edges = [1.0]
    k = 1
    while edges[-1] <= top:
        edges.append(n ** (k / 2))
        k += 1
    return edges


@dataclass(frozen=True)
class DriftBin:
    lo: float
    hi: float
    count: int
    mean: Optional[float]
    ci_halfwidth: Optional[float]

    @property
    def mid(self) -> float:
        return (self.lo + self.hi) / 2

    @property
    def lower_confidence(self) -> Optional[float]:
        if self.mean is None or self.ci_halfwidth is None:
            return None
        return self.mean - self.ci_halfwidth


@dataclass(frozen=True)
class BinnedDrift:
    bins: list
    restricted_to_nonfull: bool


def binned_drift_from_traces(traces, edges, restrict_nonfull: bool = True,
                             z: float = Z_ONE_SIDED_95) -> BinnedDrift:
    """Mean one-step fitness decrease per parent-fitness bin [lo, hi).

    ``traces`` is an iterable of traces, each a list of
    (parent error, error after selection, parent full) tuples. Empty bins
    report ``mean=None``.
    """
    buckets = [[] for _ in range(len(edges) - 1)]
    for trace in traces:
        for before, after, full in trace:
            if restrict_nonfull and full:
                continue
            if before < edges[0] or before >= edges[-1]:
                continue
            # bisect would do, but edge counts are tiny
            for i in range(len(buckets)):
                if before < edges[i + 1]:
                    buckets[i].append(before - after)
                    break
    bins = []
    for i, values in enumerate(buckets):
        if not values:
            bins.append(DriftBin(edges[i], edges[i + 1], 0, None, None))
            continue
        mean = statistics.fmean(values)
        half = (z * statistics.stdev(values) / math.sqrt(len(values))
                if len(values) > 1 else None)
        bins.append(DriftBin(edges[i], edges[i + 1], len(values), mean, half))
    return BinnedDrift(bins, restrict_nonfull)


DRIFT_TSV_HEADER = ("bin_mid", "count", "mean_drift", "ci_halfwidth", "lower_bound")


def drift_report_rows(binned: BinnedDrift, n: int, limit: float) -> list[tuple]:
    rows = []
    for b in binned.bins:
        rows.append((b.mid, b.count,
                     "" if b.mean is None else b.mean,
                     "" if b.ci_halfwidth is None else b.ci_halfwidth,
                     gp_drift_lower_bound(b.mid, n, limit)))
    return rows


def check_gp_drift(binned: BinnedDrift, n: int, limit: float,
                   min_count: int = MIN_BIN_COUNT) -> list[tuple[DriftBin, float, bool]]:
    """(bin, bound at midpoint, lower confidence >= bound) for bins with enough data."""
    out = []
    for b in binned.bins:
        if b.count < min_count:
            continue
        bound = gp_drift_lower_bound(b.mid, n, limit)
        out.append((b, bound, b.lower_confidence >= bound))
    return out
