"""RLS-GP: elitist single-individual search with a leaf-count limit."""
from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .fitness import (CTT_MAX_N, GeneralisationError, ctt_error,
                      generalisation_error, sample_rows, sampled_error)
from .tree import (AND, OR, Leaf, Node, Tree, distinct_variables, leaf_count,
                   or_count, parse, relabel_canonical, serialize)
from .variation import Deletion, Op, enumerate_neighbors, hvl_prime


class Mode(enum.Enum):
    CTT = "ctt"
    SAMPLED = "sampled"


class Termination(enum.Enum):
    EXACT_OPTIMUM = "ExactOptimum"
    THRESHOLD_MET = "ThresholdMet"
    STUCK_DETECTED = "StuckDetected"
    BUDGET_EXHAUSTED = "BudgetExhausted"


DEFAULT_BUDGET = {Mode.CTT: 10**7, Mode.SAMPLED: 10**5}


@dataclass
class RunConfig:
    n: int
    limit: float = math.inf
    deletion: Deletion = Deletion.SUBTREE
    mode: Mode = Mode.CTT
    sample_size: Optional[int] = None
    threshold: int = 0
    max_iterations: Optional[int] = None
    stuck_check: bool = True
    stuck_window: int = 1000
    seed: int = 0
    record_drift: bool = False

    def __post_init__(self):
        self.deletion = Deletion(self.deletion)
        self.mode = Mode(self.mode)
        if self.max_iterations is None:
            self.max_iterations = DEFAULT_BUDGET[self.mode]

    def validate(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not (self.limit >= 1 and (self.limit == math.inf or self.limit == int(self.limit))):
            raise ValueError(f"limit must be a positive integer or inf, got {self.limit}")
        if self.mode is Mode.CTT and self.n > CTT_MAX_N:
            raise ValueError(f"complete truth table mode needs n <= {CTT_MAX_N}")
        if self.mode is Mode.SAMPLED:
            if self.sample_size is None or self.sample_size < 1:
                raise ValueError("sampled mode needs sample_size >= 1")
            if self.threshold < 0:
                raise ValueError("threshold must be >= 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.stuck_window < 1:
            raise ValueError("stuck_window must be >= 1")


@dataclass
class RunResult:
    iterations: int
    termination: Termination
    final_tree: Tree
    final_leaf_count: int
    final_distinct_vars: int
    final_or_count: int
    or_insertions_accepted: int
    final_generalisation_error: GeneralisationError
    full_iterations: int = 0
    drift_trace: Optional[list] = None

    @property
    def successful(self) -> bool:
        return self.termination in (Termination.EXACT_OPTIMUM, Termination.THRESHOLD_MET)


@dataclass
class RunState:
    config: RunConfig
    tree: Tree = None
    error: Optional[int] = None
    iterations: int = 0
    or_insertions_accepted: int = 0
    full_iterations: int = 0
    stale: int = 0
    termination: Optional[Termination] = None
    trace: Optional[list] = None

    @classmethod
    def initial(cls, config: RunConfig) -> "RunState":
        config.validate()
        state = cls(config, trace=[] if config.record_drift else None)
        if config.mode is Mode.CTT:
            state.error = ctt_error(None, config.n)
        return state


def step(state: RunState, rng) -> RunState:
    """One iteration: (sample,) mutate, select, update counters and check termination.

    Drift trace entries are (parent error, error after selection, parent full);
    iterations starting from the empty tree are not traced.
    """
    cfg = state.config
    parent = state.tree
    sample = sample_rows(cfg.n, cfg.sample_size, rng) if cfg.mode is Mode.SAMPLED else None
    out = hvl_prime(parent, cfg.deletion, cfg.n, rng)
    child = out.offspring

    if sample is None:
        parent_err = state.error
        evaluate = lambda t: ctt_error(t, cfg.n)  # noqa: E731
    else:
        parent_err = sampled_error(parent, sample)
        evaluate = lambda t: sampled_error(t, sample)  # noqa: E731

    accepted = False
    if leaf_count(child) <= cfg.limit:
        child_err = evaluate(child)
        accepted = child_err <= parent_err

    full = leaf_count(parent) >= cfg.limit
    state.iterations += 1
    if full:
        state.full_iterations += 1
    if accepted:
        if out.op is Op.INS and out.inserted_function is OR:
            state.or_insertions_accepted += 1
        improved = child_err < parent_err
        state.tree = child
        state.error = child_err
    else:
        improved = False
        state.error = parent_err
    state.stale = 0 if improved else state.stale + 1
    if state.trace is not None and parent is not None:
        state.trace.append((parent_err, state.error, full))

    if cfg.mode is Mode.CTT:
        if state.error == 0:
            state.termination = Termination.EXACT_OPTIMUM
            return state
        if (cfg.stuck_check and state.stale >= cfg.stuck_window
                and leaf_count(state.tree) >= cfg.limit):
            if is_trapped(state.tree, cfg.deletion, cfg.n, cfg.limit):
                state.termination = Termination.STUCK_DETECTED
                return state
            state.stale = 0
    elif state.tree is not None and state.error <= cfg.threshold:
        state.termination = Termination.THRESHOLD_MET
        return state
    if state.iterations >= cfg.max_iterations:
        state.termination = Termination.BUDGET_EXHAUSTED
    return state


def finish(state: RunState, rng) -> RunResult:
    cfg = state.config
    tree = state.tree
    if cfg.mode is Mode.CTT:
        gen = GeneralisationError(Fraction(ctt_error(tree, cfg.n), 1 << cfg.n))
    else:
        gen = generalisation_error(tree, cfg.n, rng)
    return RunResult(
        iterations=state.iterations,
        termination=state.termination,
        final_tree=tree,
        final_leaf_count=leaf_count(tree),
        final_distinct_vars=len(distinct_variables(tree)),
        final_or_count=or_count(tree),
        or_insertions_accepted=state.or_insertions_accepted,
        final_generalisation_error=gen,
        full_iterations=state.full_iterations,
        drift_trace=state.trace,
    )


def run(config: RunConfig, rng=None) -> RunResult:
    state = RunState.initial(config)
    if rng is None:
        rng = random.Random(config.seed)
    while state.termination is None:
        step(state, rng)
    return finish(state, rng)


def is_absorbing(tree: Tree, variant: Deletion, n: int, limit: float,
                 up_to_renaming: bool = True) -> bool:
    """True iff no accepted mutation can produce a structurally different tree.

    Every outcome is either over the size limit, strictly worse on the complete
    truth table, or the parent itself (identity substitution). With
    ``up_to_renaming`` an accepted outcome that only renames variables also
    counts as the parent: the target and the operator are both symmetric under
    variable permutations, so such a move cannot lead anywhere new.
    """
    if tree is None:
        return False
    err = ctt_error(tree, n)
    key = relabel_canonical(tree) if up_to_renaming else tree
    for out, _ in enumerate_neighbors(tree, variant, n):
        child = out.offspring
        if leaf_count(child) > limit or child is tree:
            continue
        if (relabel_canonical(child) if up_to_renaming else child) == key:
            continue
        if ctt_error(child, n) <= err:
            return False
    return True


def is_trapped(tree: Tree, variant: Deletion, n: int, limit: float,
               max_states: int = 500) -> bool:
    """True iff no sequence of accepted mutations can ever lower the CTT error.

    Explores the plateau of equal-error trees reachable by accepted mutations,
    modulo variable renaming (which preserves both the error and the mutation
    distribution). Any plateau member with a strictly better accepted neighbour
    means escape is possible. Gives up (returns False) past ``max_states``.
    An absorbing tree is the one-state special case.
    """
    if tree is None:
        return False
    err = ctt_error(tree, n)
    start = relabel_canonical(tree)
    seen = {start}
    frontier = [start]
    while frontier:
        current = frontier.pop()
        for out, _ in enumerate_neighbors(current, variant, n):
            child = out.offspring
            if leaf_count(child) > limit or child is current:
                continue
            child_err = ctt_error(child, n)
            if child_err < err:
                return False
            if child_err == err:
                key = relabel_canonical(child)
                if key not in seen:
                    if len(seen) >= max_states:
                        return False
                    seen.add(key)
                    frontier.append(key)
    return True


def construct_theorem1_tree(n: int, limit: int) -> Tree:
    """OR-chain of limit/2 copies of (x1 AND x2): a deadlock for leaf-only deletion."""
    if n < 3:
        raise ValueError("need n >= 3")
    if limit < 4 or limit % 2:
        raise ValueError("need an even limit >= 4")
    block = Node(AND, Leaf(1), Leaf(2))
    tree = block
    for _ in range(limit // 2 - 1):
        tree = Node(OR, tree, block)
    return tree


# Locally optimal trees observed under leaf-only deletion, each with a
# (n, limit) at which it is full.
LOCAL_OPTIMA = (
    ("(or (and x3 x2) (and x2 x3))", 4, 4),
    ("(and (or (and (and x2 x3) x5) (and x2 (and x3 x5))) x1)", 6, 7),
    ("(and (or (and x3 (and x5 x7)) (and x3 (and x7 x5))) (and x2 (and x8 x4)))", 8, 9),
)


def local_optima() -> list[tuple[Tree, int, int]]:
    return [(parse(text), n, limit) for text, n, limit in LOCAL_OPTIMA]


def describe(result: RunResult) -> str:
    return (f"{result.termination.value} after {result.iterations} iterations: "
            f"{serialize(result.final_tree)}")
