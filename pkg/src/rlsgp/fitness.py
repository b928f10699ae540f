"""Error of a tree against AND_n, exactly or on sampled training sets.

Truth tables are packed into Python integers: bit ``r`` of a vector is the
value on input row ``r``, and variable x_j reads bit ``j-1`` of the row index.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .tree import AND, Leaf, Node, Tree, distinct_variables, max_variable

CTT_MAX_N = 25
MEMO_MAX_N = 20
D_MAX = 30
MC_SAMPLES = 10**6

_tokens = itertools.count(1)


class TooManyVariables(ValueError):
    pass


@lru_cache(maxsize=8)
def truth_table_columns(n: int) -> tuple[int, ...]:
    """Packed column of every variable over all 2^n rows."""
    if not 0 <= n <= CTT_MAX_N:
        raise ValueError(f"complete truth table needs n <= {CTT_MAX_N}; use sampled mode")
    rows = 1 << n
    columns = []
    for j in range(n):
        half = 1 << j
        period = 2 * half
        vec = ((1 << half) - 1) << half
        while period < rows:
            vec |= vec << period
            period *= 2
        columns.append(vec)
    return tuple(columns)


def _eval(node, columns, key):
    if type(node) is Leaf:
        return columns[node.var - 1]
    memo = node.memo
    if memo is not None and memo[0] == key:
        return memo[1]
    left = _eval(node.left, columns, key)
    right = _eval(node.right, columns, key)
    vec = left & right if node.kind is AND else left | right
    if key:
        node.memo = (key, vec)
    return vec


def evaluate_bits(tree: Tree, columns, key=0) -> int:
    """Packed output of ``tree`` given packed variable columns.

    A nonzero ``key`` memoises per-node results on the (immutable) tree so
    that an offspring sharing structure with its parent is cheap to evaluate.
    Keys must uniquely identify ``columns``.
    """
    if tree is None:
        raise ValueError("the empty tree has no output")
    try:
        return _eval(tree, columns, key)
    except IndexError:
        raise ValueError(f"leaf index exceeds n={len(columns)}") from None


def eval_on_row(tree: Tree, row: int, n: int) -> int:
    """Recursive single-row evaluation; ``row`` is the assignment as an integer."""
    if tree is None:
        raise ValueError("the empty tree has no output")
    if isinstance(tree, Leaf):
        if tree.var > n:
            raise ValueError(f"leaf x{tree.var} exceeds n={n}")
        return (row >> (tree.var - 1)) & 1
    a = eval_on_row(tree.left, row, n)
    b = eval_on_row(tree.right, row, n)
    return a & b if tree.kind is AND else a | b


def target_bits(n: int) -> int:
    """AND_n over the complete truth table: only the all-ones row is set."""
    return 1 << ((1 << n) - 1)


def ctt_error(tree: Tree, n: int) -> int:
    """Number of the 2^n rows on which ``tree`` differs from AND_n.

    The empty tree scores 2^n, worse than any real tree.
    """
    columns = truth_table_columns(n)
    if tree is None:
        return 1 << n
    key = -n if n <= MEMO_MAX_N else 0
    return (evaluate_bits(tree, columns, key) ^ target_bits(n)).bit_count()


def conjunction_ctt_error(a: int, n: int) -> int:
    if not 1 <= a <= n:
        raise ValueError("need 1 <= a <= n")
    return (1 << (n - a)) - 1


@dataclass(frozen=True)
class Sample:
    """``size`` i.i.d. uniform rows, stored column-wise."""
    n: int
    size: int
    columns: tuple
    target: int
    token: int = field(default_factory=lambda: next(_tokens), compare=False)

    def row(self, i: int) -> int:
        return sum(((col >> i) & 1) << j for j, col in enumerate(self.columns))

    def rows(self) -> list[int]:
        return [self.row(i) for i in range(self.size)]


def sample_rows(n: int, s: int, rng) -> Sample:
    if s < 1:
        raise ValueError("sample size must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    columns = tuple(rng.getrandbits(s) for _ in range(n))
    target = (1 << s) - 1
    for col in columns:
        target &= col
    return Sample(n, s, columns, target)


def sampled_error(tree: Tree, sample: Sample) -> int:
    """Disagreements with AND_n on the sample; the empty tree scores ``sample.size``."""
    if tree is None:
        return sample.size
    return (evaluate_bits(tree, sample.columns, sample.token) ^ sample.target).bit_count()


@dataclass(frozen=True)
class GeneralisationError:
    value: Fraction
    is_estimate: bool = False

    @property
    def approx(self) -> float:
        return float(self.value)


def _cofactor(t, var, val):
    if t is True or t is False:
        return t
    if isinstance(t, Leaf):
        return val if t.var == var else t
    left = _cofactor(t.left, var, val)
    right = _cofactor(t.right, var, val)
    if t.kind is AND:
        if left is False or right is False:
            return False
        if left is True:
            return right
        if right is True:
            return left
    else:
        if left is True or right is True:
            return True
        if left is False:
            return right
        if right is False:
            return left
    if left is t.left and right is t.right:
        return t
    return Node(t.kind, left, right)


def on_set_count(tree: Tree, d_max: int = D_MAX) -> tuple[int, int]:
    """(c, d): the tree is true on c of the 2^d assignments to its d distinct variables.

    Memoised Shannon expansion in increasing variable order.
    """
    if tree is None:
        raise ValueError("the empty tree has no on-set")
    variables = sorted(distinct_variables(tree))
    d = len(variables)
    if d > d_max:
        raise TooManyVariables(f"{d} distinct variables > {d_max}; use Monte Carlo estimate")
    memo = {}

    def count(t, i):
        if t is True:
            return 1 << (d - i)
        if t is False:
            return 0
        key = (t, i)
        hit = memo.get(key)
        if hit is None:
            v = variables[i]
            hit = count(_cofactor(t, v, False), i + 1) + count(_cofactor(t, v, True), i + 1)
            memo[key] = hit
        return hit

    return count(tree, 0), d


def exact_generalisation_error(tree: Tree, n: int, d_max: int = D_MAX) -> GeneralisationError:
    # monotone trees are true on the all-ones row, the only row where AND_n is
    if max_variable(tree) > n:
        raise ValueError(f"leaf index exceeds n={n}")
    c, d = on_set_count(tree, d_max)
    return GeneralisationError(Fraction(c, 1 << d) - Fraction(1, 1 << n))


def estimate_generalisation_error(tree: Tree, n: int, rng,
                                  samples: int = MC_SAMPLES) -> GeneralisationError:
    err = sampled_error(tree, sample_rows(n, samples, rng))
    return GeneralisationError(Fraction(err, samples), is_estimate=True)


def generalisation_error(tree: Tree, n: int, rng=None, d_max: int = D_MAX,
                         samples: int = MC_SAMPLES) -> GeneralisationError:
    """Exact error when affordable, else a flagged Monte Carlo estimate."""
    if tree is None:
        return GeneralisationError(Fraction(1))
    try:
        return exact_generalisation_error(tree, n, d_max)
    except TooManyVariables:
        if rng is None:
            raise
        return estimate_generalisation_error(tree, n, rng, samples)
