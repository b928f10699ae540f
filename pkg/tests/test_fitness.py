import math
import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import compile_tree, naive_ctt_error
from rlsgp.fitness import (CTT_MAX_N, TooManyVariables, conjunction_ctt_error,
                           ctt_error, estimate_generalisation_error, eval_on_row,
                           exact_generalisation_error, generalisation_error,
                           on_set_count, sample_rows, sampled_error, truth_table_columns)
from rlsgp.tree import Leaf, conjunction, parse, random_tree


def test_eval_on_row():
    assert eval_on_row(Leaf(1), 0b1, 1) == 1
    assert eval_on_row(conjunction(range(1, 7)), 0b111111, 6) == 1
    assert eval_on_row(parse("(or x1 x2)"), 0b10, 2) == 1
    with pytest.raises(ValueError):
        eval_on_row(Leaf(3), 0, 2)


def test_columns_follow_row_encoding():
    cols = truth_table_columns(3)
    for j, col in enumerate(cols):
        for r in range(8):
            assert (col >> r) & 1 == (r >> j) & 1


def test_ctt_small_cases():
    assert ctt_error(conjunction(range(1, 9)), 8) == 0
    assert ctt_error(Leaf(1), 4) == 7
    assert ctt_error(parse("(or x1 x2)"), 2) == naive_ctt_error(parse("(or x1 x2)"), 2) == 2
    assert ctt_error(None, 5) == 32
    with pytest.raises(ValueError):
        ctt_error(Leaf(1), CTT_MAX_N + 1)
    with pytest.raises(ValueError):
        ctt_error(Leaf(5), 4)


def test_conjunction_formula_matches_ctt():
    assert conjunction_ctt_error(4, 4) == 0
    assert conjunction_ctt_error(1, 4) == 7
    assert conjunction_ctt_error(3, 8) == 31
    for vars_ in combinations(range(1, 9), 3):
        assert ctt_error(conjunction(vars_), 8) == 31
    with pytest.raises(ValueError):
        conjunction_ctt_error(5, 4)


@st.composite
def small_trees(draw, max_n=10, max_leaves=14):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    leaves = draw(st.integers(1, max_leaves))
    return random_tree(n, leaves, random.Random(seed)), n


@settings(max_examples=300, deadline=None)
@given(small_trees())
def test_packed_equals_row_by_row(case):
    tree, n = case
    assert ctt_error(tree, n) == naive_ctt_error(tree, n)


@settings(max_examples=60, deadline=None)
@given(small_trees(max_n=7, max_leaves=8))
def test_recursive_row_evaluator_agrees(case):
    tree, n = case
    assert naive_ctt_error(tree, n, recursive=True) == ctt_error(tree, n)


@settings(max_examples=300, deadline=None)
@given(small_trees())
def test_generalisation_error_is_ctt_over_rows(case):
    tree, n = case
    assert exact_generalisation_error(tree, n).value == Fraction(ctt_error(tree, n), 2**n)


def test_generalisation_error_examples():
    n = 10
    for a in (1, 4, 10):
        g = exact_generalisation_error(conjunction(range(1, a + 1)), n)
        assert g.value == Fraction(2 ** (n - a) - 1, 2**n)
    g = exact_generalisation_error(parse("(or x1 x1)"), 4)
    assert g.value == Fraction(7, 16) == Fraction(naive_ctt_error(parse("(or x1 x1)"), 4), 16)
    assert exact_generalisation_error(conjunction(range(1, 5)), 4).value == 0
    with pytest.raises(ValueError):
        exact_generalisation_error(None, 4)


def test_on_set_count_cap_and_fallback():
    wide = conjunction(range(1, 41))
    assert on_set_count(wide, d_max=40) == (1, 40)
    with pytest.raises(TooManyVariables):
        exact_generalisation_error(wide, 50)
    est = generalisation_error(parse("(or x1 (and x2 x3))"), 50, random.Random(0), d_max=2,
                               samples=200_000)
    assert est.is_estimate
    assert abs(est.approx - 5 / 8) < 0.01


def test_sample_rows_single_bit_is_fair():
    rng = random.Random(42)
    draws = 100_000
    ones = sum(sample_rows(1, 1, rng).row(0) for _ in range(draws))
    sigma = math.sqrt(draws * 0.25)
    assert abs(ones - draws / 2) <= 3 * sigma


def test_sample_rows_bit_density():
    rng = random.Random(43)
    sample = sample_rows(50, 2000, rng)
    mean_ones = sum(bin(r).count("1") for r in sample.rows()) / 2000
    assert abs(mean_ones - 25) < 4 * math.sqrt(12.5 / 2000)
    with pytest.raises(ValueError):
        sample_rows(5, 0, rng)


def test_sampled_error_matches_rowwise_oracle():
    rng = random.Random(44)
    for _ in range(50):
        n = rng.randint(1, 12)
        tree = random_tree(n, rng.randint(1, 10), rng)
        sample = sample_rows(n, rng.randint(1, 300), rng)
        f = compile_tree(tree)
        everything = 2**n - 1
        expected = sum(f(r) != (r == everything) for r in sample.rows())
        assert sampled_error(tree, sample) == expected


def test_sampled_error_trivial_cases():
    rng = random.Random(45)
    sample = sample_rows(6, 100, rng)
    assert sampled_error(conjunction(range(1, 7)), sample) == 0
    assert sampled_error(None, sample) == 100


def test_sampled_error_mean_is_s_times_generalisation_error():
    rng = random.Random(46)
    n, s = 50, 2**13
    tree = conjunction(range(1, 6))
    expected = s * (2**45 - 1) / 2**50
    trials = 400
    mean = sum(sampled_error(tree, sample_rows(n, s, rng)) for _ in range(trials)) / trials
    assert abs(mean - expected) < 4 * math.sqrt(expected / trials)


def test_sampled_error_concentration_small_n():
    rng = random.Random(47)
    n = 12
    s = round(n**2 * math.log2(n) ** 2)
    slack = 4 * math.log2(n)
    for tree in (conjunction(range(1, 4)), parse("(and x1 (or x2 (and x3 x4)))"),
                 conjunction(range(1, 11))):
        F = exact_generalisation_error(tree, n).approx
        bad = sum(abs(F * s - sampled_error(tree, sample_rows(n, s, rng))) > max(slack, F * s)
                  for _ in range(10_000))
        assert bad / 10_000 < 0.01


def _on_set(tree, d):
    f = compile_tree(tree)
    return {r for r in range(2**d) if f(r)}


def test_sampled_error_monotone_in_on_set():
    rng = random.Random(48)
    d = 5
    pairs = 0
    while pairs < 40:
        a = random_tree(d, rng.randint(1, 6), rng)
        b = random_tree(d, rng.randint(1, 6), rng)
        sa, sb = _on_set(a, d), _on_set(b, d)
        if not sa < sb:
            continue
        pairs += 1
        for _ in range(20):
            sample = sample_rows(d, 64, rng)
            assert sampled_error(b, sample) >= sampled_error(a, sample)


def test_estimate_flagged():
    g = estimate_generalisation_error(Leaf(1), 3, random.Random(0), samples=1000)
    assert g.is_estimate and 0 <= g.value <= 1
