import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rlsgp.fitness import ctt_error
from rlsgp.tree import Leaf, leaf_count, or_count, parse, random_tree, serialize
from rlsgp.variation import (Deletion, NeighborhoodTooLarge, Op, delete_at,
                             enumerate_neighbors, hvl_prime)

VARIANTS = list(Deletion)


class Scripted:
    """Stands in for random.Random, replaying fixed randrange results."""

    def __init__(self, values):
        self.values = list(values)

    def randrange(self, *args):
        return self.values.pop(0)


def test_empty_parent_yields_drawn_leaf():
    # op=DEL, l=x7, f=OR: the empty tree still becomes the drawn leaf
    out = hvl_prime(None, Deletion.SUBTREE, 10, Scripted([1, 6, 1]))
    assert out.offspring == Leaf(7)
    assert out.inserted_variable == 7


@pytest.mark.parametrize("variant", VARIANTS)
def test_deleting_single_leaf_gives_empty_tree(variant):
    out = hvl_prime(Leaf(1), variant, 3, Scripted([1, 0, 0, 0]))
    assert out.op is Op.DEL
    assert out.offspring is None
    assert out.leaves_removed == 1


def test_subtree_deletion_of_or_node():
    parent = parse("(and x1 (or x2 x3))")
    # pre-order index 2 is the OR node
    out = hvl_prime(parent, Deletion.SUBTREE, 3, Scripted([1, 0, 0, 2]))
    assert out.offspring == Leaf(1)
    assert out.leaves_removed == 2
    hits = [o for o, _ in enumerate_neighbors(parent, Deletion.SUBTREE, 3)
            if o.op is Op.DEL and o.offspring == Leaf(1)]
    assert [o.leaves_removed for o in hits] == [2]


def test_insertion_and_substitution_by_script():
    parent = parse("(and x1 x2)")
    out = hvl_prime(parent, Deletion.LEAF, 5, Scripted([0, 3, 1, 1, 1]))
    assert serialize(out.offspring) == "(and (or x4 x1) x2)"
    out = hvl_prime(parent, Deletion.LEAF, 5, Scripted([2, 4, 0, 1]))
    assert serialize(out.offspring) == "(and x1 x5)"
    # identity substitution hands back the parent object
    out = hvl_prime(parent, Deletion.LEAF, 5, Scripted([2, 1, 0, 1]))
    assert out.offspring is parent


def test_single_leaf_neighborhood():
    nbrs = enumerate_neighbors(Leaf(1), Deletion.LEAF, 2)
    mass = Counter()
    for out, p in nbrs:
        mass[(out.op, serialize(out.offspring))] += p
    assert mass[(Op.DEL, "()")] == pytest.approx(1 / 3)
    assert mass[(Op.SUB, "x1")] == pytest.approx(1 / 6)
    assert mass[(Op.SUB, "x2")] == pytest.approx(1 / 6)
    ins = [(o, p) for o, p in nbrs if o.op is Op.INS]
    assert len(ins) == 8
    assert all(p == pytest.approx(1 / 24) for _, p in ins)


def test_probability_mass_is_one():
    rng = random.Random(11)
    for _ in range(100):
        n = rng.randint(1, 6)
        t = random_tree(n, rng.randint(1, 8), rng)
        for variant in VARIANTS:
            total = sum(p for _, p in enumerate_neighbors(t, variant, n))
            assert total == pytest.approx(1, abs=1e-9)


def test_neighborhood_cap():
    t = random_tree(50, 40, random.Random(0))
    with pytest.raises(NeighborhoodTooLarge):
        enumerate_neighbors(t, Deletion.SUBTREE, 50, cap=1000)


def test_or_of_duplicates_has_no_improving_neighbor():
    t = parse("(or (and x3 x2) (and x2 x3))")
    err = ctt_error(t, 4)
    for out, _ in enumerate_neighbors(t, Deletion.LEAF, 4):
        if leaf_count(out.offspring) <= 4:
            assert ctt_error(out.offspring, 4) >= err


@pytest.mark.parametrize("variant", VARIANTS)
def test_monte_carlo_matches_enumeration(variant):
    parent = parse("(or (and x1 x2) x3)")
    n = 3
    exact = Counter()
    for out, p in enumerate_neighbors(parent, variant, n):
        exact[serialize(out.offspring)] += p
    rng = random.Random(5)
    draws = 1_000_000
    seen = Counter(serialize(hvl_prime(parent, variant, n, rng).offspring) for _ in range(draws))
    tv = 0.5 * sum(abs(seen[k] / draws - exact[k]) for k in set(seen) | set(exact))
    assert tv < 0.02
    assert set(seen) <= set(exact)


@st.composite
def parent_and_seed(draw):
    n = draw(st.integers(1, 10))
    seed = draw(st.integers(0, 2**32 - 1))
    leaves = draw(st.integers(1, 20))
    return random_tree(n, leaves, random.Random(seed)), n, seed


@settings(max_examples=500)
@given(parent_and_seed(), st.sampled_from(VARIANTS))
def test_leaf_count_changes_by_op(case, variant):
    parent, n, seed = case
    out = hvl_prime(parent, variant, n, random.Random(seed))
    before, after = leaf_count(parent), leaf_count(out.offspring)
    if out.op is Op.INS:
        assert after == before + 1
        assert out.inserted_function is not None
    elif out.op is Op.SUB:
        assert after == before
    else:
        assert after < before
        assert out.leaves_removed == before - after
        if variant is Deletion.LEAF:
            assert out.leaves_removed == 1


def _near_conjunctions(rng, n, limit, count):
    """Full trees: a conjunction with some leaves widened into OR branches."""
    out = []
    while len(out) < count:
        t = random_tree(n, limit, rng, or_probability=0.25)
        if or_count(t) > 0:
            out.append(t)
    return out


def test_full_trees_with_or_can_shed_leaves_under_subtree_deletion():
    rng = random.Random(2)
    for n, limit in ((4, 6), (5, 8), (6, 9)):
        for t in _near_conjunctions(rng, n, limit, 40):
            err = ctt_error(t, n)
            ok = any(out.op is Op.DEL and leaf_count(out.offspring) < limit
                     and ctt_error(out.offspring, n) <= err
                     for out, _ in enumerate_neighbors(t, Deletion.SUBTREE, n))
            assert ok, serialize(t)


def test_delete_root_is_empty():
    assert delete_at(parse("(and x1 x2)"), ()) is None
