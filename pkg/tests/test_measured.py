import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from creaturekit.core import HSpec
from creaturekit.errors import InvalidInput, UnsupportedFunctional
from creaturekit.measured import (
    MeasuredTree,
    check_bonferroni,
    check_compatibility,
    check_subadditive,
    dominated_by_dp,
    is_semi_measure,
    mu_F,
    mu_front,
    mu_table,
    tree_intersect,
    tree_union,
)
from creaturekit.oracles import mu_F_fronts

H22 = HSpec((2, 2))
HALF = [(1, 2), (1, 2)]
FULL = MeasuredTree.full(H22, 2, [HALF] * 2)
PRUNED = MeasuredTree.from_leaves(H22, 2, [HALF] * 2, [(0, 0), (0, 1), (1, 0)])


class TestMuFront:
    def test_leaves_of_full_tree(self):
        assert mu_front(FULL, FULL.leaves) == 1

    def test_leaves_of_pruned_tree(self):
        assert mu_front(PRUNED, PRUNED.leaves) == Fraction(3, 4)

    def test_root(self):
        assert mu_front(PRUNED, [()]) == 1

    def test_invalid_front(self):
        with pytest.raises(InvalidInput):
            mu_front(FULL, [(0,), (0, 0), (1,)])


class TestMuF:
    def test_full_tree(self):
        assert mu_F(MeasuredTree.full(HSpec((3, 3)), 2, [[(1, 5), (2, 5), (2, 5)]] * 2)) == 1

    def test_pruned(self):
        assert mu_F(PRUNED) == Fraction(3, 4)

    @pytest.mark.parametrize("depth", [1, 2, 3, 4])
    def test_single_branch(self, depth):
        t = MeasuredTree.from_leaves(HSpec((2,) * depth), depth, [HALF] * depth, [(1,) * depth])
        assert mu_F(t) == Fraction(1, 2**depth)


class TestSemiMeasure:
    def test_zero(self):
        assert is_semi_measure(PRUNED, {eta: 0 for eta in PRUNED.nodes})

    def test_dp_values_are_a_measure(self):
        dp = mu_table(PRUNED)
        assert is_semi_measure(PRUNED, dp)
        for eta in PRUNED.nodes:
            kids = PRUNED.children(eta)
            if kids:
                assert dp[eta] == sum(PRUNED.weight(c) * dp[c] for c in kids)

    def test_root_too_large(self):
        mu = dict(mu_table(PRUNED))
        mu[()] = 1
        assert not is_semi_measure(PRUNED, mu)

    def test_missing_node(self):
        with pytest.raises(InvalidInput):
            is_semi_measure(PRUNED, {(): 0})


class TestSetOps:
    def test_self_intersection(self):
        assert tree_intersect(PRUNED, PRUNED) == PRUNED

    def test_disjoint_intersection_is_empty(self):
        a = FULL.with_leaves([(0, 0)])
        b = FULL.with_leaves([(1, 1)])
        empty = tree_intersect(a, b)
        assert empty.is_empty and mu_F(empty) == 0

    def test_union_of_two_branches(self):
        a, b = FULL.with_leaves([(0, 0)]), FULL.with_leaves([(1, 1)])
        assert mu_F(tree_union(a, b)) == Fraction(1, 2)

    def test_weight_mismatch(self):
        other = MeasuredTree.full(H22, 2, [[(1, 3), (2, 3)]] * 2)
        with pytest.raises(InvalidInput):
            tree_union(FULL, other)


class TestLaws:
    def test_disjoint_union_is_additive(self):
        rep = check_subadditive([FULL.with_leaves([(0, 0)]), FULL.with_leaves([(1, 1)])])
        assert rep["ok"] and rep["disjoint"] and rep["equality"]

    def test_bonferroni(self):
        assert check_bonferroni([PRUNED, FULL.with_leaves([(0, 0), (1, 1)])])["ok"]

    def test_compatibility(self):
        rep = check_compatibility([PRUNED, FULL.with_leaves([(0, 1), (1, 1)])])
        assert rep["premise"] and rep["pair"] == [0, 1]


class TestJson:
    def test_round_trip(self):
        obj = PRUNED.to_json()
        again = MeasuredTree.from_json(json.loads(json.dumps(obj)))
        assert again == PRUNED

    def test_ultrafilter_rejected(self):
        obj = dict(PRUNED.to_json(), ultrafilter={"dom": [0]})
        with pytest.raises(UnsupportedFunctional):
            MeasuredTree.from_json(obj)

    def test_weights_must_sum_to_one(self):
        with pytest.raises(InvalidInput):
            MeasuredTree.full(H22, 2, [[(1, 2), (1, 3)]] * 2)

    def test_float_mode(self):
        obj = dict(PRUNED.to_json(), float=True)
        assert mu_F(MeasuredTree.from_json(obj)) == pytest.approx(0.75)


# -- properties ------------------------------------------------------------------


def random_weights(rng, sizes):
    rows = []
    for s in sizes:
        cuts = sorted(rng.sample(range(1, 24), s - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [24])]
        rows.append([(p, 24) for p in parts])
    return rows


def random_tree(rng, sizes, keep=0.6):
    hspec = HSpec(tuple(sizes))
    leaves = [v for v in hspec.segments(0, len(sizes)) if rng.random() < keep]
    if not leaves:
        leaves = [tuple(0 for _ in sizes)]
    return MeasuredTree.from_leaves(hspec, len(sizes), random_weights(rng, sizes), leaves)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.lists(st.integers(2, 3), min_size=1, max_size=3))
def test_dp_matches_front_oracle(seed, sizes):
    t = random_tree(random.Random(seed), sizes)
    assert mu_F(t) == mu_F_fronts(t)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_semi_measures_are_dominated(seed):
    rng = random.Random(seed)
    t = random_tree(rng, [2, 3, 2])
    dp = mu_table(t)
    mu = {eta: v * Fraction(rng.randint(0, 4), 4) for eta, v in dp.items()}
    if is_semi_measure(t, mu):
        assert dominated_by_dp(t, mu)
