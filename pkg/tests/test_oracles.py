from fractions import Fraction
from itertools import product

import pytest

from creaturekit import hall, oracles
from creaturekit.core import Family, HSpec
from creaturekit.creatures import explicit_creature, pos
from creaturekit.errors import CapExceeded
from creaturekit.measured import MeasuredTree, mu_F

from test_hall import AGREE_01, DISJOINT_23, H8, fam

HALF = [(1, 2), (1, 2)]  # one weight row: s_0 = s_1 = 1/2


@pytest.mark.parametrize(
    "d, expected",
    [
        (fam({0: 0, 1: 0, 2: 0}), (4, 4, 4)),
        (AGREE_01, (2, 2, 3)),
        (DISJOINT_23, (3, 3, 3)),
    ],
)
def test_hall_oracles_on_reference_families(d, expected):
    got = (oracles.hn_bruteforce(d), oracles.hn_plus_bruteforce(d), oracles.HN_bruteforce(d))
    assert got == expected
    assert got == (hall.hn(d), hall.hn_plus(d), hall.HN(d)[0])


def test_literal_and_choice_routes_of_HN_oracle_agree():
    for d in (AGREE_01, DISJOINT_23, fam({0: 0, 1: 0}, {1: 1, 2: 0})):
        assert oracles.HN_bruteforce(d, literal_limit=10**6) == oracles.HN_bruteforce(d, literal_limit=0)


def test_oracle_cap():
    with pytest.raises(CapExceeded):
        oracles.HN_bruteforce(fam({i: 0 for i in range(7)}, {i: 1 for i in range(7)}))


class TestFronts:
    def test_full_tree(self):
        t = MeasuredTree.full(HSpec((2, 2)), 2, [HALF] * 2)
        assert oracles.mu_F_fronts(t) == 1

    def test_pruned_binary_tree(self):
        t = MeasuredTree.from_leaves(HSpec((2, 2)), 2, [HALF] * 2, [(0, 0), (0, 1), (1, 0)])
        assert len(list(oracles.fronts(t))) == oracles.count_fronts(t) == 5
        assert oracles.mu_F_fronts(t) == Fraction(3, 4) == mu_F(t)

    def test_single_branch(self):
        t = MeasuredTree.from_leaves(HSpec((2, 2, 2)), 3, [HALF] * 3, [(0, 1, 0)])
        assert oracles.mu_F_fronts(t) == Fraction(1, 8)

    def test_depth_cap(self):
        t = MeasuredTree.full(HSpec((2,) * 5), 5, [HALF] * 5)
        with pytest.raises(CapExceeded):
            oracles.mu_F_fronts(t)


class TestPos:
    H = HSpec((2, 2))

    def full_at(self, hspec, lvl):
        pairs = [(v[:lvl], v) for v in hspec.segments(0, lvl + 1)]
        return explicit_creature(hspec, lvl, lvl + 1, pairs)

    def test_full_creature(self):
        t = self.full_at(self.H, 1)
        assert oracles.pos_bruteforce((0,), [t]) == {(0, 0), (0, 1)} == pos((0,), [t])

    def test_forbid_one(self):
        pairs = [((u,), (u, 0)) for u in range(2)]
        t = explicit_creature(self.H, 1, 2, pairs)
        assert oracles.pos_bruteforce((0,), [t]) == {(0, 0)} == pos((0,), [t])

    def test_chained_full_creatures(self):
        H = HSpec((2, 2, 2))
        ts = [self.full_at(H, 1), self.full_at(H, 2)]
        expected = {(0,) + tail for tail in product(range(2), repeat=2)}
        assert oracles.pos_bruteforce((0,), ts) == expected == pos((0,), ts)
