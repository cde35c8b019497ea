import json
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from creaturekit.core import EMPTY, Family, HSpec, PartialFn, refines, restrict
from creaturekit.errors import InvalidInput

from conftest import all_partial_fns

H3 = HSpec((2, 2, 2))


def fam(*maps, hspec=H3):
    return Family.of(hspec, maps)


class TestHSpec:
    def test_sizes_below_two_rejected(self):
        with pytest.raises(InvalidInput):
            HSpec((2, 1))

    def test_empty_rejected(self):
        with pytest.raises(InvalidInput):
            HSpec(())

    def test_index_outside_window_fails_fast(self):
        with pytest.raises(InvalidInput):
            H3.check_index(3)

    def test_json_round_trip(self):
        assert HSpec.from_json(json.loads(json.dumps(H3.to_json()))) == H3


class TestPartialFn:
    def test_canonical_order(self):
        assert PartialFn.of({3: 0, 0: 1}).entries == ((0, 1), (3, 0))

    def test_empty_domain_rejected(self):
        with pytest.raises(InvalidInput):
            PartialFn(())

    def test_duplicate_index_rejected(self):
        with pytest.raises(InvalidInput):
            PartialFn(((0, 1), (0, 0)))

    def test_value_out_of_range(self):
        with pytest.raises(InvalidInput):
            Family.of(H3, [{0: 2}])

    @given(st.dictionaries(st.integers(0, 20), st.integers(0, 5), min_size=1))
    def test_serialization_is_idempotent(self, mapping):
        f = PartialFn.of(mapping)
        text = json.dumps(f.to_json())
        assert json.dumps(PartialFn.from_json(json.loads(text)).to_json()) == text


class TestRestrict:
    f = PartialFn.of({0: 1, 3: 0})

    def test_prefix(self):
        assert restrict(self.f, 0, 2) == PartialFn.of({0: 1})

    def test_gap_gives_empty_marker(self):
        assert restrict(self.f, 1, 3) is EMPTY

    def test_full_interval_is_identity(self):
        assert restrict(self.f, 0, 4) == self.f


class TestRefines:
    def test_reflexive_single(self):
        d = fam({0: 0, 1: 1})
        assert refines(d, d)

    def test_restriction_is_coarser(self):
        assert refines(fam({0: 0, 1: 1, 2: 0}), fam({0: 0, 1: 1}))

    def test_unrelated_domains(self):
        assert not refines(fam({0: 0}), fam({1: 0}))

    def test_mismatched_hspec(self):
        with pytest.raises(InvalidInput):
            refines(fam({0: 0}), fam({0: 0}, hspec=HSpec((2, 2))))

    def test_family_set_semantics(self):
        assert len(fam({0: 0}, {0: 0}, {1: 1})) == 2


def small_families():
    fns = all_partial_fns(HSpec((2, 2)))
    return [Family(c, HSpec((2, 2))) for r in (1, 2) for c in combinations(fns, r)]


def test_refines_is_a_preorder_exhaustively():
    fams = small_families()
    table = {(a, b): refines(a, b) for a in fams for b in fams}
    for a in fams:
        assert table[a, a]
    for a in fams:
        for b in fams:
            if not table[a, b]:
                continue
            for c in fams:
                if table[b, c]:
                    assert table[a, c]
