import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from creaturekit.audit import (
    NormingSystem1,
    NormingSystem2,
    SournessSystem,
    audit_norming1,
    audit_norming2,
    audit_sourness,
    cmz_bound,
    cmz_ratio,
    ell_schedule,
    gen_edrf_sourness,
    g_check,
    heuristic_sourness_window,
)
from creaturekit.core import HSpec
from creaturekit.creatures import FiniteTreeCandidate, ftc_leq, um_sigma
from creaturekit.errors import InvalidInput

H444 = HSpec((4, 4, 4))
GOOD_N1 = {
    "sizes": [4, 4, 4],
    "K": [[0], [1, 2]],
    "g": {"": {"0": 3}, "0": {"1": 0, "2": 1}, "1": {"1": 2, "2": 3}},
}


class TestNorming1:
    def test_small_system_passes(self):
        rep = audit_norming1(NormingSystem1.from_json(GOOD_N1))
        assert rep.ok and rep.to_json()["status"] == "prefix-valid"

    def test_shared_index_fails_alpha(self):
        obj = dict(GOOD_N1, K=[[1], [1, 2]], g={"": {"1": 0}, "0": {"1": 0, "2": 1}, "1": {"1": 2, "2": 3}})
        rep = audit_norming1(NormingSystem1.from_json(obj))
        assert rep.first_failure["clause"] == "alpha"
        assert rep.first_failure["witness"]["shared"] == [1]

    def test_repeated_value_fails_delta(self):
        obj = dict(GOOD_N1, g={"": {"0": 3}, "0": {"1": 0, "2": 1}, "1": {"1": 0, "2": 3}})
        rep = audit_norming1(NormingSystem1.from_json(obj))
        assert not rep.clauses["delta"]["ok"]
        assert rep.clauses["delta"]["witness"] == {"index": 1, "rhos": ["0", "1"], "value": 0}
        assert rep.clauses["alpha"]["ok"] and rep.clauses["gamma"]["ok"]

    def test_missing_table_fails_beta(self):
        obj = dict(GOOD_N1, g={"": {"0": 3}, "0": {"1": 0, "2": 1}})
        assert audit_norming1(NormingSystem1.from_json(obj)).first_failure["clause"] == "beta"

    def test_value_out_of_range_fails_gamma(self):
        obj = dict(GOOD_N1, g={"": {"0": 4}, "0": {"1": 0, "2": 1}, "1": {"1": 2, "2": 3}})
        assert audit_norming1(NormingSystem1.from_json(obj)).first_failure["clause"] == "gamma"

    def test_index_below_level_fails_alpha(self):
        obj = dict(GOOD_N1, K=[[1], [0, 2]])
        assert not audit_norming1(NormingSystem1.from_json(obj)).clauses["alpha"]["ok"]

    def test_round_trip(self):
        ns = NormingSystem1.from_json(GOOD_N1)
        assert NormingSystem1.from_json(ns.to_json()) == ns

    @pytest.mark.parametrize("bad", [{}, {"sizes": [2], "K": "x", "g": {}}, dict(GOOD_N1, g={"2": {}})])
    def test_malformed(self, bad):
        with pytest.raises(InvalidInput):
            NormingSystem1.from_json(bad)


class TestNorming2:
    def test_pass(self):
        ns = NormingSystem2.from_json({"U": {"": [[0, 1], [2]], "0": [[3]], "1": [[4, 5]]}})
        assert audit_norming2(ns).ok

    def test_overlap_fails_alpha(self):
        ns = NormingSystem2.from_json({"U": {"": [[0, 1]], "0": [[1, 3]]}})
        w = audit_norming2(ns).first_failure
        assert w["clause"] == "alpha" and w["witness"]["shared"] == [1]

    def test_small_index_fails_beta(self):
        ns = NormingSystem2.from_json({"U": {"01": [[1, 5]]}})
        assert audit_norming2(ns).first_failure["clause"] == "beta"


class TestSourness:
    def test_schedule(self):
        assert ell_schedule(4) == [0, 2, 6, 22, 278]

    def test_small_generator(self):
        ss = gen_edrf_sourness(1, HSpec((4, 4)))
        assert ss.ell == (0, 2)
        assert audit_sourness(ss).ok

    def test_alphabet_too_small(self):
        with pytest.raises(InvalidInput):
            gen_edrf_sourness(1, HSpec((2, 2)))

    def test_exact_power_is_not_enough(self):
        # 2 values on block 0 plus one letter left free
        with pytest.raises(InvalidInput):
            gen_edrf_sourness(2, HSpec((3, 3, 4, 4, 4, 4)))
        assert audit_sourness(gen_edrf_sourness(2, HSpec((3, 3, 5, 5, 5, 5)))).ok

    def test_window_too_short(self):
        with pytest.raises(InvalidInput):
            gen_edrf_sourness(2, HSpec((8,) * 5))

    @pytest.mark.parametrize("k_max", [0, 1, 2, 3, 4])
    def test_generator_passes_audit(self, k_max):
        ell = ell_schedule(k_max)
        sizes = [2 ** (k + 1) + 1 for k in range(k_max) for _ in range(ell[k], ell[k + 1])]
        ss = gen_edrf_sourness(k_max, HSpec(tuple(sizes) or (2,)))
        rep = audit_sourness(ss)
        assert rep.ok, rep.first_failure
        assert SournessSystem.from_json(ss.to_json()) == ss

    def test_overlap_has_gamma_witness(self):
        ss = gen_edrf_sourness(1, HSpec((4, 4))).to_json()
        ss["g"]["1"] = ss["g"]["0"]
        rep = audit_sourness(SournessSystem.from_json(ss))
        assert rep.first_failure["clause"] == "gamma"
        assert rep.first_failure["witness"]["shared"] == [0]

    def test_exhausting_values_fail_gamma(self):
        obj = {"sizes": [2], "ell": [0, 1], "g": {"": [], "0": [[0]], "1": [[1]]}}
        w = audit_sourness(SournessSystem.from_json(obj)).first_failure
        assert w["clause"] == "gamma" and w["witness"]["problem"] == "values exhaust H(n)"

    def test_incoherent_fails_beta(self):
        obj = gen_edrf_sourness(2, HSpec((3, 3, 5, 5, 5, 5))).to_json()
        obj["g"]["10"][0] = [2]
        assert not audit_sourness(SournessSystem.from_json(obj)).clauses["beta"]["ok"]

    def test_heuristic_is_labelled(self):
        ss = gen_edrf_sourness(1, HSpec((4, 4)))
        out = heuristic_sourness_window(ss, 0, {0: [3], 1: [0, 1]})
        assert out["authoritative"] is False
        assert out["blocks"] == [{"k": 0, "rhos_missing_pos": 2, "levels_pos_covered": []}]
        out = heuristic_sourness_window(ss, 0, {0: [2, 3], 1: [3]})
        assert out["blocks"] == [{"k": 0, "rhos_missing_pos": 0, "levels_pos_covered": [0]}]


class TestFailingReportsHaveWitnesses:
    def test_every_failed_clause_has_a_witness(self):
        rng = random.Random(5)
        for _ in range(200):
            obj = gen_edrf_sourness(2, HSpec((3, 3, 5, 5, 5, 5))).to_json()
            key = rng.choice(sorted(k for k in obj["g"] if k))
            seq = obj["g"][key]
            seq[rng.randrange(len(seq))] = [rng.randrange(5)]
            rep = audit_sourness(SournessSystem.from_json(obj)).to_json()
            for clause in rep["clauses"].values():
                assert clause["ok"] or clause["witness"] is not None


# -- universality-parameter checks ------------------------------------------------

H2 = HSpec((2, 2, 2, 2))


def binary_tree(leaves, lev):
    return FiniteTreeCandidate.um(H2, {tuple(l[:n]) for l in leaves for n in range(lev + 1)}, lev)


TWO_OF_EIGHT = binary_tree([(0, 0, 0), (1, 1, 1)], 3)


class TestGCheck:
    def test_cmz_true(self):
        assert g_check("CMZ", TWO_OF_EIGHT, H2, 0, 3, {1: 0, 2: 0})
        assert cmz_ratio(TWO_OF_EIGHT, H2, 3) == Fraction(1, 4)
        assert cmz_bound({1: 0, 2: 0}) == Fraction(13, 36)

    def test_cmz_false(self):
        assert not g_check("CMZ", TWO_OF_EIGHT, H2, 0, 3, {2: 0})

    def test_um_full_subtree_is_false(self):
        full_left = [(0, a, b) for a in (0, 1) for b in (0, 1)] + [(1, 0, 0)]
        fc = binary_tree(full_left, 3)
        assert not g_check("UM", fc, H2, 1, 3, {})
        assert g_check("UM", fc, H2, 0, 3, {})

    def test_shape_violation(self):
        with pytest.raises(InvalidInput):
            g_check("CMZ", TWO_OF_EIGHT, H2, 2, 1, {})
        with pytest.raises(InvalidInput):
            g_check("CMZ", TWO_OF_EIGHT, H2, 1, 2, {3: 0})
        with pytest.raises(InvalidInput):
            g_check("ZZ", TWO_OF_EIGHT, H2, 0, 3, {})


def random_candidate(rng, lev, keep=0.7):
    leaves = [tuple(rng.randrange(2) for _ in range(lev)) for _ in range(rng.randint(1, 2**lev))]
    leaves = [l for l in leaves if rng.random() < keep] or leaves[:1]
    return binary_tree(leaves, lev)


def thinned(rng, fc):
    """A ≤-larger candidate: a non-empty subset of the branches, maybe one level deeper."""
    top = fc.level(fc.lev)
    keep = rng.sample(top, rng.randint(1, len(top)))
    if fc.lev < H2.length and rng.random() < 0.5:
        keep = [l + (a,) for l in keep for a in (0, 1) if rng.random() < 0.6] or [keep[0] + (0,)]
        return binary_tree(keep, fc.lev + 1)
    return binary_tree(keep, fc.lev)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_cmz_monotone(seed):
    rng = random.Random(seed)
    lev = rng.randint(1, 4)
    fc = random_candidate(rng, lev)
    n_up = rng.randint(0, lev)
    n_dn = rng.randint(0, n_up)
    r = {i: rng.randrange(3) for i in range(n_dn, n_up + 1) if rng.random() < 0.5}
    if not g_check("CMZ", fc, H2, n_dn, n_up, r):
        return
    more = {**r, **{i: 0 for i in range(n_dn, n_up + 1) if rng.random() < 0.5}}
    assert g_check("CMZ", fc, H2, n_dn, n_up, more)
    assert g_check("CMZ", fc, H2, rng.randint(0, n_dn), rng.randint(n_up, lev), r)
    bigger = thinned(rng, fc)
    assert ftc_leq(fc, bigger, um_sigma)
    assert g_check("CMZ", bigger, H2, n_dn, n_up, r)
