from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, strategies as st

from corpus import SMALL_FRAGMENTS, SMALL_SKELETONS
from markush_kit.claims import (
    Alkyl,
    Any_,
    AnyOf,
    ClaimBundle,
    ElementClass,
    GroupConstraint,
    HeavyAtomRange,
    HydrogenAllowed,
    Verdict,
    check_group,
    decide,
    decide_many,
    load_claim,
    predicate_from_json,
    render_text,
)
from markush_kit.errors import ClaimFormatError, MarkushKitError
from markush_kit.markush import HYDROGEN, MarkushStructure, SubstituentAssignment, attach
from markush_kit.molgraph import graphs_equal
from markush_kit.smiles import parse, parse_fragment


def bundle(claim_id: str, markush: str, groups: dict, **extra) -> ClaimBundle:
    return ClaimBundle.from_json({"claim_id": claim_id, "markush": markush, "groups": groups, **extra})


ALKYL_1_6 = {"R1": {"type": "Alkyl", "min_c": 1, "max_c": 6}}
PHENYL_ALKYL = bundle("c1", "[R1]c1ccccc1", ALKYL_1_6)


class TestCheckGroup:
    @pytest.mark.parametrize("predicate,value,expected", [
        (Any_(), HYDROGEN, (True, "ANY")),
        (Any_(), parse_fragment("*Br"), (True, "ANY")),
        (HydrogenAllowed(True, Alkyl(1, 2)), HYDROGEN, (True, "HYDROGEN_ALLOWED")),
        (HydrogenAllowed(False, Any_()), HYDROGEN, (False, "HYDROGEN_FORBIDDEN")),
        (HydrogenAllowed(False, Alkyl(1, 2)), parse_fragment("*CC"), (True, "ALKYL_IN_RANGE")),
        (AnyOf(("*C", "*Cl")), parse_fragment("Cl*"), (True, "IN_SET")),
        (AnyOf(("*C", "[H]")), HYDROGEN, (True, "IN_SET")),
        (AnyOf(("*C",)), HYDROGEN, (False, "NOT_IN_SET")),
        (AnyOf(("*C",)), parse_fragment("*CC"), (False, "NOT_IN_SET")),
        (ElementClass("HALOGEN"), parse_fragment("*Br"), (True, "ELEMENT_IN_CLASS")),
        (ElementClass("HALOGEN"), parse_fragment("*O"), (False, "ELEMENT_NOT_IN_CLASS")),
        (ElementClass("CHALCOGEN"), parse_fragment("*S"), (True, "ELEMENT_IN_CLASS")),
        (ElementClass("HALOGEN"), parse_fragment("*CCl"), (False, "NOT_SINGLE_ATOM")),
        (ElementClass("HALOGEN"), HYDROGEN, (False, "HYDROGEN_FORBIDDEN")),
        (HeavyAtomRange(2, 3), parse_fragment("*C"), (False, "TOO_FEW_HEAVY_ATOMS")),
        (HeavyAtomRange(2, 3), parse_fragment("*CCCC"), (False, "TOO_MANY_HEAVY_ATOMS")),
        (HeavyAtomRange(2, 3), parse_fragment("*OC"), (True, "HEAVY_ATOMS_IN_RANGE")),
        (Alkyl(1, 6), parse_fragment("*CC(C)C"), (True, "ALKYL_IN_RANGE")),
        (Alkyl(1, 6), parse_fragment("*CCCCCCC"), (False, "CHAIN_TOO_LONG")),
        (Alkyl(3, 6), parse_fragment("*CC"), (False, "CHAIN_TOO_SHORT")),
        (Alkyl(1, 6), parse_fragment("*CO"), (False, "NOT_ALL_CARBON")),
        (Alkyl(1, 6), parse_fragment("*C1CC1"), (False, "RING_PRESENT")),
        (Alkyl(1, 6), parse_fragment("*C=C"), (False, "UNSATURATED")),
        (Alkyl(1, 6), HYDROGEN, (False, "HYDROGEN_FORBIDDEN")),
    ])
    def test_reason_codes(self, predicate, value, expected):
        assert check_group(predicate, value) == expected
        assert check_group(GroupConstraint("R1", predicate), value) == expected

    def test_aromatic_ring_is_not_alkyl(self):
        assert check_group(Alkyl(1, 6), parse_fragment("*c1ccccc1")) == (False, "RING_PRESENT")


class TestPredicateJson:
    @pytest.mark.parametrize("predicate", [
        Any_(), AnyOf(("*C", "[H]")), ElementClass("CHALCOGEN"), Alkyl(2, 4), HeavyAtomRange(0, 3),
        HydrogenAllowed(True, Alkyl(1, 3)),
    ])
    def test_round_trip(self, predicate):
        assert predicate_from_json(json.loads(json.dumps(predicate.to_json()))) == predicate

    @pytest.mark.parametrize("obj", [
        {"type": "Alkyl", "min_c": 4, "max_c": 2},
        {"type": "Alkyl", "min_c": 0, "max_c": 2},
        {"type": "AnyOf", "fragments": []},
        {"type": "AnyOf", "fragments": ["CC"]},
        {"type": "HeavyAtomRange", "min": 3, "max": 1},
        {"type": "ElementClass", "class": "METAL"},
        {"type": "Unknown"},
        {"type": "Alkyl", "min_c": 1},
        {"type": "HydrogenAllowed", "allowed": True, "inner": {"type": "HydrogenAllowed", "allowed": True,
                                                               "inner": {"type": "Any"}}},
        ["not", "an", "object"],
        {},
    ])
    def test_bad_predicates(self, obj):
        with pytest.raises(ClaimFormatError):
            predicate_from_json(obj)


class TestClaimBundle:
    def test_missing_label(self):
        with pytest.raises(ClaimFormatError):
            bundle("x", "[R1]CC[R2]", ALKYL_1_6)

    def test_extra_label(self):
        with pytest.raises(ClaimFormatError):
            bundle("x", "[R1]CC", {**ALKYL_1_6, "R2": {"type": "Any"}})

    @pytest.mark.parametrize("obj", [
        {"markush": "[R1]C", "groups": {}},
        {"claim_id": "x", "markush": "CC", "groups": {}},
        {"claim_id": "x", "markush": "[R1]C", "groups": ["R1"]},
        {"claim_id": "x", "markush": "[R1]C", "groups": {"R1": {"type": "Any"}},
         "skeleton": {"heavy_atom_range": [5, 2]}},
        {"claim_id": "x", "markush": "[R1]C", "groups": {"R1": {"type": "Any"}},
         "skeleton": {"forbidden_substructures": ["C(("]}},
    ])
    def test_bad_bundles(self, obj):
        with pytest.raises(ClaimFormatError):
            ClaimBundle.from_json(obj)

    def test_json_round_trip(self, tmp_path):
        b = bundle("c7", "[R2]c1ccc([R1])cc1", {"R2": {"type": "Any"}, "R1": ALKYL_1_6["R1"]},
                   skeleton={"heavy_atom_range": [6, 20], "forbidden_substructures": ["C(=O)O"]},
                   embodiments=["Cc1ccccc1"])
        assert [c.label for c in b.group_constraints] == ["R1", "R2"]
        again = ClaimBundle.from_json(json.loads(json.dumps(b.to_json())))
        assert again.to_json() == b.to_json()
        path = tmp_path / "claim.json"
        path.write_text(json.dumps(b.to_json()))
        assert load_claim(path).to_json() == b.to_json()

    def test_load_claim_bad_json(self, tmp_path):
        path = tmp_path / "claim.json"
        path.write_text("{not json")
        with pytest.raises(ClaimFormatError):
            load_claim(path)


class TestDecide:
    def test_toluene_protected(self):
        r = decide(PHENYL_ALKYL, parse("Cc1ccccc1"))
        assert r.verdict is Verdict.PROTECTED and r.protected
        assert r.matched_claim == "c1"
        assert r.assignment_evidence.to_json() == {"R1": "*C"}
        assert [(v.label, v.passed, v.reason) for v in r.group_verdicts] == [("R1", True, "ALKYL_IN_RANGE")]

    def test_cyclohexane_not_protected(self):
        r = decide(PHENYL_ALKYL, parse("C1CCCCC1"))
        assert r.verdict is Verdict.NOT_PROTECTED
        assert not r.skeleton_evidence.matched and r.assignment_evidence is None

    def test_heptylbenzene_chain_too_long(self):
        r = decide(PHENYL_ALKYL, parse("CCCCCCCc1ccccc1"))
        assert r.verdict is Verdict.NOT_PROTECTED
        assert [(v.passed, v.reason) for v in r.group_verdicts] == [(False, "CHAIN_TOO_LONG")]
        assert r.rejected_assignments == 1

    def test_embodiment_hit(self):
        b = bundle("e", "[R1]c1ccccc1", {"R1": {"type": "AnyOf", "fragments": ["*Cl"]}}, embodiments=["c1ccccc1C"])
        r = decide(b, parse("Cc1ccccc1"))
        assert r.protected and r.embodiment_hit
        assert r.assignment_evidence is None

    def test_skeleton_checks(self):
        b = bundle("s", "[R1]c1ccccc1", {"R1": {"type": "Any"}},
                   skeleton={"heavy_atom_range": [7, 9], "forbidden_substructures": ["C(=O)O"]})
        assert decide(b, parse("Cc1ccccc1")).protected
        r = decide(b, parse("c1ccccc1"))
        assert not r.protected
        assert [c.passed for c in r.skeleton_checks] == [False, True]
        r = decide(b, parse("OC(=O)c1ccccc1"))
        assert [c.passed for c in r.skeleton_checks] == [True, False]

    def test_existential_over_readings(self):
        # the adjacent-group molecule has three readings; only one has R1 as hydrogen
        b = bundle("a", "[R1]CC[R2]", {"R1": {"type": "AnyOf", "fragments": ["[H]"]}, "R2": {"type": "Any"}})
        r = decide(b, parse("CCCC"))
        assert r.protected
        assert r.assignment_evidence.to_json()["R1"] == "[H]"
        assert r.rejected_assignments == 2 and r.skeleton_evidence.solution_count == 3

    def test_group_verdicts_exhaustive(self):
        b = bundle("g", "[R1]c1ccc([R2])cc1[R3]", {
            "R1": {"type": "Any"},
            "R2": {"type": "ElementClass", "class": "HALOGEN"},
            "R3": {"type": "HydrogenAllowed", "allowed": True, "inner": {"type": "Alkyl", "min_c": 1, "max_c": 2}},
        })
        r = decide(b, parse("Oc1ccc(Br)cc1"))
        assert [v.label for v in r.group_verdicts] == ["R1", "R2", "R3"]

    def test_soundness(self):
        mol = parse("CCc1ccc(Cl)cc1")
        b = bundle("z", "[R1]c1ccc([R2])cc1", {"R1": {"type": "Any"}, "R2": {"type": "Any"}})
        r = decide(b, mol)
        assert graphs_equal(attach(b.markush, r.assignment_evidence), mol)

    def test_report_deterministic(self):
        mol = parse("CCc1ccc(C)cc1")
        b = bundle("d", "[R1]c1ccc([R2])cc1", {"R1": ALKYL_1_6["R1"], "R2": {"type": "Any"}})
        first = decide(b, mol).dumps()
        assert all(decide(b, parse("Cc1ccc(CC)cc1")).dumps() == first for _ in range(5))
        assert json.loads(first)["verdict"] == "PROTECTED"


class TestDecideMany:
    FAIL = bundle("fail", "[R1]c1ccccc1", {"R1": {"type": "ElementClass", "class": "HALOGEN"}})
    PASS_A = bundle("pass-a", "[R1]c1ccccc1", ALKYL_1_6)
    PASS_B = bundle("pass-b", "[R1]c1ccccc1", {"R1": {"type": "Any"}})

    def test_second_claim_wins(self):
        r = decide_many([self.FAIL, self.PASS_A], parse("Cc1ccccc1"))
        assert r.protected and r.matched_claim == "pass-a"
        assert [p.claim_id for p in r.per_claim] == ["fail", "pass-a"]

    def test_empty(self):
        r = decide_many([], parse("Cc1ccccc1"))
        assert r.verdict is Verdict.NOT_PROTECTED and r.matched_claim is None

    def test_first_passing_wins(self):
        assert decide_many([self.PASS_B, self.PASS_A], parse("Cc1ccccc1")).matched_claim == "pass-b"

    def test_none_passing(self):
        r = decide_many([self.FAIL], parse("Cc1ccccc1"))
        assert not r.protected and len(r.per_claim) == 1


class TestRenderText:
    def test_section_order(self):
        text = render_text(decide(PHENYL_ALKYL, parse("CCCCCCCc1ccccc1")))
        keys = ["1. Skeleton analysis", "2. Substituents", "3. Requirement checks", "Verdict: NOT_PROTECTED"]
        positions = [text.index(k) for k in keys]
        assert positions == sorted(positions)
        assert "[FAIL] R1: CHAIN_TOO_LONG" in text
        assert "1 of 1 reading(s) failed the group requirements" in text

    def test_many(self):
        r = decide_many([TestDecideMany.FAIL, TestDecideMany.PASS_A], parse("Cc1ccccc1"))
        text = render_text(r)
        assert text.count("1. Skeleton analysis") == 2
        assert text.rstrip().endswith("Matched claim: pass-a")

    def test_empty(self):
        assert "Verdict: NOT_PROTECTED" in render_text(decide_many([], parse("C")))


def _random_predicate(rng: random.Random):
    kind = rng.randrange(4)
    if kind == 0:
        return AnyOf(tuple(rng.sample(SMALL_FRAGMENTS, rng.randint(1, 4))) + (("[H]",) if rng.random() < 0.5 else ()))
    if kind == 1:
        lo = rng.randint(1, 3)
        return HydrogenAllowed(rng.random() < 0.5, Alkyl(lo, lo + rng.randint(0, 2)))
    if kind == 2:
        lo = rng.randint(0, 3)
        return HydrogenAllowed(rng.random() < 0.5, HeavyAtomRange(lo, lo + rng.randint(0, 3)))
    return HydrogenAllowed(rng.random() < 0.5, ElementClass(rng.choice(["HALOGEN", "CHALCOGEN"])))


def _widen(p, rng: random.Random):
    if isinstance(p, AnyOf):
        return AnyOf(p.fragments + tuple(rng.sample(SMALL_FRAGMENTS, 2)))
    if isinstance(p, HydrogenAllowed):
        inner = p.inner
        if isinstance(inner, Alkyl):
            inner = Alkyl(max(1, inner.min_c - 1), inner.max_c + 2)
        elif isinstance(inner, HeavyAtomRange):
            inner = HeavyAtomRange(max(0, inner.min - 1), inner.max + 2)
        return HydrogenAllowed(p.allowed or rng.random() < 0.5, inner)
    return Any_()


class TestProperties:
    @given(st.integers(min_value=0, max_value=10**9))
    def test_widening_never_unprotects(self, seed):
        rng = random.Random(seed)
        markush = MarkushStructure.from_smiles(rng.choice(SMALL_SKELETONS))
        frs = [parse_fragment(f) for f in SMALL_FRAGMENTS] + [HYDROGEN]
        while True:
            try:
                mol = attach(markush, SubstituentAssignment({lb: rng.choice(frs) for lb in markush.labels}))
                break
            except MarkushKitError:
                continue
        preds = {lb: _random_predicate(rng) for lb in markush.labels}
        narrow = ClaimBundle("n", markush, tuple(GroupConstraint(lb, p) for lb, p in preds.items()))
        wide = ClaimBundle("w", markush, tuple(GroupConstraint(lb, _widen(p, rng)) for lb, p in preds.items()))
        if decide(narrow, mol).protected:
            assert decide(wide, mol).protected
        everything = ClaimBundle("a", markush, tuple(GroupConstraint(lb, Any_()) for lb in markush.labels))
        assert decide(everything, mol).protected

    @given(st.integers(min_value=0, max_value=10**9))
    def test_evidence_is_sound(self, seed):
        rng = random.Random(seed)
        markush = MarkushStructure.from_smiles(rng.choice(SMALL_SKELETONS))
        frs = [parse_fragment(f) for f in SMALL_FRAGMENTS] + [HYDROGEN]
        while True:
            try:
                mol = attach(markush, SubstituentAssignment({lb: rng.choice(frs) for lb in markush.labels}))
                break
            except MarkushKitError:
                continue
        b = ClaimBundle("a", markush, tuple(GroupConstraint(lb, Any_()) for lb in markush.labels))
        r = decide(b, mol)
        assert graphs_equal(attach(markush, r.assignment_evidence), mol)
        assert all(v.passed for v in r.group_verdicts)
