from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from markush_kit.bench import (
    ClassificationMetrics,
    Confusion,
    baseline_decide,
    baseline_skeleton_match,
    baseline_tanimoto_threshold,
    classify_dataset,
    load_assignments,
    load_dataset,
    score_classification,
    score_extraction,
)
from markush_kit.claims import ClaimBundle, ClaimFormatError
from markush_kit.errors import LengthMismatchError
from markush_kit.markush import SubstituentAssignment

PHENYL_ALKYL = {"claim_id": "c1", "markush": "[R1]c1ccccc1",
                "groups": {"R1": {"type": "Alkyl", "min_c": 1, "max_c": 6}}}
PHENYL_HALO = {"claim_id": "c2", "markush": "[R1]c1ccccc1",
               "groups": {"R1": {"type": "ElementClass", "class": "HALOGEN"}}}


class TestClassificationMetrics:
    def test_example(self):
        m = ClassificationMetrics.from_counts(tp=3, fp=1, fn=1, tn=5)
        assert m.precision == Fraction(3, 4)
        assert m.tpr == Fraction(3, 4)
        assert m.tnr == Fraction(5, 6)
        assert m.f1 == Fraction(3, 4)
        assert m.micro_f1 == Fraction(8, 10)
        assert m.balanced_accuracy == (Fraction(3, 4) + Fraction(5, 6)) / 2
        assert m.tpr_tnr_gap == Fraction(1, 12)

    def test_all_positive_predictor(self):
        m = score_classification([True] * 240, [True] * 104 + [False] * 136)
        assert m.tpr == 1 and m.tnr == 0 and m.balanced_accuracy == Fraction(1, 2)
        assert m.tpr_tnr_gap == 1

    def test_empty_class(self):
        m = score_classification([True, False], [True, True])
        assert m.tnr is None and m.balanced_accuracy is None and m.tpr_tnr_gap is None
        assert m.to_json()["tnr"] is None
        m = ClassificationMetrics.from_counts(0, 0, 0, 4)
        assert m.precision is None and m.f1 is None and m.tpr is None and m.micro_f1 == 1

    def test_errors(self):
        with pytest.raises(LengthMismatchError):
            score_classification([True], [True, False])
        with pytest.raises(ValueError):
            score_classification([], [])

    @pytest.mark.parametrize("counts,micro_f1,balanced,precision", [
        ((87, 21, 17, 115), 0.8417, 0.8411, 0.8056),
        ((22, 9, 82, 127), 0.6208, 0.5727, 0.7097),
    ])
    def test_published_rows(self, counts, micro_f1, balanced, precision):
        # reference confusion counts and their rates rounded to four places
        m = ClassificationMetrics.from_counts(*counts)
        assert m.confusion.tp + m.confusion.fn == 104 and m.confusion.fp + m.confusion.tn == 136
        assert round(float(m.micro_f1), 4) == micro_f1
        assert round(float(m.balanced_accuracy), 4) == balanced
        assert round(float(m.precision), 4) == precision

    def test_json(self):
        data = ClassificationMetrics.from_counts(3, 1, 1, 5).to_json()
        assert data["tnr"] == 0.8333 and data["confusion"] == {"tp": 3, "fp": 1, "fn": 1, "tn": 5}

    @given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=60))
    def test_identities(self, pairs):
        preds, labels = zip(*pairs)
        m = score_classification(preds, labels)
        c = m.confusion
        assert c.total == len(pairs)
        assert m.micro_f1 == Fraction(sum(p == y for p, y in pairs), len(pairs))
        if m.tpr is not None and m.tnr is not None:
            assert m.balanced_accuracy == (m.tpr + m.tnr) / 2
            assert m.tpr_tnr_gap == abs(m.tpr - m.tnr)
        if m.f1 is not None:
            assert m.f1 == Fraction(2 * c.tp, 2 * c.tp + c.fp + c.fn)
        flipped = score_classification([not p for p in preds], [not y for y in labels])
        assert flipped.tpr == m.tnr and flipped.tnr == m.tpr


class TestScoreExtraction:
    TRUTH = {"R1": "*C", "R2": "*CC"}

    def test_perfect(self):
        m = score_extraction([{"R2": "CC*", "R1": "*C"}], [self.TRUTH])
        assert (m.accuracy, m.validity, m.avg_tanimoto) == (1.0, 1.0, 1.0)
        assert m.avg_levenshtein > 0

    def test_identical_text(self):
        m = score_extraction([SubstituentAssignment(self.TRUTH)], [self.TRUTH])
        assert (m.accuracy, m.validity, m.avg_tanimoto, m.avg_levenshtein) == (1.0, 1.0, 1.0, 0.0)

    def test_validity(self):
        m = score_extraction([None, self.TRUTH], [self.TRUTH, self.TRUTH])
        assert m.validity == 0.5 and m.accuracy == 0.5
        # "{}" keeps the braces, so the distance is the text length minus two
        assert m.avg_levenshtein == (len(json.dumps(self.TRUTH)) - 2) / 2

    def test_invalid_fragment_and_missing_label(self):
        m = score_extraction([{"R1": "*C", "R2": "C(("}, {"R1": "*C"}], [self.TRUTH, self.TRUTH])
        assert m.validity == 0.0 and m.accuracy == 0.0
        assert m.avg_tanimoto == pytest.approx(0.5)

    def test_half_right(self):
        m = score_extraction([{"R1": "*C", "R2": "*Br"}], [self.TRUTH])
        assert m.validity == 1.0 and m.accuracy == 0.0 and m.avg_tanimoto == 0.5

    def test_accuracy_half(self):
        m = score_extraction([self.TRUTH, {"R1": "*Cl", "R2": "*F"}], [self.TRUTH, self.TRUTH])
        assert m.accuracy == 0.5 and m.avg_tanimoto == 0.5

    def test_hydrogen(self):
        m = score_extraction([{"R1": "[H]"}], [{"R1": "[H]"}])
        assert m.accuracy == 1.0 and m.avg_tanimoto == 1.0

    def test_errors(self):
        with pytest.raises(LengthMismatchError):
            score_extraction([None], [])
        with pytest.raises(ValueError):
            score_extraction([], [])


class TestBaselines:
    BUNDLES = [[ClaimBundle.from_json(PHENYL_ALKYL)]] * 3
    MOLS = ["Cc1ccccc1", "CCCCCCCc1ccccc1", "C1CCCCC1"]

    def test_skeleton_match(self):
        assert baseline_skeleton_match(self.MOLS, self.BUNDLES) == [True, True, False]

    def test_decide(self):
        assert baseline_decide(self.MOLS, self.BUNDLES) == [True, False, False]

    def test_tanimoto(self):
        assert baseline_tanimoto_threshold(["c1ccccc1"], [[ClaimBundle.from_json(PHENYL_ALKYL)]], 0.0) == [True]
        assert baseline_tanimoto_threshold(self.MOLS, self.BUNDLES, 1.0) == [False] * 3
        assert baseline_tanimoto_threshold(["C"], [[]]) == [False]
        with pytest.raises(ValueError):
            baseline_tanimoto_threshold(self.MOLS, self.BUNDLES, 1.5)

    def test_length_mismatch(self):
        for fn in (baseline_skeleton_match, baseline_decide, baseline_tanimoto_threshold):
            with pytest.raises(LengthMismatchError):
                fn(self.MOLS, self.BUNDLES[:1])


def _write_dataset(tmp_path, records):
    claims = tmp_path / "claims"
    claims.mkdir()
    (claims / "alkyl.json").write_text(json.dumps(PHENYL_ALKYL))
    (claims / "halo.json").write_text(json.dumps(PHENYL_HALO))
    path = tmp_path / "data.jsonl"
    path.write_text("".join(json.dumps(r) + "\n" for r in records))
    return path


class TestDatasets:
    RECORDS = [
        {"claims": ["claims/alkyl.json"], "molecule": "Cc1ccccc1", "label": True},
        {"claims": ["claims/alkyl.json", "claims/halo.json"], "molecule": "Clc1ccccc1", "label": True},
        {"claims": ["claims/halo.json"], "molecule": "Oc1ccccc1", "label": False},
        {"claims": ["claims/alkyl.json"], "molecule": "CCCCCCCc1ccccc1", "label": False},
    ]

    def test_load(self, tmp_path):
        records, bundles = load_dataset(_write_dataset(tmp_path, self.RECORDS))
        assert [len(b) for b in bundles] == [1, 2, 1, 1]
        assert bundles[0][0] is bundles[1][0]
        assert [r.label for r in records] == [True, True, False, False]

    def test_classify(self, tmp_path):
        path = _write_dataset(tmp_path, self.RECORDS)
        m = classify_dataset(path, "decide")
        assert m.confusion == Confusion(2, 0, 0, 2)
        m = classify_dataset(path, "skeleton")
        assert m.confusion == Confusion(2, 2, 0, 0)
        with pytest.raises(ValueError):
            classify_dataset(path, "oracle")

    @pytest.mark.parametrize("record", [
        {"claims": [], "molecule": "C", "label": True},
        {"claims": ["claims/alkyl.json"], "molecule": "C((", "label": True},
        {"claims": ["claims/alkyl.json"], "label": True},
    ])
    def test_bad_records(self, tmp_path, record):
        with pytest.raises(ValueError):
            load_dataset(_write_dataset(tmp_path, [record]))

    def test_bad_claim_file(self, tmp_path):
        path = _write_dataset(tmp_path, [{"claims": ["claims/alkyl.json"], "molecule": "C", "label": True}])
        (tmp_path / "claims" / "alkyl.json").write_text('{"claim_id": "x", "markush": "CC"}')
        with pytest.raises(ClaimFormatError):
            load_dataset(path)

    def test_load_assignments(self, tmp_path):
        path = tmp_path / "a.jsonl"
        path.write_text('{"R1": "*C"}\nnull\n\n{"markush": "[R1]C", "assignment": {"R1": "*O"}}\n')
        assert load_assignments(path) == [{"R1": "*C"}, None, {"R1": "*O"}]
        path.write_text("[1, 2]\n")
        with pytest.raises(ValueError):
            load_assignments(path)
        path.write_text("{bad\n")
        with pytest.raises(ValueError):
            load_assignments(path)
