"""
Evaluation harnesses: infringement classification and substituent extraction.

All classification metrics are exact fractions computed from the confusion
counts; a rate whose denominator is zero is ``None`` rather than 0 so it
cannot silently distort the gap or the balanced accuracy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Literal, Mapping, Sequence, Union

from .chemsim import avg_assignment_tanimoto, levenshtein, morgan_fingerprint, tanimoto
from .claims import ClaimBundle, decide_many, load_claim
from .errors import LengthMismatchError, MarkushKitError
from .markush import HYDROGEN, Substituent, SubstituentAssignment, skeleton_matches, substituent_from_text
from .molgraph import MolGraph, graphs_equal, rlabel_number
from .smiles import parse

__all__ = [
    "Confusion",
    "ClassificationMetrics",
    "ExtractionMetrics",
    "BenchRecord",
    "score_classification",
    "score_extraction",
    "baseline_skeleton_match",
    "baseline_tanimoto_threshold",
    "baseline_decide",
    "load_dataset",
    "classify_dataset",
    "load_assignments",
]

Ratio = Union[Fraction, None]
Method = Literal["decide", "skeleton", "tanimoto"]


def _ratio(num: int, den: int) -> Ratio:
    return Fraction(num, den) if den else None


def _render(x: Ratio, digits: int) -> float | None:
    return None if x is None else round(float(x), digits)


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def to_json(self) -> dict[str, int]:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


@dataclass(frozen=True)
class ClassificationMetrics:
    """Exact metrics of a binary classifier, positive class = protected.

    ``f1`` is the positive-class F1. ``micro_f1`` pools both classes, which
    for single-label binary data equals plain accuracy.
    """

    confusion: Confusion

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int) -> ClassificationMetrics:
        if min(tp, fp, fn, tn) < 0:
            raise ValueError("confusion counts must be non-negative")
        return cls(Confusion(tp, fp, fn, tn))

    @property
    def precision(self) -> Ratio:
        c = self.confusion
        return _ratio(c.tp, c.tp + c.fp)

    @property
    def tpr(self) -> Ratio:
        c = self.confusion
        return _ratio(c.tp, c.tp + c.fn)

    @property
    def tnr(self) -> Ratio:
        c = self.confusion
        return _ratio(c.tn, c.tn + c.fp)

    @property
    def f1(self) -> Ratio:
        c = self.confusion
        return _ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn)

    @property
    def micro_f1(self) -> Ratio:
        c = self.confusion
        return _ratio(c.tp + c.tn, c.total)

    @property
    def balanced_accuracy(self) -> Ratio:
        if self.tpr is None or self.tnr is None:
            return None
        return (self.tpr + self.tnr) / 2

    @property
    def tpr_tnr_gap(self) -> Ratio:
        if self.tpr is None or self.tnr is None:
            return None
        return abs(self.tpr - self.tnr)

    def to_json(self, digits: int = 4) -> dict[str, Any]:
        return {
            "f1": _render(self.f1, digits),
            "micro_f1": _render(self.micro_f1, digits),
            "balanced_accuracy": _render(self.balanced_accuracy, digits),
            "precision": _render(self.precision, digits),
            "tpr": _render(self.tpr, digits),
            "tnr": _render(self.tnr, digits),
            "tpr_tnr_gap": _render(self.tpr_tnr_gap, digits),
            "confusion": self.confusion.to_json(),
        }


def score_classification(preds: Sequence[bool], labels: Sequence[bool]) -> ClassificationMetrics:
    if len(preds) != len(labels):
        raise LengthMismatchError(f"{len(preds)} predictions for {len(labels)} labels")
    if not preds:
        raise ValueError("nothing to score")
    tp = fp = fn = tn = 0
    for p, y in zip(preds, labels):
        if p and y:
            tp += 1
        elif p:
            fp += 1
        elif y:
            fn += 1
        else:
            tn += 1
    return ClassificationMetrics.from_counts(tp, fp, fn, tn)


# ---------------------------------------------------------------------------
# Extraction scoring
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExtractionMetrics:
    accuracy: float
    validity: float
    avg_tanimoto: float
    avg_levenshtein: float
    count: int

    def to_json(self, digits: int = 4) -> dict[str, Any]:
        return {
            "accuracy": round(self.accuracy, digits),
            "validity": round(self.validity, digits),
            "avg_tanimoto": round(self.avg_tanimoto, digits),
            "avg_levenshtein": round(self.avg_levenshtein, digits),
            "count": self.count,
        }


Prediction = Union[SubstituentAssignment, Mapping[str, str], None]


def _label_key(label: str) -> tuple[int, str]:
    try:
        return (rlabel_number(label), label)
    except ValueError:
        return (1 << 30, label)


def _serialize(pred: Prediction) -> str:
    if pred is None:
        return "{}"
    if isinstance(pred, SubstituentAssignment):
        obj = pred.to_json()
    else:
        obj = {str(k): pred[k] for k in sorted(pred, key=lambda k: _label_key(str(k)))}
    return json.dumps(obj, ensure_ascii=False)


def _readable(pred: Prediction) -> dict[str, Substituent]:
    """The labels of ``pred`` whose values are valid substituents."""
    if pred is None:
        return {}
    if isinstance(pred, SubstituentAssignment):
        return dict(pred)
    out = {}
    for label, value in pred.items():
        try:
            out[label] = value if isinstance(value, MolGraph) or value is HYDROGEN else substituent_from_text(value)
        except (MarkushKitError, TypeError):
            continue
    return out


def _same(a: Substituent, b: Substituent) -> bool:
    if a is HYDROGEN or b is HYDROGEN:
        return a is b
    return graphs_equal(a, b)


def score_extraction(
    preds: Sequence[Prediction],
    truths: Sequence[SubstituentAssignment | Mapping[str, str]],
    radius: int = 2,
    nbits: int = 2048,
) -> ExtractionMetrics:
    """Accuracy, validity, mean Tanimoto and mean edit distance of predicted assignments.

    A prediction is valid when it has every true label and every value is a
    well-formed fragment; accurate when, in addition, every fragment is
    graph-equal to the truth. Edit distance compares the JSON serializations,
    an invalid (``None``) prediction being serialized as ``{}``.
    """
    if len(preds) != len(truths):
        raise LengthMismatchError(f"{len(preds)} predictions for {len(truths)} truths")
    if not preds:
        raise ValueError("nothing to score")
    exact = valid = 0
    tani = 0.0
    dist = 0
    for pred, truth in zip(preds, truths):
        if not isinstance(truth, SubstituentAssignment):
            truth = SubstituentAssignment(truth)
        readable = _readable(pred)
        raw_labels = set(pred) if pred is not None else set()
        is_valid = pred is not None and set(truth) <= raw_labels and set(readable) == raw_labels
        if is_valid:
            valid += 1
            if all(_same(readable[label], truth[label]) for label in truth):
                exact += 1
        partial = SubstituentAssignment({k: v for k, v in readable.items()})
        tani += avg_assignment_tanimoto(partial, truth, radius, nbits)
        dist += levenshtein(_serialize(pred), _serialize(truth))
    n = len(preds)
    return ExtractionMetrics(exact / n, valid / n, tani / n, dist / n, n)


# ---------------------------------------------------------------------------
# Baselines and datasets
# ---------------------------------------------------------------------------

def _mol(m: MolGraph | str) -> MolGraph:
    return parse(m) if isinstance(m, str) else m


def baseline_skeleton_match(
    molecules: Sequence[MolGraph | str], bundles: Sequence[Sequence[ClaimBundle]]
) -> list[bool]:
    """Protected iff the molecule reads as any claim's skeleton plus substituents."""
    if len(molecules) != len(bundles):
        raise LengthMismatchError("one bundle list per molecule is required")
    out = []
    for mol, claims in zip(molecules, bundles):
        g = _mol(mol)
        out.append(any(skeleton_matches(b.markush, g) for b in claims))
    return out


def baseline_tanimoto_threshold(
    molecules: Sequence[MolGraph | str],
    bundles: Sequence[Sequence[ClaimBundle]],
    threshold: float = 0.5,
) -> list[bool]:
    """Protected iff fingerprint similarity to some claim skeleton exceeds ``threshold``."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    if len(molecules) != len(bundles):
        raise LengthMismatchError("one bundle list per molecule is required")
    out = []
    for mol, claims in zip(molecules, bundles):
        fp = morgan_fingerprint(_mol(mol))
        best = max((tanimoto(fp, morgan_fingerprint(b.markush.skeleton)) for b in claims), default=0.0)
        out.append(best > threshold)
    return out


def baseline_decide(molecules: Sequence[MolGraph | str], bundles: Sequence[Sequence[ClaimBundle]]) -> list[bool]:
    """The full decision engine: skeleton, substituent and whole-molecule checks."""
    if len(molecules) != len(bundles):
        raise LengthMismatchError("one bundle list per molecule is required")
    return [decide_many(list(claims), _mol(mol)).protected for mol, claims in zip(molecules, bundles)]


@dataclass(frozen=True)
class BenchRecord:
    claim_files: tuple[str, ...]
    molecule: str
    label: bool


def load_dataset(path: str | Path) -> tuple[list[BenchRecord], list[list[ClaimBundle]]]:
    """Read a benchmark JSONL file; claim paths resolve relative to it.

    Raises:
        ValueError: a record is malformed, its molecule does not parse or
            it names no claim.
        ClaimFormatError: a claim file is invalid.
    """
    path = Path(path)
    cache: dict[Path, ClaimBundle] = {}
    records, bundles = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                rec = BenchRecord(tuple(obj["claims"]), obj["molecule"], bool(obj["label"]))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad benchmark record: {exc}") from exc
            if not rec.claim_files:
                raise ValueError(f"{path}:{lineno}: record names no claim file")
            try:
                parse(rec.molecule)
            except MarkushKitError as exc:
                raise ValueError(f"{path}:{lineno}: molecule does not parse: {exc}") from exc
            claims = []
            for ref in rec.claim_files:
                full = (path.parent / ref).resolve()
                if full not in cache:
                    cache[full] = load_claim(full)
                claims.append(cache[full])
            records.append(rec)
            bundles.append(claims)
    return records, bundles


def classify_dataset(path: str | Path, method: Method = "decide", threshold: float = 0.5) -> ClassificationMetrics:
    records, bundles = load_dataset(path)
    molecules = [r.molecule for r in records]
    if method == "decide":
        preds = baseline_decide(molecules, bundles)
    elif method == "skeleton":
        preds = baseline_skeleton_match(molecules, bundles)
    elif method == "tanimoto":
        preds = baseline_tanimoto_threshold(molecules, bundles, threshold)
    else:
        raise ValueError(f"unknown method {method!r}")
    return score_classification(preds, [r.label for r in records])


def load_assignments(path: str | Path) -> list[dict[str, str] | None]:
    """JSONL of assignments: a bare ``{label: fragment}`` object, ``null``,
    or a generated record carrying an ``"assignment"`` key."""
    out: list[dict[str, str] | None] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
            if isinstance(obj, dict) and isinstance(obj.get("assignment"), dict):
                obj = obj["assignment"]
            if obj is not None and not isinstance(obj, dict):
                raise ValueError(f"{path}:{lineno}: expected an object or null")
            out.append(obj)
    return out
