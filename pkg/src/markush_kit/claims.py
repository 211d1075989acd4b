"""
Structured Markush claims and the infringement decision engine.

A claim bundle pairs a Markush skeleton with one predicate per R-group
label plus whole-molecule constraints and explicitly claimed embodiments.
Constraints are conjunctive across labels and existential across the
alternative readings returned by extraction and across claims.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence, Union

from .errors import ClaimFormatError, MarkushKitError
from .markush import (
    DEFAULT_LIMIT,
    HYDROGEN,
    HYDROGEN_SMILES,
    MarkushStructure,
    Substituent,
    SubstituentAssignment,
    extract,
    substituent_from_text,
    substituent_smiles,
)
from .molgraph import BondOrder, MolGraph, graphs_equal, rlabel_number
from .smiles import parse, write_canonical
from .substruct import has_embedding

__all__ = [
    "Any_",
    "AnyOf",
    "ElementClass",
    "Alkyl",
    "HeavyAtomRange",
    "HydrogenAllowed",
    "Predicate",
    "GroupConstraint",
    "GroupVerdict",
    "SkeletonConstraint",
    "ClaimBundle",
    "Verdict",
    "InfringementReport",
    "check_group",
    "decide",
    "decide_many",
    "load_claim",
    "predicate_from_json",
    "render_text",
]

ELEMENT_CLASSES = {
    "HALOGEN": frozenset({"F", "Cl", "Br", "I"}),
    "CHALCOGEN": frozenset({"O", "S"}),
}


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnyOf:
    """Substituent must equal (as a graph) one of the listed fragments."""

    fragments: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "fragments", tuple(self.fragments))
        if not self.fragments:
            raise ClaimFormatError("AnyOf needs at least one fragment")
        try:
            graphs = tuple(substituent_from_text(f) for f in self.fragments)
        except MarkushKitError as exc:
            raise ClaimFormatError(f"AnyOf entry is not a valid fragment: {exc}") from exc
        object.__setattr__(self, "_graphs", graphs)

    def to_json(self) -> dict:
        return {"type": "AnyOf", "fragments": list(self.fragments)}


@dataclass(frozen=True)
class ElementClass:
    """A single heavy atom from a named element class."""

    kind: str

    def __post_init__(self) -> None:
        if self.kind not in ELEMENT_CLASSES:
            raise ClaimFormatError(f"unknown element class {self.kind!r}")

    def to_json(self) -> dict:
        return {"type": "ElementClass", "class": self.kind}


@dataclass(frozen=True)
class Alkyl:
    """Acyclic, saturated, all-carbon chain with min_c..max_c carbons."""

    min_c: int
    max_c: int

    def __post_init__(self) -> None:
        if not 1 <= self.min_c <= self.max_c:
            raise ClaimFormatError(f"Alkyl range must satisfy 1 <= min <= max, got {self.min_c}..{self.max_c}")

    def to_json(self) -> dict:
        return {"type": "Alkyl", "min_c": self.min_c, "max_c": self.max_c}


@dataclass(frozen=True)
class HeavyAtomRange:
    min: int
    max: int

    def __post_init__(self) -> None:
        if not 0 <= self.min <= self.max:
            raise ClaimFormatError(f"heavy atom range must satisfy 0 <= min <= max, got {self.min}..{self.max}")

    def to_json(self) -> dict:
        return {"type": "HeavyAtomRange", "min": self.min, "max": self.max}


@dataclass(frozen=True)
class Any_:
    """Anything, hydrogen included."""

    def to_json(self) -> dict:
        return {"type": "Any"}


@dataclass(frozen=True)
class HydrogenAllowed:
    """Decides hydrogen itself; defers every real fragment to ``inner``."""

    allowed: bool
    inner: Predicate

    def to_json(self) -> dict:
        return {"type": "HydrogenAllowed", "allowed": self.allowed, "inner": self.inner.to_json()}


Predicate = Union[AnyOf, ElementClass, Alkyl, HeavyAtomRange, Any_, HydrogenAllowed]


def predicate_from_json(obj: Mapping[str, Any]) -> Predicate:
    if not isinstance(obj, Mapping) or "type" not in obj:
        raise ClaimFormatError(f"predicate must be an object with a 'type': {obj!r}")
    kind = obj["type"]
    try:
        if kind == "AnyOf":
            return AnyOf(tuple(obj["fragments"]))
        if kind == "ElementClass":
            return ElementClass(obj["class"])
        if kind == "Alkyl":
            return Alkyl(int(obj["min_c"]), int(obj["max_c"]))
        if kind == "HeavyAtomRange":
            return HeavyAtomRange(int(obj["min"]), int(obj["max"]))
        if kind == "Any":
            return Any_()
        if kind == "HydrogenAllowed":
            if isinstance(obj["inner"], Mapping) and obj["inner"].get("type") == "HydrogenAllowed":
                raise ClaimFormatError("HydrogenAllowed cannot wrap another HydrogenAllowed")
            return HydrogenAllowed(bool(obj["allowed"]), predicate_from_json(obj["inner"]))
    except KeyError as exc:
        raise ClaimFormatError(f"{kind} predicate is missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ClaimFormatError):
            raise
        raise ClaimFormatError(f"bad {kind} predicate: {exc}") from exc
    raise ClaimFormatError(f"unknown predicate type {kind!r}")


@dataclass(frozen=True)
class GroupConstraint:
    label: str
    predicate: Predicate


@dataclass(frozen=True)
class GroupVerdict:
    label: str
    passed: bool
    reason: str
    substituent: str

    def to_json(self) -> dict:
        return {"label": self.label, "substituent": self.substituent,
                "passed": self.passed, "reason": self.reason}


def _real_atoms(g: MolGraph) -> list[int]:
    return [i for i, a in enumerate(g.atoms) if not a.is_placeholder]


def _check(predicate: Predicate, value: Substituent) -> tuple[bool, str]:
    if isinstance(predicate, Any_):
        return True, "ANY"
    if isinstance(predicate, HydrogenAllowed):
        if value is HYDROGEN:
            return (True, "HYDROGEN_ALLOWED") if predicate.allowed else (False, "HYDROGEN_FORBIDDEN")
        return _check(predicate.inner, value)
    if isinstance(predicate, AnyOf):
        for candidate in predicate._graphs:
            if candidate is HYDROGEN or value is HYDROGEN:
                if candidate is value:
                    return True, "IN_SET"
            elif graphs_equal(candidate, value):
                return True, "IN_SET"
        return False, "NOT_IN_SET"
    if value is HYDROGEN:
        return False, "HYDROGEN_FORBIDDEN"

    g = value
    atoms = _real_atoms(g)
    heavy = [i for i in atoms if g.atoms[i].is_heavy]
    if isinstance(predicate, ElementClass):
        if len(heavy) != 1:
            return False, "NOT_SINGLE_ATOM"
        if g.atoms[heavy[0]].element not in ELEMENT_CLASSES[predicate.kind]:
            return False, "ELEMENT_NOT_IN_CLASS"
        return True, "ELEMENT_IN_CLASS"
    if isinstance(predicate, HeavyAtomRange):
        if len(heavy) < predicate.min:
            return False, "TOO_FEW_HEAVY_ATOMS"
        if len(heavy) > predicate.max:
            return False, "TOO_MANY_HEAVY_ATOMS"
        return True, "HEAVY_ATOMS_IN_RANGE"
    if isinstance(predicate, Alkyl):
        if any(g.atoms[i].element != "C" or g.atoms[i].formal_charge or g.atoms[i].isotope for i in atoms):
            return False, "NOT_ALL_CARBON"
        if g.rings:
            return False, "RING_PRESENT"
        if any(b.order is not BondOrder.SINGLE for b in g.bonds):
            return False, "UNSATURATED"
        n = len(atoms)
        if n < predicate.min_c:
            return False, "CHAIN_TOO_SHORT"
        if n > predicate.max_c:
            return False, "CHAIN_TOO_LONG"
        return True, "ALKYL_IN_RANGE"
    raise TypeError(f"not a predicate: {predicate!r}")


def check_group(constraint: GroupConstraint | Predicate, value: Substituent) -> tuple[bool, str]:
    """Evaluate one substituent against one predicate; returns (passed, reason code)."""
    predicate = constraint.predicate if isinstance(constraint, GroupConstraint) else constraint
    return _check(predicate, value)


# ---------------------------------------------------------------------------
# Claim bundles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SkeletonConstraint:
    heavy_atom_range: tuple[int, int] | None = None
    forbidden_substructures: tuple[str, ...] = ()
    embodiments: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.heavy_atom_range is not None:
            lo, hi = self.heavy_atom_range
            if not 0 <= lo <= hi:
                raise ClaimFormatError(f"heavy_atom_range must satisfy 0 <= min <= max, got {lo}..{hi}")
            object.__setattr__(self, "heavy_atom_range", (int(lo), int(hi)))
        object.__setattr__(self, "forbidden_substructures", tuple(self.forbidden_substructures))
        object.__setattr__(self, "embodiments", tuple(self.embodiments))
        try:
            object.__setattr__(self, "_forbidden", tuple(parse(s) for s in self.forbidden_substructures))
            object.__setattr__(self, "_embodiments", frozenset(write_canonical(parse(s)) for s in self.embodiments))
        except MarkushKitError as exc:
            raise ClaimFormatError(f"bad skeleton constraint structure: {exc}") from exc


@dataclass(frozen=True)
class ClaimBundle:
    claim_id: str
    markush: MarkushStructure
    group_constraints: tuple[GroupConstraint, ...]
    skeleton_constraints: SkeletonConstraint = field(default_factory=SkeletonConstraint)

    def __post_init__(self) -> None:
        object.__setattr__(self, "group_constraints", tuple(
            sorted(self.group_constraints, key=lambda c: rlabel_number(c.label))
        ))
        labels = [c.label for c in self.group_constraints]
        if len(set(labels)) != len(labels):
            raise ClaimFormatError(f"claim {self.claim_id}: duplicate constraints for a label")
        missing = set(self.markush.labels) - set(labels)
        extra = set(labels) - set(self.markush.labels)
        if missing:
            raise ClaimFormatError(f"claim {self.claim_id}: no constraint for {', '.join(sorted(missing))}")
        if extra:
            raise ClaimFormatError(f"claim {self.claim_id}: constraint for absent label {', '.join(sorted(extra))}")

    def constraint(self, label: str) -> GroupConstraint:
        return next(c for c in self.group_constraints if c.label == label)

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> ClaimBundle:
        try:
            claim_id = str(obj["claim_id"])
            markush_text = obj["markush"]
            groups = obj.get("groups", {})
        except (KeyError, TypeError) as exc:
            raise ClaimFormatError(f"claim bundle is missing {exc}") from exc
        try:
            markush = MarkushStructure.from_smiles(markush_text)
        except MarkushKitError as exc:
            raise ClaimFormatError(f"claim {claim_id}: bad markush {markush_text!r}: {exc}") from exc
        if not isinstance(groups, Mapping):
            raise ClaimFormatError(f"claim {claim_id}: 'groups' must be an object")
        constraints = tuple(GroupConstraint(label, predicate_from_json(p)) for label, p in groups.items())
        skel = obj.get("skeleton") or {}
        har = skel.get("heavy_atom_range")
        skeleton = SkeletonConstraint(
            heavy_atom_range=tuple(har) if har is not None else None,
            forbidden_substructures=tuple(skel.get("forbidden_substructures", ())),
            embodiments=tuple(obj.get("embodiments", ())),
        )
        return cls(claim_id, markush, constraints, skeleton)

    def to_json(self) -> dict:
        sc = self.skeleton_constraints
        return {
            "claim_id": self.claim_id,
            "markush": self.markush.smiles,
            "groups": {c.label: c.predicate.to_json() for c in self.group_constraints},
            "skeleton": {
                "heavy_atom_range": list(sc.heavy_atom_range) if sc.heavy_atom_range else None,
                "forbidden_substructures": list(sc.forbidden_substructures),
            },
            "embodiments": list(sc.embodiments),
        }


def load_claim(path: str | Path) -> ClaimBundle:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ClaimFormatError(f"{path}: not valid JSON: {exc}") from exc
    return ClaimBundle.from_json(obj)


# ---------------------------------------------------------------------------
# Decisions
# ---------------------------------------------------------------------------

class Verdict(str, enum.Enum):
    PROTECTED = "PROTECTED"
    NOT_PROTECTED = "NOT_PROTECTED"


@dataclass(frozen=True)
class SkeletonEvidence:
    matched: bool
    embedding_count: int
    solution_count: int
    ambiguous: bool

    def to_json(self) -> dict:
        return {"matched": self.matched, "embedding_count": self.embedding_count,
                "solution_count": self.solution_count, "ambiguous": self.ambiguous}


@dataclass(frozen=True)
class SkeletonCheck:
    name: str
    passed: bool
    detail: str

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class InfringementReport:
    verdict: Verdict
    matched_claim: str | None
    claim_id: str | None = None
    molecule: str = ""
    markush: str | None = None
    skeleton_evidence: SkeletonEvidence | None = None
    assignment_evidence: SubstituentAssignment | None = None
    group_verdicts: tuple[GroupVerdict, ...] = ()
    skeleton_checks: tuple[SkeletonCheck, ...] = ()
    embodiment_hit: bool = False
    rejected_assignments: int = 0
    per_claim: tuple[InfringementReport, ...] = ()

    @property
    def protected(self) -> bool:
        return self.verdict is Verdict.PROTECTED

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "verdict": self.verdict.value,
            "matched_claim": self.matched_claim,
            "claim_id": self.claim_id,
            "molecule": self.molecule,
            "markush": self.markush,
            "embodiment_hit": self.embodiment_hit,
            "skeleton_evidence": self.skeleton_evidence.to_json() if self.skeleton_evidence else None,
            "assignment_evidence": self.assignment_evidence.to_json() if self.assignment_evidence else None,
            "group_verdicts": [v.to_json() for v in self.group_verdicts],
            "skeleton_checks": [c.to_json() for c in self.skeleton_checks],
            "rejected_assignments": self.rejected_assignments,
        }
        if self.per_claim:
            out["per_claim"] = [r.to_json() for r in self.per_claim]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False)


def _skeleton_checks(sc: SkeletonConstraint, mol: MolGraph) -> list[SkeletonCheck]:
    checks = []
    if sc.heavy_atom_range is not None:
        lo, hi = sc.heavy_atom_range
        n = mol.heavy_atom_count
        checks.append(SkeletonCheck("heavy_atom_range", lo <= n <= hi, f"{n} heavy atoms, allowed {lo}..{hi}"))
    for text, query in zip(sc.forbidden_substructures, sc._forbidden):
        hit = has_embedding(query, mol)
        checks.append(SkeletonCheck("forbidden_substructure", not hit,
                                    f"{text} {'present' if hit else 'absent'}"))
    return checks


def decide(bundle: ClaimBundle, mol: MolGraph, limit: int = DEFAULT_LIMIT) -> InfringementReport:
    """Judge one molecule against one claim, keeping the evidence for every step."""
    if not isinstance(bundle, ClaimBundle):
        raise ClaimFormatError("decide needs a ClaimBundle")
    canon = write_canonical(mol)
    embodiment_hit = canon in bundle.skeleton_constraints._embodiments

    result = extract(bundle.markush, mol, limit)
    evidence = SkeletonEvidence(result.matched, result.embedding_count, len(result.solutions), result.ambiguous)
    checks = _skeleton_checks(bundle.skeleton_constraints, mol)
    skeleton_ok = all(c.passed for c in checks)

    chosen: SubstituentAssignment | None = None
    chosen_verdicts: tuple[GroupVerdict, ...] = ()
    rejected = 0
    first_verdicts: tuple[GroupVerdict, ...] = ()
    for k, solution in enumerate(result.solutions):
        verdicts = []
        for c in bundle.group_constraints:
            value = solution[c.label]
            passed, reason = check_group(c, value)
            verdicts.append(GroupVerdict(c.label, passed, reason, substituent_smiles(value)))
        if k == 0:
            first_verdicts = tuple(verdicts)
        if all(v.passed for v in verdicts):
            if chosen is None:
                chosen, chosen_verdicts = solution, tuple(verdicts)
        else:
            rejected += 1

    protected = embodiment_hit or (chosen is not None and skeleton_ok)
    return InfringementReport(
        verdict=Verdict.PROTECTED if protected else Verdict.NOT_PROTECTED,
        matched_claim=bundle.claim_id if protected else None,
        claim_id=bundle.claim_id,
        molecule=canon,
        markush=bundle.markush.smiles,
        skeleton_evidence=evidence,
        assignment_evidence=chosen,
        group_verdicts=chosen_verdicts if chosen is not None else first_verdicts,
        skeleton_checks=tuple(checks),
        embodiment_hit=embodiment_hit,
        rejected_assignments=rejected,
    )


def decide_many(bundles: Sequence[ClaimBundle], mol: MolGraph, limit: int = DEFAULT_LIMIT) -> InfringementReport:
    """PROTECTED iff any claim protects ``mol``; the first such claim (input order) is reported."""
    reports = tuple(decide(b, mol, limit) for b in bundles)
    winner = next((r for r in reports if r.protected), None)
    if winner is None:
        return InfringementReport(
            verdict=Verdict.NOT_PROTECTED,
            matched_claim=None,
            molecule=write_canonical(mol),
            per_claim=reports,
        )
    return InfringementReport(
        verdict=Verdict.PROTECTED,
        matched_claim=winner.matched_claim,
        claim_id=winner.claim_id,
        molecule=winner.molecule,
        markush=winner.markush,
        skeleton_evidence=winner.skeleton_evidence,
        assignment_evidence=winner.assignment_evidence,
        group_verdicts=winner.group_verdicts,
        skeleton_checks=winner.skeleton_checks,
        embodiment_hit=winner.embodiment_hit,
        rejected_assignments=winner.rejected_assignments,
        per_claim=reports,
    )


def _render_one(report: InfringementReport, lines: list[str]) -> None:
    lines.append(f"Claim {report.claim_id}: {report.markush}")
    lines.append("")
    lines.append("1. Skeleton analysis")
    ev = report.skeleton_evidence
    if ev is None:
        lines.append("   (not evaluated)")
    elif ev.matched:
        amb = ", ambiguous" if ev.ambiguous else ""
        lines.append(f"   skeleton embeds: {ev.embedding_count} embedding(s), {ev.solution_count} reading(s){amb}")
    else:
        lines.append("   skeleton does not embed into the molecule")
    lines.append(f"   explicitly claimed embodiment: {'yes' if report.embodiment_hit else 'no'}")
    lines.append("")
    lines.append("2. Substituents")
    if report.group_verdicts:
        width = max(len(v.label) for v in report.group_verdicts)
        for v in report.group_verdicts:
            lines.append(f"   {v.label.ljust(width)}  {v.substituent}")
    else:
        lines.append("   (none extracted)")
    lines.append("")
    lines.append("3. Requirement checks")
    if not report.group_verdicts and not report.skeleton_checks:
        lines.append("   (none evaluated)")
    for v in report.group_verdicts:
        lines.append(f"   [{'PASS' if v.passed else 'FAIL'}] {v.label}: {v.reason}")
    for c in report.skeleton_checks:
        lines.append(f"   [{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
    if report.rejected_assignments:
        total = report.skeleton_evidence.solution_count if report.skeleton_evidence else 0
        lines.append(f"   {report.rejected_assignments} of {total} reading(s) failed the group requirements")


def render_text(report: InfringementReport) -> str:
    """Plain-text report: skeleton analysis, substituents, requirement checks, verdict."""
    lines = [f"Infringement report for {report.molecule}", "=" * 40]
    targets = report.per_claim or (report,)
    if not report.per_claim and report.claim_id is None:
        targets = ()
    for r in targets:
        lines.append("")
        _render_one(r, lines)
        lines.append(f"   -> {r.verdict.value}")
    lines.append("")
    lines.append(f"Verdict: {report.verdict.value}")
    if report.matched_claim is not None:
        lines.append(f"Matched claim: {report.matched_claim}")
    return "\n".join(lines) + "\n"
