"""Circular fingerprints, Tanimoto similarity and string edit distance."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .errors import EmptyGraphError, LengthMismatchError
from .molgraph import ATOMIC_NUMBERS, MolGraph

if TYPE_CHECKING:
    from .markush import SubstituentAssignment

__all__ = [
    "Fingerprint",
    "morgan_fingerprint",
    "tanimoto",
    "levenshtein",
    "avg_assignment_tanimoto",
]

_MASK64 = (1 << 64) - 1


def _mix64(x: int) -> int:
    """splitmix64 finalizer."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _hash_seq(values: Sequence[int]) -> int:
    h = 0x84222325CBF29CE4
    for v in values:
        h = _mix64(h ^ (v & _MASK64))
    return h


def _label_id(label: str) -> int:
    return int.from_bytes(hashlib.blake2b(label.encode(), digest_size=8).digest(), "little")


@dataclass(frozen=True)
class Fingerprint:
    """Fixed-length bitset; bit ``k`` is ``(bits >> k) & 1``."""

    bits: int
    nbits: int = 2048
    radius: int = 2

    def __post_init__(self) -> None:
        if self.nbits < 1 or self.nbits & (self.nbits - 1):
            raise ValueError("nbits must be a power of two")
        if self.bits < 0 or self.bits >> self.nbits:
            raise ValueError("bits do not fit in nbits")

    @classmethod
    def from_bits(cls, values: Sequence[int | bool], radius: int = 0) -> Fingerprint:
        bits = 0
        for k, v in enumerate(values):
            if v:
                bits |= 1 << k
        return cls(bits, len(values), radius)

    def on_bits(self) -> list[int]:
        return [k for k in range(self.nbits) if (self.bits >> k) & 1]

    def count(self) -> int:
        return self.bits.bit_count()


def _initial_identifier(g: MolGraph, i: int) -> int:
    atom = g.atoms[i]
    label = 0
    if atom.rlabel is not None:
        label = _label_id(atom.rlabel)
    elif atom.attachment:
        label = _label_id("*")
    return _hash_seq((
        ATOMIC_NUMBERS.get(atom.element, 0),
        g.degree(i),
        atom.formal_charge,
        atom.total_h,
        int(atom.aromatic),
        label,
    ))


def morgan_fingerprint(g: MolGraph, radius: int = 2, nbits: int = 2048) -> Fingerprint:
    """Folded circular fingerprint (ECFP-like) of a normalized graph.

    Each atom's identifier is rehashed ``radius`` times with the sorted
    (bond order, neighbour identifier) pairs around it; every identifier
    from every iteration sets one bit. Attachment points shape their
    neighbours' environments but set no bits themselves, since every
    fragment has one.
    """
    if not g.atoms:
        raise EmptyGraphError("cannot fingerprint an empty graph")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    ids = [_initial_identifier(g, i) for i in range(len(g.atoms))]
    centres = [i for i, a in enumerate(g.atoms) if not a.attachment]
    bits = 0
    for i in centres:
        bits |= 1 << (ids[i] % nbits)
    for r in range(1, radius + 1):
        new = []
        for i in range(len(ids)):
            env = sorted((int(g.bond_between(i, j).order), ids[j]) for j in g.adjacency[i])
            flat = [r, ids[i]]
            for order, nid in env:
                flat.extend((order, nid))
            new.append(_hash_seq(flat))
        ids = new
        for i in centres:
            bits |= 1 << (ids[i] % nbits)
    return Fingerprint(bits, nbits, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|a AND b| / |a OR b|; two empty bitsets count as identical (1.0)."""
    if a.nbits != b.nbits:
        raise LengthMismatchError(f"fingerprint lengths differ: {a.nbits} vs {b.nbits}")
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union


def levenshtein(a: str, b: str) -> int:
    """Unit-cost insert/delete/substitute edit distance."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def avg_assignment_tanimoto(
    pred: SubstituentAssignment | None,
    truth: SubstituentAssignment,
    radius: int = 2,
    nbits: int = 2048,
) -> float:
    """Mean per-label Tanimoto between predicted and true substituents.

    Labels missing from ``pred`` (or a ``None`` prediction) score 0. A
    hydrogen substituent scores 1 against hydrogen and 0 against anything else.
    """
    from .markush import HYDROGEN

    labels = list(truth.labels)
    if not labels:
        return 1.0
    total = 0.0
    for label in labels:
        t = truth[label]
        p = pred.get(label) if pred is not None else None
        if p is None:
            continue
        if t is HYDROGEN or p is HYDROGEN:
            total += 1.0 if t is p else 0.0
        else:
            total += tanimoto(morgan_fingerprint(p, radius, nbits), morgan_fingerprint(t, radius, nbits))
    return total / len(labels)
