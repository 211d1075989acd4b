"""
Markush skeletons, substituent assignments, attachment and extraction.

``attach`` assembles a molecule from a skeleton and one substituent per
R-group label. ``extract`` inverts it exactly: it embeds the skeleton core
into a molecule, requires every remaining atom to hang off exactly one
R-group anchor, and returns every distinct assignment that reassembles
the molecule.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterator, Mapping, Union

from .errors import FragmentArityError, MarkushFormatError, MissingLabelError, ValenceError
from .molgraph import Atom, Bond, BondOrder, MolGraph, check_valences, rlabel_number
from .rings import perceive_aromaticity
from .smiles import parse, parse_fragment, write_canonical
from .substruct import CompatPolicy, connected_order, iter_embeddings

__all__ = [
    "HYDROGEN",
    "Hydrogen",
    "MarkushStructure",
    "SubstituentAssignment",
    "ExtractionResult",
    "DEFAULT_LIMIT",
    "attach",
    "extract",
    "skeleton_matches",
    "check_fragment",
]

DEFAULT_LIMIT = 64
HYDROGEN_SMILES = "[H]"


class Hydrogen(enum.Enum):
    """A substituent that is just a hydrogen atom."""

    HYDROGEN = HYDROGEN_SMILES

    def __repr__(self) -> str:
        return "HYDROGEN"


HYDROGEN = Hydrogen.HYDROGEN
Substituent = Union[MolGraph, Hydrogen]


def check_fragment(g: MolGraph) -> int:
    """Validate a fragment graph and return the index of its attachment point."""
    points = [i for i, a in enumerate(g.atoms) if a.attachment]
    if len(points) != 1:
        raise FragmentArityError(f"fragment has {len(points)} attachment points, expected 1")
    p = points[0]
    if g.degree(p) != 1:
        raise FragmentArityError(f"attachment point has degree {g.degree(p)}, expected 1")
    if g.bond_between(p, g.adjacency[p][0]).order is not BondOrder.SINGLE:
        raise FragmentArityError("attachment bond must be single")
    return p


def substituent_from_text(text: str) -> Substituent:
    return HYDROGEN if text == HYDROGEN_SMILES else parse_fragment(text)


def substituent_smiles(value: Substituent) -> str:
    return HYDROGEN_SMILES if value is HYDROGEN else write_canonical(value)


class SubstituentAssignment(Mapping[str, Substituent]):
    """Immutable mapping from R-group label to fragment (or HYDROGEN).

    Labels are kept in natural order (R1, R2, ..., R10). Two assignments
    compare equal when their canonical fragment strings agree.
    """

    __slots__ = ("_data", "_smiles")

    def __init__(self, mapping: Mapping[str, Substituent | str]):
        data: dict[str, Substituent] = {}
        for label in sorted(mapping, key=rlabel_number):
            value = mapping[label]
            if isinstance(value, str):
                value = substituent_from_text(value)
            elif isinstance(value, MolGraph):
                check_fragment(value)
            elif value is not HYDROGEN:
                raise TypeError(f"substituent for {label} must be a MolGraph, HYDROGEN or text")
            data[label] = value
        self._data = data
        self._smiles: dict[str, str] | None = None

    def __getitem__(self, label: str) -> Substituent:
        return self._data[label]

    def __iter__(self) -> Iterator[str]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self._data)

    def to_json(self) -> dict[str, str]:
        """``{"R1": "<fragment SMILES>", ...}``; HYDROGEN is written ``[H]``."""
        if self._smiles is None:
            self._smiles = {label: substituent_smiles(v) for label, v in self._data.items()}
        return dict(self._smiles)

    @classmethod
    def from_json(cls, obj: Mapping[str, str]) -> SubstituentAssignment:
        return cls(obj)

    def key(self) -> tuple[tuple[str, str], ...]:
        return tuple(self.to_json().items())

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SubstituentAssignment):
            return self.key() == other.key()
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.key())

    def equivalent(self, other: SubstituentAssignment) -> bool:
        """Label-wise graph isomorphism; independent of canonical strings."""
        from .molgraph import graphs_equal

        if set(self) != set(other):
            return False
        for label in self:
            a, b = self[label], other[label]
            if a is HYDROGEN or b is HYDROGEN:
                if a is not b:
                    return False
            elif not graphs_equal(a, b):
                return False
        return True

    def __repr__(self) -> str:
        return f"SubstituentAssignment({self.to_json()!r})"


@dataclass(frozen=True)
class MarkushStructure:
    """A skeleton graph whose R-group placeholders are all single-bonded leaves."""

    skeleton: MolGraph
    labels: tuple[str, ...] = field(init=False)

    def __post_init__(self) -> None:
        g = self.skeleton
        if not g.is_connected:
            raise MarkushFormatError("skeleton must be a single connected structure")
        placeholders = [i for i, a in enumerate(g.atoms) if a.rlabel is not None]
        if not placeholders:
            raise MarkushFormatError("skeleton has no R-group placeholders")
        if any(a.attachment for a in g.atoms):
            raise MarkushFormatError("skeletons use [Rn] placeholders, not attachment points")
        for p in placeholders:
            if g.degree(p) != 1:
                raise MarkushFormatError(f"placeholder {g.atoms[p].rlabel} has degree {g.degree(p)}, expected 1")
            anchor = g.adjacency[p][0]
            if g.atoms[anchor].is_placeholder:
                raise MarkushFormatError("placeholders must hang off a real atom")
            if g.bond_between(p, anchor).order is not BondOrder.SINGLE:
                raise MarkushFormatError(f"placeholder {g.atoms[p].rlabel} must be single-bonded")
        labels = sorted({g.atoms[p].rlabel for p in placeholders}, key=rlabel_number)
        object.__setattr__(self, "labels", tuple(labels))

    @classmethod
    def from_smiles(cls, text: str) -> MarkushStructure:
        return cls(parse(text))

    @cached_property
    def smiles(self) -> str:
        return write_canonical(self.skeleton)

    @cached_property
    def core_indices(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.skeleton.atoms) if not a.is_placeholder)

    @cached_property
    def anchors(self) -> dict[int, tuple[tuple[int, str], ...]]:
        """Skeleton anchor atom -> its (placeholder index, label) pairs."""
        out: dict[int, list[tuple[int, str]]] = {}
        g = self.skeleton
        for p, atom in enumerate(g.atoms):
            if atom.rlabel is not None:
                out.setdefault(g.adjacency[p][0], []).append((p, atom.rlabel))
        return {k: tuple(v) for k, v in sorted(out.items())}

    @cached_property
    def _core(self) -> tuple[MolGraph, dict[int, int]]:
        return self.skeleton.subgraph(self.core_indices)

    def __str__(self) -> str:
        return self.smiles


def _as_markush(skeleton: MarkushStructure | MolGraph | str) -> MarkushStructure:
    if isinstance(skeleton, MarkushStructure):
        return skeleton
    if isinstance(skeleton, str):
        return MarkushStructure.from_smiles(skeleton)
    return MarkushStructure(skeleton)


def attach(
    skeleton: MarkushStructure | str,
    assignment: SubstituentAssignment | Mapping[str, Substituent | str],
) -> MolGraph:
    """Replace every placeholder by its substituent.

    Each fragment is fused onto the placeholder's anchor with a single bond
    at the fragment's attachment atom; HYDROGEN removes the placeholder and
    adds one hydrogen to the anchor.

    Raises:
        MissingLabelError: the assignment does not cover exactly the skeleton's labels.
        ValenceError: an anchor would exceed its valence.
    """
    markush = _as_markush(skeleton)
    if not isinstance(assignment, SubstituentAssignment):
        assignment = SubstituentAssignment(assignment)
    missing = [label for label in markush.labels if label not in assignment]
    if missing:
        raise MissingLabelError(f"no substituent for {', '.join(missing)}")
    extra = [label for label in assignment if label not in markush.labels]
    if extra:
        raise MissingLabelError(f"labels {', '.join(extra)} are not in the skeleton")

    g = markush.skeleton
    core, new_index = markush._core
    atoms = list(core.atoms)
    bonds = list(core.bonds)
    for anchor, slots in markush.anchors.items():
        a = new_index[anchor]
        for _, label in slots:
            value = assignment[label]
            if value is HYDROGEN:
                atom = atoms[a]
                atoms[a] = (
                    replace(atom, explicit_h=atom.explicit_h + 1)
                    if atom.bracket
                    else replace(atom, implicit_h=atom.implicit_h + 1)
                )
                continue
            point = check_fragment(value)
            root = value.adjacency[point][0]
            offset = {}
            for i, frag_atom in enumerate(value.atoms):
                if i != point:
                    offset[i] = len(atoms)
                    atoms.append(frag_atom)
            for bond in value.bonds:
                if point not in bond.endpoints:
                    bonds.append(Bond(offset[bond.a], offset[bond.b], bond.order))
            bonds.append(Bond(a, offset[root], BondOrder.SINGLE))
    out = MolGraph(tuple(atoms), tuple(bonds))
    check_valences(out)
    return perceive_aromaticity(out)


@dataclass(frozen=True)
class ExtractionResult:
    solutions: tuple[SubstituentAssignment, ...]
    embedding_count: int
    truncated: bool = False

    @property
    def ambiguous(self) -> bool:
        return len(self.solutions) > 1

    @property
    def matched(self) -> bool:
        return bool(self.solutions)

    def to_json(self) -> dict:
        return {
            "matched": self.matched,
            "ambiguous": self.ambiguous,
            "embedding_count": self.embedding_count,
            "truncated": self.truncated,
            "solutions": [s.to_json() for s in self.solutions],
        }


@dataclass(frozen=True)
class _CorePolicy(CompatPolicy):
    """Core atom q matches molecule atom t when t has q's attributes plus one
    extra bond or hydrogen per placeholder hanging off q."""

    skeleton_h: tuple[int, ...] = ()
    slots: tuple[int, ...] = ()

    def atoms_compatible(self, query: MolGraph, qi: int, target: MolGraph, ti: int) -> bool:
        qa, ta = query.atoms[qi], target.atoms[ti]
        if ta.is_placeholder:
            return False
        if (
            qa.element != ta.element
            or qa.formal_charge != ta.formal_charge
            or qa.isotope != ta.isotope
            or qa.aromatic != ta.aromatic
        ):
            return False
        qh, th = self.skeleton_h[qi], ta.total_h
        qd, td = query.degree(qi), target.degree(ti)
        return th >= qh and td >= qd and (th - qh) + (td - qd) == self.slots[qi]


def _fragment_graph(mol: MolGraph, root: int, comp: frozenset[int]) -> MolGraph:
    sub, index = mol.subgraph(comp)
    n = len(sub.atoms)
    return MolGraph(
        sub.atoms + (Atom.attachment_point(),),
        sub.bonds + (Bond(index[root], n, BondOrder.SINGLE),),
    )


def _decompose(
    markush: MarkushStructure, mol: MolGraph, first_only: bool
) -> tuple[dict[tuple, SubstituentAssignment], int]:
    core, new_index = markush._core
    skel = markush.skeleton
    slots = [0] * len(core.atoms)
    anchor_slots: dict[int, tuple[str, ...]] = {}
    for anchor, pairs in markush.anchors.items():
        slots[new_index[anchor]] = len(pairs)
        anchor_slots[new_index[anchor]] = tuple(label for _, label in pairs)
    policy = _CorePolicy(
        skeleton_h=tuple(skel.atoms[i].total_h for i in markush.core_indices),
        slots=tuple(slots),
    )
    n_core_bonds = len(core.bonds)
    fragments: dict[tuple[int, frozenset[int]], tuple[MolGraph, str]] = {}
    solutions: dict[tuple, SubstituentAssignment] = {}
    valid_embeddings = 0

    for emb in iter_embeddings(core, mol, policy, connected_order(core)):
        image = {t: q for q, t in enumerate(emb)}
        inner = sum(1 for b in mol.bonds if b.a in image and b.b in image)
        if inner != n_core_bonds:
            continue
        # group the remaining atoms into components hanging off the core
        seen: set[int] = set()
        by_anchor: dict[int, list[tuple[int, frozenset[int]]]] = {}
        ok = True
        for start in range(len(mol.atoms)):
            if start in image or start in seen:
                continue
            comp, boundary = [], []
            queue = deque([start])
            seen.add(start)
            while queue:
                u = queue.popleft()
                comp.append(u)
                for v in mol.adjacency[u]:
                    if v in image:
                        boundary.append((u, v))
                    elif v not in seen:
                        seen.add(v)
                        queue.append(v)
            if len(boundary) != 1:
                ok = False
                break
            root, t = boundary[0]
            q = image[t]
            if q not in anchor_slots or mol.bond_between(root, t).order is not BondOrder.SINGLE:
                ok = False
                break
            by_anchor.setdefault(q, []).append((root, frozenset(comp)))
        if not ok:
            continue

        per_anchor_options = []
        for q, labels in anchor_slots.items():
            comps = sorted(by_anchor.get(q, []), key=lambda c: min(c[1]))
            if len(comps) > len(labels):
                ok = False
                break
            values = []
            for root, comp in comps:
                key = (root, comp)
                if key not in fragments:
                    fg = _fragment_graph(mol, root, comp)
                    fragments[key] = (fg, write_canonical(fg))
                values.append(fragments[key])
            options = []
            for chosen in itertools.permutations(range(len(labels)), len(values)):
                option = [(labels[k], (HYDROGEN, HYDROGEN_SMILES)) for k in range(len(labels))]
                for v, k in zip(values, chosen):
                    option[k] = (labels[k], v)
                options.append(option)
            per_anchor_options.append(options)
        if not ok:
            continue

        found_here = False
        for combo in itertools.product(*per_anchor_options):
            chosen: dict[str, tuple[Substituent, str]] = {}
            consistent = True
            for option in combo:
                for label, value in option:
                    if label in chosen and chosen[label][1] != value[1]:
                        consistent = False
                        break
                    chosen[label] = value
                if not consistent:
                    break
            if not consistent:
                continue
            found_here = True
            key = tuple((label, chosen[label][1]) for label in markush.labels)
            if key not in solutions:
                solutions[key] = SubstituentAssignment({label: chosen[label][0] for label in markush.labels})
            if first_only:
                return solutions, 1
        if found_here:
            valid_embeddings += 1
    return solutions, valid_embeddings


def extract(
    skeleton: MarkushStructure | str,
    mol: MolGraph,
    limit: int = DEFAULT_LIMIT,
) -> ExtractionResult:
    """Every distinct way to read ``mol`` as ``skeleton`` plus substituents.

    An embedding of the skeleton core counts only if it covers the whole
    molecule: each remaining atom belongs to a connected fragment that
    touches the core through a single bond at an R-group anchor. Solutions
    are sorted by their canonical fragment strings and capped at ``limit``.
    """
    markush = _as_markush(skeleton)
    if limit < 1:
        raise ValueError("limit must be at least 1")
    if not mol.is_connected:
        raise ValueError("extraction needs a single connected molecule")
    solutions, count = _decompose(markush, mol, first_only=False)
    ordered = [solutions[k] for k in sorted(solutions)]
    return ExtractionResult(tuple(ordered[:limit]), count, truncated=len(ordered) > limit)


def skeleton_matches(skeleton: MarkushStructure | str, mol: MolGraph) -> bool:
    """True iff ``extract`` would find at least one solution."""
    markush = _as_markush(skeleton)
    if not mol.is_connected:
        return False
    solutions, _ = _decompose(markush, mol, first_only=True)
    return bool(solutions)
