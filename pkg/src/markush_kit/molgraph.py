"""
Attributed molecular graphs.

A :class:`MolGraph` is an immutable bag of :class:`Atom` and :class:`Bond`
values plus derived views (adjacency, rings). Graphs produced by the SMILES
parser are *normalized*: implicit hydrogens assigned, rings perceived and
aromaticity marked. Placeholder nodes (R-group labels and attachment points)
are atoms without an element.
"""

from __future__ import annotations

import enum
import re
from collections import deque
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Sequence

from .errors import ValenceError

__all__ = [
    "Atom",
    "Bond",
    "BondOrder",
    "MolGraph",
    "ATOMIC_NUMBERS",
    "ORGANIC_SUBSET",
    "AROMATIC_SUBSET",
    "allowed_valences",
    "bare_implicit_h",
    "assign_implicit_hydrogens",
    "check_valences",
    "normalize",
    "graphs_equal",
    "rlabel_number",
]


class BondOrder(enum.IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4


ATOMIC_NUMBERS: dict[str, int] = {
    "H": 1, "B": 5, "C": 6, "N": 7, "O": 8, "F": 9,
    "P": 15, "S": 16, "Cl": 17, "Br": 35, "I": 53,
}
ORGANIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})
AROMATIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S"})

# Allowed valences for neutral atoms, lowest first.
_VALENCES: dict[str, tuple[int, ...]] = {
    "H": (1,), "B": (3,), "C": (4,), "N": (3,), "O": (2,), "F": (1,),
    "P": (3, 5), "S": (2, 4, 6), "Cl": (1,), "Br": (1,), "I": (1,),
}

_RLABEL_RE = re.compile(r"R([1-9][0-9]?)")


def rlabel_number(label: str) -> int:
    m = _RLABEL_RE.fullmatch(label)
    if m is None:
        raise ValueError(f"not an R-group label: {label!r}")
    return int(m.group(1))


def allowed_valences(element: str, charge: int = 0) -> tuple[int, ...]:
    """Valences permitted for ``element`` carrying ``charge``.

    Lone-pair elements (N, O, S, P, halogens) gain one bond per positive
    charge and lose one per negative charge; carbon loses one either way;
    boron behaves as the mirror image of the lone-pair elements.
    """
    base = _VALENCES[element]
    if charge == 0:
        return base
    if element in ("C", "H"):
        shift = -abs(charge)
    elif element == "B":
        shift = -charge
    else:
        shift = charge
    shifted = tuple(v + shift for v in base if v + shift >= 0)
    return shifted or (0,)


@dataclass(frozen=True, slots=True)
class Atom:
    """One node of a molecular graph.

    ``bracket`` records that the hydrogen count is fixed as written
    (``explicit_h``) rather than derived from valence. It does not take
    part in graph equality; only the total hydrogen count does.
    """

    element: str | None
    formal_charge: int = 0
    isotope: int | None = None
    aromatic: bool = False
    explicit_h: int = 0
    implicit_h: int = 0
    rlabel: str | None = None
    attachment: bool = False
    bracket: bool = False

    def __post_init__(self) -> None:
        if self.rlabel is not None and self.attachment:
            raise ValueError("an atom cannot be both an R-group and an attachment point")
        if self.is_placeholder:
            if self.element is not None:
                raise ValueError("placeholder nodes carry no element")
            if self.formal_charge or self.explicit_h or self.implicit_h or self.isotope or self.aromatic:
                raise ValueError("placeholder nodes carry no charge, isotope, hydrogens or aromaticity")
            if self.rlabel is not None:
                rlabel_number(self.rlabel)
        else:
            if self.element not in ATOMIC_NUMBERS:
                raise ValueError(f"unknown element {self.element!r}")
        if self.explicit_h < 0 or self.implicit_h < 0:
            raise ValueError("hydrogen counts must be non-negative")
        if self.isotope is not None and self.isotope <= 0:
            raise ValueError("isotope must be a positive mass number")

    @property
    def is_placeholder(self) -> bool:
        return self.rlabel is not None or self.attachment

    @property
    def is_heavy(self) -> bool:
        return self.element is not None and self.element != "H"

    @property
    def total_h(self) -> int:
        return self.explicit_h + self.implicit_h

    @staticmethod
    def placeholder(label: str) -> Atom:
        return Atom(None, rlabel=label)

    @staticmethod
    def attachment_point() -> Atom:
        return Atom(None, attachment=True)


@dataclass(frozen=True, slots=True)
class Bond:
    a: int
    b: int
    order: BondOrder = BondOrder.SINGLE

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise ValueError("bond endpoints must be distinct")
        if self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)
        object.__setattr__(self, "order", BondOrder(self.order))

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.a, self.b)

    def other(self, i: int) -> int:
        return self.b if i == self.a else self.a


@dataclass(frozen=True)
class MolGraph:
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "bonds", tuple(self.bonds))
        n = len(self.atoms)
        seen: set[tuple[int, int]] = set()
        for bond in self.bonds:
            if not (0 <= bond.a < n and 0 <= bond.b < n):
                raise ValueError(f"bond {bond.endpoints} out of range for {n} atoms")
            if bond.endpoints in seen:
                raise ValueError(f"duplicate bond {bond.endpoints}")
            seen.add(bond.endpoints)

    def __len__(self) -> int:
        return len(self.atoms)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in self.atoms]
        for bond in self.bonds:
            nbrs[bond.a].append(bond.b)
            nbrs[bond.b].append(bond.a)
        return tuple(tuple(sorted(x)) for x in nbrs)

    @cached_property
    def _bond_map(self) -> dict[tuple[int, int], Bond]:
        return {bond.endpoints: bond for bond in self.bonds}

    def bond_between(self, i: int, j: int) -> Bond | None:
        return self._bond_map.get((i, j) if i < j else (j, i))

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    @cached_property
    def rings(self) -> tuple[tuple[int, ...], ...]:
        from .rings import perceive_rings

        return perceive_rings(self)

    @cached_property
    def ring_bonds(self) -> frozenset[tuple[int, int]]:
        out = set()
        for ring in self.rings:
            for k, i in enumerate(ring):
                j = ring[(k + 1) % len(ring)]
                out.add((i, j) if i < j else (j, i))
        return frozenset(out)

    def components(self) -> list[list[int]]:
        seen = [False] * len(self.atoms)
        comps = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            seen[start] = True
            comp, queue = [], deque([start])
            while queue:
                i = queue.popleft()
                comp.append(i)
                for j in self.adjacency[i]:
                    if not seen[j]:
                        seen[j] = True
                        queue.append(j)
            comps.append(sorted(comp))
        return comps

    @property
    def is_connected(self) -> bool:
        return len(self.atoms) > 0 and len(self.components()) == 1

    @property
    def heavy_atom_count(self) -> int:
        return sum(1 for a in self.atoms if a.is_heavy)

    def placeholder_indices(self) -> list[int]:
        return [i for i, a in enumerate(self.atoms) if a.is_placeholder]

    def rlabels(self) -> list[str]:
        return [a.rlabel for a in self.atoms if a.rlabel is not None]

    def replace_atoms(self, changes: dict[int, Atom]) -> MolGraph:
        atoms = list(self.atoms)
        for i, atom in changes.items():
            atoms[i] = atom
        return MolGraph(tuple(atoms), self.bonds)

    def permuted(self, order: Sequence[int]) -> MolGraph:
        """Renumber atoms so that new atom ``k`` is old atom ``order[k]``."""
        if sorted(order) != list(range(len(self.atoms))):
            raise ValueError("order must be a permutation of atom indices")
        new_index = {old: new for new, old in enumerate(order)}
        atoms = tuple(self.atoms[old] for old in order)
        bonds = tuple(
            Bond(new_index[b.a], new_index[b.b], b.order)
            for b in sorted(self.bonds, key=lambda b: sorted((new_index[b.a], new_index[b.b])))
        )
        return MolGraph(atoms, bonds)

    def subgraph(self, indices: Iterable[int]) -> tuple[MolGraph, dict[int, int]]:
        """Induced subgraph on ``indices``; returns it with the old->new index map."""
        keep = sorted(set(indices))
        new_index = {old: new for new, old in enumerate(keep)}
        bonds = tuple(
            Bond(new_index[b.a], new_index[b.b], b.order)
            for b in self.bonds
            if b.a in new_index and b.b in new_index
        )
        return MolGraph(tuple(self.atoms[i] for i in keep), bonds), new_index


# ---------------------------------------------------------------------------
# Valence bookkeeping
# ---------------------------------------------------------------------------

def _bond_load(g: MolGraph, i: int) -> tuple[int, int]:
    """(sum of non-aromatic bond orders, number of aromatic bonds) at atom ``i``."""
    plain = n_arom = 0
    for j in g.adjacency[i]:
        order = g.bond_between(i, j).order
        if order is BondOrder.AROMATIC:
            n_arom += 1
        else:
            plain += int(order)
    return plain, n_arom


def bare_implicit_h(g: MolGraph, i: int, explicit_h: int = 0) -> int:
    """Hydrogens an atom gets when written as a bare organic-subset token.

    The lowest allowed valence that accommodates the bonds is filled with
    hydrogens. An aromatic atom donates one further valence unit to the
    pi system when it has room for it.
    """
    atom = g.atoms[i]
    if atom.is_placeholder:
        return 0
    plain, n_arom = _bond_load(g, i)
    used = plain + n_arom + explicit_h
    valences = allowed_valences(atom.element, atom.formal_charge)
    target = next((v for v in valences if v >= used), None)
    if target is None:
        raise ValenceError(
            f"atom {i} ({atom.element}) has bond order sum {used}, max valence {valences[-1]}"
        )
    h = target - used
    if atom.aromatic and n_arom and h > 0:
        h -= 1
    return h


def check_valences(g: MolGraph) -> None:
    for i, atom in enumerate(g.atoms):
        if atom.is_placeholder:
            continue
        plain, n_arom = _bond_load(g, i)
        used = plain + n_arom + atom.total_h
        limit = allowed_valences(atom.element, atom.formal_charge)[-1]
        if used > limit:
            raise ValenceError(
                f"atom {i} ({atom.element}) uses valence {used}, max allowed {limit}"
            )


def assign_implicit_hydrogens(g: MolGraph) -> MolGraph:
    """Fill ``implicit_h`` for every non-bracket atom from the valence table."""
    changes = {}
    for i, atom in enumerate(g.atoms):
        if atom.is_placeholder:
            h = 0
        elif atom.bracket:
            h = 0
        else:
            h = bare_implicit_h(g, i, atom.explicit_h)
        if h != atom.implicit_h:
            changes[i] = replace(atom, implicit_h=h)
    out = g.replace_atoms(changes) if changes else g
    check_valences(out)
    return out


def normalize(g: MolGraph) -> MolGraph:
    """Hydrogens, rings and aromaticity, in that order."""
    from .rings import perceive_aromaticity

    return perceive_aromaticity(assign_implicit_hydrogens(g))


def graphs_equal(a: MolGraph, b: MolGraph) -> bool:
    """True iff ``a`` and ``b`` are isomorphic.

    Compares element, charge, isotope, aromaticity, total hydrogen count,
    bond order and placeholder identity.
    """
    from .substruct import is_isomorphic

    return is_isomorphic(a, b)
