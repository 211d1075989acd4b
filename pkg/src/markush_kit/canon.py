"""
Canonical atom ranking.

Iterative neighbourhood refinement (Morgan style) over atom invariants,
with ties broken by splitting the lowest tied class and refining again.
"""

from __future__ import annotations

from .molgraph import ATOMIC_NUMBERS, MolGraph, rlabel_number

__all__ = ["atom_invariant", "canonical_ranks"]


def atom_invariant(g: MolGraph, i: int) -> tuple[int, ...]:
    """Order-independent description of atom ``i``.

    Attachment points sort before R-group placeholders, which sort before
    real atoms, so canonical strings of fragments start with ``*``.
    """
    atom = g.atoms[i]
    if atom.attachment:
        kind, label = 0, 0
    elif atom.rlabel is not None:
        kind, label = 1, rlabel_number(atom.rlabel)
    else:
        kind, label = 2, 0
    return (
        kind,
        label,
        g.degree(i),
        ATOMIC_NUMBERS.get(atom.element, 0),
        atom.isotope or 0,
        atom.formal_charge,
        atom.total_h,
        int(atom.aromatic),
    )


def _rank(keys: list) -> list[int]:
    """Competition ranking: rank = number of atoms with a strictly smaller key."""
    order = sorted(range(len(keys)), key=keys.__getitem__)
    ranks = [0] * len(keys)
    for pos, i in enumerate(order):
        if pos and keys[i] == keys[order[pos - 1]]:
            ranks[i] = ranks[order[pos - 1]]
        else:
            ranks[i] = pos
    return ranks


def _refine(g: MolGraph, ranks: list[int]) -> list[int]:
    n_classes = len(set(ranks))
    while True:
        keys = [
            (
                ranks[i],
                tuple(sorted((ranks[j], int(g.bond_between(i, j).order)) for j in g.adjacency[i])),
            )
            for i in range(len(ranks))
        ]
        ranks = _rank(keys)
        n = len(set(ranks))
        if n == n_classes:
            return ranks
        n_classes = n


def canonical_ranks(g: MolGraph) -> tuple[int, ...]:
    """A total order over atoms that is invariant under atom renumbering."""
    n = len(g.atoms)
    if n == 0:
        return ()
    ranks = _refine(g, _rank([atom_invariant(g, i) for i in range(n)]))
    while len(set(ranks)) < n:
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied = min(r for r, c in counts.items() if c > 1)
        members = [i for i in range(n) if ranks[i] == tied]
        # members of a refined class are symmetry-equivalent in practice, so
        # which one is split off does not change the canonical string
        ranks = [r + 1 if r == tied and i != members[0] else r for i, r in enumerate(ranks)]
        ranks = _refine(g, ranks)
    return tuple(ranks)
