"""
Subgraph isomorphism (monomorphism) search.

A VF2-style backtracking search: query atoms are mapped in a fixed order,
each candidate is checked for atom compatibility, degree and bonds to the
already-mapped neighbours. Candidates are taken in ascending target index,
so embeddings come out in lexicographic order of their target tuples.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import islice
from typing import Iterator, Sequence

from .molgraph import Atom, BondOrder, MolGraph

__all__ = [
    "CompatPolicy",
    "DEFAULT_POLICY",
    "STRICT_POLICY",
    "find_embeddings",
    "has_embedding",
    "iter_embeddings",
    "connected_order",
    "is_isomorphic",
]

MatchMap = tuple[int, ...]


@dataclass(frozen=True)
class CompatPolicy:
    """Which atom and bond attributes must agree for a query to match a target.

    Subclass and override :meth:`atoms_compatible` / :meth:`bonds_compatible`
    for custom rules.
    """

    element: bool = True
    placeholder_wildcard: bool = True
    aromatic_tolerant: bool = False
    check_hydrogens: bool = False
    atom_aromaticity: bool = False

    def atoms_compatible(self, query: MolGraph, qi: int, target: MolGraph, ti: int) -> bool:
        qa, ta = query.atoms[qi], target.atoms[ti]
        if qa.is_placeholder:
            if self.placeholder_wildcard:
                return True
            return ta.rlabel == qa.rlabel and ta.attachment == qa.attachment
        if ta.is_placeholder:
            return False
        return self._real_atoms_compatible(qa, ta)

    def _real_atoms_compatible(self, qa: Atom, ta: Atom) -> bool:
        if self.element and (
            qa.element != ta.element
            or qa.formal_charge != ta.formal_charge
            or qa.isotope != ta.isotope
        ):
            return False
        if self.atom_aromaticity and qa.aromatic != ta.aromatic:
            return False
        if self.check_hydrogens and qa.total_h != ta.total_h:
            return False
        return True

    def bonds_compatible(self, q: BondOrder, t: BondOrder) -> bool:
        if q == t:
            return True
        if self.aromatic_tolerant:
            pair = {q, t}
            return BondOrder.AROMATIC in pair and bool(pair & {BondOrder.SINGLE, BondOrder.DOUBLE})
        return False


DEFAULT_POLICY = CompatPolicy()
STRICT_POLICY = CompatPolicy(placeholder_wildcard=False, check_hydrogens=True, atom_aromaticity=True)


def connected_order(g: MolGraph) -> list[int]:
    """Breadth-first atom order, highest degree first within each component."""
    seen = [False] * len(g.atoms)
    order: list[int] = []
    for root in sorted(range(len(g.atoms)), key=lambda i: (-g.degree(i), i)):
        if seen[root]:
            continue
        seen[root] = True
        queue = deque([root])
        while queue:
            u = queue.popleft()
            order.append(u)
            for v in g.adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
    return order


def iter_embeddings(
    query: MolGraph,
    target: MolGraph,
    compat: CompatPolicy = DEFAULT_POLICY,
    order: Sequence[int] | None = None,
) -> Iterator[MatchMap]:
    """Yield every embedding of ``query`` into ``target`` as a tuple indexed by query atom.

    With the default ``order`` (query atom index order) the embeddings are
    produced in lexicographic order of the target tuples.
    """
    nq, nt = len(query.atoms), len(target.atoms)
    if nq == 0 or nq > nt or len(query.bonds) > len(target.bonds):
        return
    order = list(range(nq)) if order is None else list(order)
    position = {q: k for k, q in enumerate(order)}

    # per step: earlier-mapped neighbours with the bond order to respect
    back: list[list[tuple[int, BondOrder]]] = []
    for k, q in enumerate(order):
        back.append([
            (p, query.bond_between(q, p).order)
            for p in query.adjacency[q]
            if position[p] < k
        ])

    candidates_for: list[list[int]] = []
    for q in order:
        dq = query.degree(q)
        candidates_for.append([
            t for t in range(nt)
            if target.degree(t) >= dq and compat.atoms_compatible(query, q, target, t)
        ])
        if not candidates_for[-1]:
            return
    allowed = [set(c) for c in candidates_for]

    mapping = [-1] * nq
    used = [False] * nt

    def extend(k: int) -> Iterator[MatchMap]:
        if k == nq:
            yield tuple(mapping)
            return
        q = order[k]
        links = back[k]
        if links:
            pool = sorted(t for t in target.adjacency[mapping[links[0][0]]] if t in allowed[k])
        else:
            pool = candidates_for[k]
        for t in pool:
            if used[t]:
                continue
            ok = True
            for p, qorder in links:
                bond = target.bond_between(t, mapping[p])
                if bond is None or not compat.bonds_compatible(qorder, bond.order):
                    ok = False
                    break
            if not ok:
                continue
            mapping[q] = t
            used[t] = True
            yield from extend(k + 1)
            used[t] = False
            mapping[q] = -1

    yield from extend(0)


def find_embeddings(
    query: MolGraph,
    target: MolGraph,
    compat: CompatPolicy = DEFAULT_POLICY,
    limit: int = 1000,
) -> list[MatchMap]:
    """Up to ``limit`` embeddings in lexicographic order of mapped target indices."""
    if not query.atoms:
        raise ValueError("query graph is empty")
    if limit < 1:
        raise ValueError("limit must be at least 1")
    if _is_index_connected(query):
        return list(islice(iter_embeddings(query, target, compat), limit))
    # A query whose index order is not connected would search without
    # adjacency pruning; enumerate fully in connected order and sort instead.
    found = sorted(iter_embeddings(query, target, compat, connected_order(query)))
    return found[:limit]


def _is_index_connected(g: MolGraph) -> bool:
    """True when every atom after the first of its component bonds to an earlier atom."""
    seen_component_roots = 0
    for i in range(len(g.atoms)):
        if not any(j < i for j in g.adjacency[i]):
            seen_component_roots += 1
    return seen_component_roots == len(g.components())


def has_embedding(query: MolGraph, target: MolGraph, compat: CompatPolicy = DEFAULT_POLICY) -> bool:
    if not query.atoms:
        raise ValueError("query graph is empty")
    return next(iter_embeddings(query, target, compat, connected_order(query)), None) is not None


def _signature(g: MolGraph) -> list:
    return sorted(
        (a.element or "", a.rlabel or "", a.attachment, a.formal_charge, a.isotope or 0,
         a.aromatic, a.total_h, g.degree(i))
        for i, a in enumerate(g.atoms)
    )


def is_isomorphic(a: MolGraph, b: MolGraph) -> bool:
    if len(a.atoms) != len(b.atoms) or len(a.bonds) != len(b.bonds):
        return False
    if sorted(int(x.order) for x in a.bonds) != sorted(int(x.order) for x in b.bonds):
        return False
    if _signature(a) != _signature(b):
        return False
    if not a.atoms:
        return True
    # equal bond counts make an injective edge-preserving map a bijection on bonds
    return next(iter_embeddings(a, b, STRICT_POLICY, connected_order(a)), None) is not None
