"""
Ring and aromaticity perception.

Rings are a minimum cycle basis (SSSR) found with Horton's candidate set
and Gaussian elimination over GF(2). Aromaticity is decided ring by ring
with the Hueckel 4n+2 rule; fused systems are not perceived globally.
"""

from __future__ import annotations

from collections import deque
from dataclasses import replace

from .errors import AromaticityError
from .molgraph import Atom, Bond, BondOrder, MolGraph, bare_implicit_h

__all__ = ["perceive_rings", "perceive_aromaticity", "cyclic_bonds"]

_AROMATIC_ELEMENTS = frozenset({"C", "N", "O", "S"})
_ELECTRONEGATIVE = frozenset({"N", "O", "S"})


def _edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def cyclic_bonds(g: MolGraph) -> set[tuple[int, int]]:
    """Bonds that lie on at least one cycle (i.e. are not bridges)."""
    n = len(g.atoms)
    disc = [-1] * n
    low = [0] * n
    bridges: set[tuple[int, int]] = set()
    t = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = t
        t += 1
        # iterative DFS: (node, parent, neighbour iterator)
        stack = [(root, -1, iter(g.adjacency[root]))]
        while stack:
            u, parent, it = stack[-1]
            advanced = False
            for v in it:
                if v == parent:
                    continue
                if disc[v] == -1:
                    disc[v] = low[v] = t
                    t += 1
                    stack.append((v, u, iter(g.adjacency[v])))
                    advanced = True
                    break
                low[u] = min(low[u], disc[v])
            if not advanced:
                stack.pop()
                if parent != -1:
                    low[parent] = min(low[parent], low[u])
                    if low[u] > disc[parent]:
                        bridges.add(_edge(u, parent))
    return {b.endpoints for b in g.bonds} - bridges


def _cycle_order(edges: list[tuple[int, int]]) -> tuple[int, ...]:
    """Walk an edge set forming a simple cycle; start at its lowest atom."""
    nbrs: dict[int, list[int]] = {}
    for i, j in edges:
        nbrs.setdefault(i, []).append(j)
        nbrs.setdefault(j, []).append(i)
    start = min(nbrs)
    order = [start]
    prev, cur = start, min(nbrs[start])
    while cur != start:
        order.append(cur)
        a, b = nbrs[cur]
        prev, cur = cur, (b if a == prev else a)
    return tuple(order)


def perceive_rings(g: MolGraph) -> tuple[tuple[int, ...], ...]:
    """Smallest set of smallest rings, each as an ordered atom cycle.

    Deterministic for a fixed atom ordering. Every cyclic bond is covered.
    """
    cyc = cyclic_bonds(g)
    if not cyc:
        return ()
    atoms = sorted({i for e in cyc for i in e})
    nbrs: dict[int, list[int]] = {i: [] for i in atoms}
    for i, j in sorted(cyc):
        nbrs[i].append(j)
        nbrs[j].append(i)
    edge_bit = {e: k for k, e in enumerate(sorted(cyc))}
    edges_of_bit = sorted(cyc)

    # cyclomatic number of the cyclic part
    seen: set[int] = set()
    n_comp = 0
    for s in atoms:
        if s in seen:
            continue
        n_comp += 1
        queue = deque([s])
        seen.add(s)
        while queue:
            u = queue.popleft()
            for v in nbrs[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
    needed = len(cyc) - len(atoms) + n_comp

    # Horton candidates: for every root v and edge (x, y), P(v,x) + xy + P(y,v)
    candidates: dict[int, int] = {}
    for v in atoms:
        parent = {v: None}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for w in nbrs[u]:
                if w not in parent:
                    parent[w] = u
                    queue.append(w)

        def path(x: int) -> list[int]:
            out = [x]
            while parent[out[-1]] is not None:
                out.append(parent[out[-1]])
            return out

        for x, y in edges_of_bit:
            if x not in parent:
                continue
            if parent.get(x) == y or parent.get(y) == x:
                continue
            px, py = path(x), path(y)
            if set(px) & set(py) != {v}:
                continue
            mask = 1 << edge_bit[(x, y)]
            for p in (px, py):
                for a, b in zip(p, p[1:]):
                    mask |= 1 << edge_bit[_edge(a, b)]
            candidates[mask] = len(px) + len(py) - 1

    ordered = sorted(
        candidates.items(),
        key=lambda kv: (kv[1], sorted({i for k in _bits(kv[0]) for i in edges_of_bit[k]})),
    )
    basis: dict[int, int] = {}  # pivot bit -> reduced vector
    rings = []
    for mask, _ in ordered:
        vec = mask
        while vec:
            pivot = vec.bit_length() - 1
            if pivot not in basis:
                basis[pivot] = vec
                rings.append(_cycle_order([edges_of_bit[k] for k in _bits(mask)]))
                break
            vec ^= basis[pivot]
        if len(rings) == needed:
            break
    return tuple(rings)


def _bits(mask: int) -> list[int]:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return out


# ---------------------------------------------------------------------------
# Aromaticity
# ---------------------------------------------------------------------------

def _pi_electrons(
    g: MolGraph,
    i: int,
    orders: dict[tuple[int, int], BondOrder],
    aromatic: set[int],
    ring_edges: frozenset[tuple[int, int]],
) -> int | None:
    """Pi electrons atom ``i`` donates to a ring, or None if it cannot take part."""
    atom = g.atoms[i]
    if atom.element not in _AROMATIC_ELEMENTS:
        return None
    charge = atom.formal_charge
    connections = g.degree(i) + atom.total_h
    ring_double = False
    exo_partner = None
    for j in g.adjacency[i]:
        order = orders[_edge(i, j)]
        if order is BondOrder.TRIPLE:
            return None
        if order is BondOrder.DOUBLE:
            if _edge(i, j) in ring_edges:
                ring_double = True
            else:
                exo_partner = g.atoms[j].element
    if ring_double:
        return 1
    if exo_partner is not None:
        if atom.element == "C" and exo_partner in _ELECTRONEGATIVE:
            return 0
        return None
    el = atom.element
    if i in aromatic:
        if el == "C":
            return {0: 1, -1: 2, 1: 0}.get(charge)
        if el == "N":
            if charge == 0:
                return 2 if connections == 3 else 1 if connections == 2 else None
            return {1: 1, -1: 2}.get(charge)
        if connections != 2 and charge == 0:
            return None
        return {0: 2, 1: 1}.get(charge)
    # saturated, non-aromatic atom: only lone pairs or charges help
    if el == "C":
        if connections > 3:
            return None
        return {-1: 2, 1: 0}.get(charge)
    if el == "N":
        if charge == 0 and connections <= 3:
            return 2
        return 2 if charge == -1 else None
    return 2 if charge == 0 and connections == 2 else None


def perceive_aromaticity(g: MolGraph) -> MolGraph:
    """Mark atoms and bonds of 4n+2 rings aromatic. Idempotent.

    Atoms declared aromatic in the input must end up in some aromatic
    ring, otherwise :class:`AromaticityError` is raised. Newly aromatic
    atoms whose hydrogen count would not survive a bare lowercase token
    have it pinned as an explicit count.
    """
    declared = {i for i, a in enumerate(g.atoms) if a.aromatic}
    for bond in g.bonds:
        if bond.order is BondOrder.AROMATIC and not (bond.a in declared and bond.b in declared):
            raise AromaticityError(f"aromatic bond {bond.endpoints} joins a non-aromatic atom")
    rings = g.rings
    if not rings:
        if declared:
            raise AromaticityError(f"aromatic atom {min(declared)} is not in a ring")
        return g

    ring_edges = g.ring_bonds
    orders = {b.endpoints: b.order for b in g.bonds}
    aromatic: set[int] = set(declared)
    aromatic_rings: set[int] = set()
    changed = True
    while changed:
        changed = False
        for k, ring in enumerate(rings):
            if k in aromatic_rings:
                continue
            total = 0
            for i in ring:
                e = _pi_electrons(g, i, orders, aromatic, ring_edges)
                if e is None:
                    break
                total += e
            else:
                if total % 4 == 2:
                    aromatic_rings.add(k)
                    aromatic.update(ring)
                    for m, i in enumerate(ring):
                        orders[_edge(i, ring[(m + 1) % len(ring)])] = BondOrder.AROMATIC
                    changed = True

    covered = {i for k in aromatic_rings for i in rings[k]}
    stray = declared - covered
    if stray:
        raise AromaticityError(f"aromatic atom {min(stray)} is not in any 4n+2 ring")
    covered_edges = {
        _edge(r[m], r[(m + 1) % len(r)]) for k in aromatic_rings for r in [rings[k]] for m in range(len(r))
    }
    for bond in g.bonds:
        if bond.order is BondOrder.AROMATIC and bond.endpoints not in covered_edges:
            raise AromaticityError(f"aromatic bond {bond.endpoints} is not in any 4n+2 ring")

    if covered == declared and all(orders[b.endpoints] == b.order for b in g.bonds):
        return g

    bonds = tuple(Bond(b.a, b.b, orders[b.endpoints]) for b in g.bonds)
    atoms = list(g.atoms)
    for i in covered - declared:
        atoms[i] = replace(atoms[i], aromatic=True)
    out = MolGraph(tuple(atoms), bonds)
    pins: dict[int, Atom] = {}
    for i in covered - declared:
        atom = out.atoms[i]
        if atom.bracket:
            continue
        if bare_implicit_h(out, i) != atom.total_h:
            pins[i] = replace(atom, bracket=True, explicit_h=atom.total_h, implicit_h=0)
    return out.replace_atoms(pins) if pins else out
