"""
Extended SMILES reading and canonical writing.

The grammar is ordinary SMILES restricted to a single connected structure
(no ``.``), extended with R-group placeholders ``[R1]`` .. ``[R99]`` and
attachment points ``*`` / ``[*]`` / ``[*:n]``. Stereo marks (``@``, ``/``,
``\\``) are accepted and discarded.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .canon import canonical_ranks
from .errors import DiagnosticKind, FragmentArityError, ParseDiagnostic, SmilesParseError
from .molgraph import (
    AROMATIC_SUBSET,
    ATOMIC_NUMBERS,
    ORGANIC_SUBSET,
    Atom,
    Bond,
    BondOrder,
    MolGraph,
    bare_implicit_h,
    normalize,
)

__all__ = ["parse", "parse_fragment", "write_canonical", "canonical_smiles", "write_atom_token"]

_BRACKET_RE = re.compile(
    r"(?P<isotope>\d+)?"
    r"(?P<symbol>R\d+|\*|[A-Z][a-z]?|[a-z][a-z]?)"
    r"(?P<chiral>@{1,2}(?:TH[12]|AL[12]|SP[1-3]|TB\d{1,2}|OH\d{1,2})?)?"
    r"(?P<hcount>H\d*)?"
    r"(?P<charge>\+\d+|-\d+|\+{1,3}|-{1,3})?"
    r"(?::(?P<klass>\d+))?"
)
_BOND_SYMBOLS = {
    "-": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
    "/": BondOrder.SINGLE,
    "\\": BondOrder.SINGLE,
}
_ORGANIC_TOKENS = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I", "b", "c", "n", "o", "p", "s")


def _fail(pos: int, kind: DiagnosticKind, message: str) -> SmilesParseError:
    return SmilesParseError(ParseDiagnostic(pos, kind, message))


def _bracket_atom(body: str, pos: int) -> Atom:
    m = _BRACKET_RE.fullmatch(body)
    if m is None:
        raise _fail(pos, DiagnosticKind.BAD_BRACKET_ATOM, f"cannot read bracket atom [{body}]")
    symbol = m["symbol"]
    hcount = 0
    if m["hcount"]:
        hcount = int(m["hcount"][1:] or 1)
    charge = 0
    if m["charge"]:
        c = m["charge"]
        sign = 1 if c[0] == "+" else -1
        charge = sign * (int(c[1:]) if c[1:].isdigit() else len(c))
    isotope = int(m["isotope"]) if m["isotope"] else None

    if symbol == "*" or symbol[0] == "R" and symbol[1:].isdigit():
        if hcount or charge or isotope or m["chiral"]:
            raise _fail(pos, DiagnosticKind.BAD_BRACKET_ATOM, f"placeholder [{body}] cannot carry H, charge or isotope")
        if symbol == "*":
            return Atom.attachment_point()
        number = int(symbol[1:])
        if not 1 <= number <= 99 or symbol[1] == "0":
            raise _fail(pos, DiagnosticKind.BAD_BRACKET_ATOM, f"R-group label out of range in [{body}]")
        return Atom.placeholder(symbol)

    aromatic = symbol[0].islower()
    element = symbol.capitalize()
    if element not in ATOMIC_NUMBERS or (aromatic and element not in AROMATIC_SUBSET):
        raise _fail(pos, DiagnosticKind.BAD_BRACKET_ATOM, f"unknown element symbol {symbol!r}")
    if isotope == 0:
        raise _fail(pos, DiagnosticKind.BAD_BRACKET_ATOM, "isotope must be positive")
    if element == "H" and hcount:
        raise _fail(pos, DiagnosticKind.BAD_BRACKET_ATOM, "a hydrogen atom cannot carry hydrogens")
    return Atom(element, formal_charge=charge, isotope=isotope, aromatic=aromatic,
                explicit_h=hcount, bracket=True)


@dataclass
class _Ring:
    atom: int
    order: BondOrder | None
    pos: int


def _read(text: str) -> MolGraph:
    if not text:
        raise _fail(0, DiagnosticKind.EMPTY_INPUT, "empty input")
    atoms: list[Atom] = []
    bonds: dict[tuple[int, int], BondOrder] = {}
    branch_stack: list[tuple[int, int]] = []  # (atom to resume from, position of '(')
    rings: dict[int, _Ring] = {}
    prev: int | None = None
    pending: tuple[BondOrder, int] | None = None  # explicit bond symbol and its position
    i = 0
    n = len(text)

    def add_bond(a: int, b: int, order: BondOrder | None, pos: int) -> None:
        key = (a, b) if a < b else (b, a)
        if a == b or key in bonds:
            raise _fail(pos, DiagnosticKind.DUPLICATE_RING_BOND, "atoms are already bonded")
        if order is None:
            order = BondOrder.AROMATIC if atoms[a].aromatic and atoms[b].aromatic else BondOrder.SINGLE
        bonds[key] = order

    while i < n:
        ch = text[i]
        start = i
        atom: Atom | None = None
        if ch == "[":
            close = text.find("]", i)
            if close == -1:
                raise _fail(i, DiagnosticKind.BAD_BRACKET_ATOM, "unterminated bracket atom")
            atom = _bracket_atom(text[i + 1:close], i)
            i = close + 1
        elif ch == "*":
            atom = Atom.attachment_point()
            i += 1
        elif ch.isalpha():
            for tok in _ORGANIC_TOKENS:
                if text.startswith(tok, i):
                    aromatic = tok.islower()
                    atom = Atom(tok.capitalize(), aromatic=aromatic)
                    i += len(tok)
                    break
            else:
                raise _fail(i, DiagnosticKind.UNKNOWN_TOKEN, f"unknown atom symbol {ch!r}")

        if atom is not None:
            atoms.append(atom)
            idx = len(atoms) - 1
            if prev is not None:
                add_bond(prev, idx, pending[0] if pending else None, start)
            elif pending is not None:
                raise _fail(pending[1], DiagnosticKind.UNKNOWN_TOKEN, "bond symbol before any atom")
            pending = None
            prev = idx
            continue

        if ch in _BOND_SYMBOLS:
            if pending is not None:
                raise _fail(i, DiagnosticKind.UNKNOWN_TOKEN, "two consecutive bond symbols")
            if prev is None:
                raise _fail(i, DiagnosticKind.UNKNOWN_TOKEN, "bond symbol before any atom")
            pending = (_BOND_SYMBOLS[ch], i)
            i += 1
        elif ch == "(":
            if prev is None:
                raise _fail(i, DiagnosticKind.UNBALANCED_PAREN, "branch opened before any atom")
            if pending is not None:
                raise _fail(pending[1], DiagnosticKind.UNKNOWN_TOKEN, "bond symbol before a branch")
            branch_stack.append((prev, i))
            i += 1
        elif ch == ")":
            if not branch_stack:
                raise _fail(i, DiagnosticKind.UNBALANCED_PAREN, "')' without matching '('")
            if pending is not None:
                raise _fail(pending[1], DiagnosticKind.UNKNOWN_TOKEN, "dangling bond symbol")
            if text[i - 1] == "(":
                raise _fail(i, DiagnosticKind.UNBALANCED_PAREN, "empty branch")
            prev = branch_stack.pop()[0]
            i += 1
        elif ch.isdigit() or ch == "%":
            if ch == "%":
                if len(text[i + 1:i + 3]) != 2 or not text[i + 1:i + 3].isdigit():
                    raise _fail(i, DiagnosticKind.UNKNOWN_TOKEN, "'%' must be followed by two digits")
                digit, width = int(text[i + 1:i + 3]), 3
            else:
                digit, width = int(ch), 1
            if prev is None:
                raise _fail(i, DiagnosticKind.UNKNOWN_TOKEN, "ring bond before any atom")
            order = pending[0] if pending else None
            if digit in rings:
                ring = rings.pop(digit)
                if ring.order is not None and order is not None and ring.order != order:
                    raise _fail(i, DiagnosticKind.UNKNOWN_TOKEN, f"conflicting bond symbols on ring bond {digit}")
                add_bond(ring.atom, prev, ring.order or order, i)
            else:
                rings[digit] = _Ring(prev, order, i)
            pending = None
            i += width
        elif ch == ".":
            raise _fail(i, DiagnosticKind.UNKNOWN_TOKEN, "multi-component '.' is not supported")
        else:
            raise _fail(i, DiagnosticKind.UNKNOWN_TOKEN, f"unexpected character {ch!r}")

    if pending is not None:
        raise _fail(pending[1], DiagnosticKind.UNKNOWN_TOKEN, "dangling bond symbol at end of input")
    if branch_stack:
        raise _fail(branch_stack[-1][1], DiagnosticKind.UNBALANCED_PAREN, "unclosed '('")
    if rings:
        ring = min(rings.values(), key=lambda r: r.pos)
        raise _fail(ring.pos, DiagnosticKind.UNCLOSED_RING_BOND, "ring bond never closed")
    return MolGraph(
        tuple(atoms),
        tuple(Bond(a, b, order) for (a, b), order in sorted(bonds.items())),
    )


def parse(text: str) -> MolGraph:
    """Parse extended SMILES into a normalized graph.

    Raises:
        SmilesParseError: malformed text; ``err.diagnostic`` locates the problem.
        ValenceError: an atom exceeds its valence.
        AromaticityError: declared aromatic atoms form no 4n+2 ring.
    """
    return normalize(_read(text))


def parse_fragment(text: str) -> MolGraph:
    """Parse a substituent: exactly one attachment point, single-bonded to one atom."""
    g = parse(text)
    points = [i for i, a in enumerate(g.atoms) if a.attachment]
    if len(points) != 1:
        raise FragmentArityError(f"{text!r} has {len(points)} attachment points, expected 1")
    p = points[0]
    if g.degree(p) != 1:
        raise FragmentArityError(f"attachment point in {text!r} has degree {g.degree(p)}, expected 1")
    if g.bond_between(p, g.adjacency[p][0]).order is not BondOrder.SINGLE:
        raise FragmentArityError(f"attachment bond in {text!r} must be single")
    return g


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------

def write_atom_token(g: MolGraph, i: int) -> str:
    atom = g.atoms[i]
    if atom.attachment:
        return "*"
    if atom.rlabel is not None:
        return f"[{atom.rlabel}]"
    symbol = atom.element.lower() if atom.aromatic else atom.element
    if (
        atom.element in ORGANIC_SUBSET
        and atom.formal_charge == 0
        and atom.isotope is None
        and (not atom.aromatic or atom.element in AROMATIC_SUBSET)
        and bare_implicit_h(g, i) == atom.total_h
    ):
        return symbol
    parts = ["[", str(atom.isotope) if atom.isotope else "", symbol]
    h = atom.total_h
    if h:
        parts.append("H" if h == 1 else f"H{h}")
    c = atom.formal_charge
    if c:
        sign = "+" if c > 0 else "-"
        parts.append(sign if abs(c) == 1 else f"{sign}{abs(c)}")
    parts.append("]")
    return "".join(parts)


def _bond_symbol(g: MolGraph, i: int, j: int) -> str:
    order = g.bond_between(i, j).order
    both_aromatic = g.atoms[i].aromatic and g.atoms[j].aromatic
    if order is BondOrder.SINGLE:
        return "-" if both_aromatic else ""
    if order is BondOrder.AROMATIC:
        return "" if both_aromatic else ":"
    return "=" if order is BondOrder.DOUBLE else "#"


def _ring_label(d: int) -> str:
    return str(d) if d < 10 else f"%{d}"


def _write(g: MolGraph, ranks: tuple[int, ...]) -> str:
    n = len(g.atoms)
    start = min(range(n), key=ranks.__getitem__)

    # pass 1: spanning tree in rank order, recording ring closures
    children: dict[int, list[int]] = {i: [] for i in range(n)}
    opens: dict[int, list[int]] = {i: [] for i in range(n)}  # opener -> closers
    closes: dict[int, list[int]] = {i: [] for i in range(n)}  # closer -> openers
    visited = [False] * n
    visited[start] = True
    stack = [(start, -1, iter(sorted(g.adjacency[start], key=ranks.__getitem__)))]
    while stack:
        u, parent, it = stack[-1]
        for v in it:
            if v == parent:
                continue
            if visited[v]:
                # back edge; the ancestor v opens, u closes
                if u not in opens[v] and v not in opens[u]:
                    opens[v].append(u)
                    closes[u].append(v)
                continue
            visited[v] = True
            children[u].append(v)
            stack.append((v, u, iter(sorted(g.adjacency[v], key=ranks.__getitem__))))
            break
        else:
            stack.pop()
    if not all(visited):
        raise ValueError("cannot write a disconnected graph as a single extended SMILES")

    # pass 2: emit
    out: list[str] = []
    free = list(range(1, 100))
    digit_of: dict[tuple[int, int], int] = {}

    def emit(u: int) -> None:
        out.append(write_atom_token(g, u))
        for v in sorted(closes[u], key=ranks.__getitem__):
            d = digit_of.pop((v, u))
            out.append(_ring_label(d))
            free.append(d)
            free.sort()
        for v in sorted(opens[u], key=ranks.__getitem__):
            d = free.pop(0)
            digit_of[(u, v)] = d
            out.append(_bond_symbol(g, u, v) + _ring_label(d))
        kids = children[u]
        for k, v in enumerate(kids):
            last = k == len(kids) - 1
            if not last:
                out.append("(")
            out.append(_bond_symbol(g, u, v))
            emit(v)
            if not last:
                out.append(")")

    emit(start)
    return "".join(out)


def write_canonical(g: MolGraph) -> str:
    """Canonical extended SMILES of a normalized, connected graph."""
    if not g.atoms:
        raise ValueError("cannot write an empty graph")
    return _write(g, canonical_ranks(g))


def canonical_smiles(text: str) -> str:
    return write_canonical(parse(text))
