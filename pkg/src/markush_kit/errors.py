"""Exception hierarchy shared by all modules."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class MarkushKitError(Exception):
    """Base class for every error raised by this package."""


class ValenceError(MarkushKitError, ValueError):
    """An atom carries more bonds and hydrogens than its valence allows."""


class AromaticityError(MarkushKitError, ValueError):
    """Atoms or bonds were declared aromatic but no aromatic ring supports them."""


class FragmentArityError(MarkushKitError, ValueError):
    """A substituent fragment does not have exactly one single-bonded attachment point."""


class MarkushFormatError(MarkushKitError, ValueError):
    """A skeleton violates the Markush structure invariants."""


class MissingLabelError(MarkushKitError, KeyError):
    """An assignment does not cover the labels of its skeleton."""

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class EmptyGraphError(MarkushKitError, ValueError):
    """An operation that needs at least one atom got an empty graph."""


class LengthMismatchError(MarkushKitError, ValueError):
    """Two sequences or bitsets that must have equal length do not."""


class GenerationExhaustedError(MarkushKitError, RuntimeError):
    """The retry budget for sampling a valid record ran out."""


class ClaimFormatError(MarkushKitError, ValueError):
    """A claim bundle is malformed or inconsistent with its Markush skeleton."""


class DiagnosticKind(str, enum.Enum):
    UNKNOWN_TOKEN = "UnknownToken"
    UNBALANCED_PAREN = "UnbalancedParen"
    UNCLOSED_RING_BOND = "UnclosedRingBond"
    BAD_BRACKET_ATOM = "BadBracketAtom"
    DUPLICATE_RING_BOND = "DuplicateRingBond"
    EMPTY_INPUT = "EmptyInput"


@dataclass(frozen=True)
class ParseDiagnostic:
    position: int
    kind: DiagnosticKind
    message: str


class SmilesParseError(MarkushKitError, ValueError):
    """Malformed extended SMILES; ``diagnostic`` says where and why."""

    def __init__(self, diagnostic: ParseDiagnostic):
        super().__init__(
            f"{diagnostic.kind.value} at position {diagnostic.position}: {diagnostic.message}"
        )
        self.diagnostic = diagnostic
