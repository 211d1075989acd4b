"""Markush claim matching: extended SMILES, skeleton matching, substituent
extraction, claim checking, corpus generation and scoring."""

from .errors import (
    AromaticityError,
    ClaimFormatError,
    EmptyGraphError,
    FragmentArityError,
    GenerationExhaustedError,
    LengthMismatchError,
    MarkushFormatError,
    MarkushKitError,
    MissingLabelError,
    ParseDiagnostic,
    SmilesParseError,
    ValenceError,
)
from .molgraph import Atom, Bond, BondOrder, MolGraph, assign_implicit_hydrogens, graphs_equal
from .rings import perceive_aromaticity, perceive_rings
from .canon import canonical_ranks
from .smiles import canonical_smiles, parse, parse_fragment, write_canonical

__version__ = "0.1.0"
