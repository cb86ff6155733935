"""Model checking, satisfiability and runtime monitoring for HyperLTL."""

from .errors import HlvError
from .formula import QuantifiedFormula, parse_body, parse_formula, pretty_print
from .kripke import KripkeStructure, UltimatelyPeriodicTrace, parse_kripke

__all__ = [
    "HlvError",
    "KripkeStructure",
    "QuantifiedFormula",
    "UltimatelyPeriodicTrace",
    "parse_body",
    "parse_formula",
    "parse_kripke",
    "pretty_print",
]

__version__ = "0.1.0"
