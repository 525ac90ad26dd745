"""Proof search, proof checking, cut elimination and Kripke countermodels
for bi-intuitionistic tense logic and its extensions."""

from .syntax import parse_formula, parse_structure, print_formula, print_structure

__version__ = "0.1.0"
__all__ = ["parse_formula", "parse_structure", "print_formula", "print_structure"]
