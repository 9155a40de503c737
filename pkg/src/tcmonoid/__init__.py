"""Congruence enumeration for finitely presented monoids."""

from .concrete_monoids import BooleanMat, Transformation, congruence_closure_oracle, right_cayley
from .enumerator import EnumerationResult, Session, Status, enumerate_congruence
from .felsch_tree import FelschTree
from .union_find import UnionFind
from .variants import run_rees, run_with_zero, stephen_accepts, stephen_build, stephen_run
from .word_graph import WordGraph, isomorphic, standardize
from .words import CongruenceKind, Presentation, PresentationError, Relation, parse_presentation

__version__ = "0.1.0"

__all__ = [
    "BooleanMat",
    "CongruenceKind",
    "EnumerationResult",
    "FelschTree",
    "Presentation",
    "PresentationError",
    "Relation",
    "Session",
    "Status",
    "Transformation",
    "UnionFind",
    "WordGraph",
    "congruence_closure_oracle",
    "enumerate_congruence",
    "isomorphic",
    "parse_presentation",
    "right_cayley",
    "run_rees",
    "run_with_zero",
    "standardize",
    "stephen_accepts",
    "stephen_build",
    "stephen_run",
]
