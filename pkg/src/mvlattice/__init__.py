"""Finite lattice algebra, multi-valued sets and multi-valued cognitive maps."""

from .aggregation import (
    AssessmentSet,
    difference,
    mean,
    mean_confidence,
    mean_confidences,
    mean_mvset,
    nary_mean,
    optimistic_mean,
    pessimistic_mean,
)
from .errors import MVError
from .lattice import Lattice, boolean, build_lattice, chain, product
from .mvcm import MapSpec, MapState, TraceTable, WeightMatrix, render_trace, run, step
from .mvset import MVSet, classical_extend, extend, image
from .terms import LatticeTerm, eval_term
from .textio import Document, build, load_fixture, loads, parse, serialize

__version__ = "0.1.0"

__all__ = [
    "AssessmentSet", "Document", "Lattice", "LatticeTerm", "MVError", "MVSet", "MapSpec",
    "MapState", "TraceTable", "WeightMatrix", "boolean", "build", "build_lattice", "chain",
    "classical_extend", "difference", "eval_term", "extend", "image", "load_fixture", "loads",
    "mean", "mean_confidence", "mean_confidences", "mean_mvset", "nary_mean",
    "optimistic_mean", "parse", "pessimistic_mean", "product", "render_trace", "run",
    "serialize", "step",
]
