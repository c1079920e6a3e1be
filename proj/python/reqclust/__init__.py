"""Requirement clustering for next-release planning."""

import json as _json

from . import _core
from ._core import (
    DegenerateInput,
    IoError,
    ParseError,
    ValidationError,
    estimate_k,
    hierarchical,
    kmeans,
    pam,
    standardize,
    validity,
)

__all__ = [
    "DegenerateInput",
    "IoError",
    "ParseError",
    "ValidationError",
    "analyze",
    "analyze_file",
    "estimate_k",
    "hierarchical",
    "kmeans",
    "pam",
    "standardize",
    "validate_problem",
    "validity",
]


def _text(problem):
    return problem if isinstance(problem, str) else _json.dumps(problem)


def validate_problem(problem):
    """Validate a problem (dict or JSON text); returns its canonical form."""
    return _json.loads(_core.validate_problem(_text(problem)))


def analyze(problem, k=None, seed=42, gap_B=100, linkage="ward", connectivity_L=10):
    """Run the full pipeline on a problem (dict or JSON text); returns the report."""
    return _json.loads(_core.analyze(_text(problem), k, seed, gap_B, linkage, connectivity_L))


def analyze_file(path, seed=42):
    """Run the full pipeline on a JSON file or CSV bundle directory."""
    return _json.loads(_core.analyze_file(str(path), seed))
