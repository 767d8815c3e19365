"""Benchmark data generators and structural metrics."""

from __future__ import annotations

from .crash import ForceDeflectionCurve, compute_cfe, compute_sea, read_curve, write_curve
from .synthetic import FAMILIES, ground_truth, synthetic_dataset
from .truss import (
    TrussError,
    TrussProblem,
    generate_tbpt_dataset,
    stiffness_matrix,
    truss_analyze,
    truss_solve,
)

__all__ = [
    "FAMILIES", "ForceDeflectionCurve", "TrussError", "TrussProblem", "compute_cfe",
    "compute_sea", "generate_tbpt_dataset", "ground_truth", "read_curve", "stiffness_matrix",
    "synthetic_dataset", "truss_analyze", "truss_solve", "write_curve",
]
