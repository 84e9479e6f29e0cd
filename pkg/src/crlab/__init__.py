"""Pseudohermitian geometry lab: model CR manifolds, the Tanaka-Webster connection,
sub-Laplacian and Paneitz spectra on spheres, and an identity verification catalog."""

__version__ = "0.1.0"

from .calculus import ScalarField, TensorValue
from .connection import PointGeometry, solve_tanaka_webster
from .defaults import DEFAULTS
from .models import (Model, ModelError, ModelSpec, build_model, frame_at, group3d, heisenberg,
                     sample_points, sphere)
from .spectral import SpectralMatrix, assemble, first_eigenvalue
from .verify import (Report, Tolerances, extremal_diagnostics, lichnerowicz_certificate,
                     run_suite, torsion_model_suite)

__all__ = [
    "DEFAULTS", "Model", "ModelError", "ModelSpec", "PointGeometry", "Report", "ScalarField",
    "SpectralMatrix", "TensorValue", "Tolerances", "assemble", "build_model", "extremal_diagnostics",
    "first_eigenvalue", "frame_at", "group3d", "heisenberg", "lichnerowicz_certificate",
    "run_suite", "sample_points", "solve_tanaka_webster", "sphere", "torsion_model_suite",
]
