"""Single table of run defaults (tolerances, sample sizes, jet order)."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Defaults:
    jet_order: int = 5
    points: int = 100
    seed: int = 0
    # model construction re-checks frame invariants at this many points
    model_check_points: int = 50
    tol_pointwise: float = 1e-8
    tol_extremal: float = 1e-9
    tol_integral: float = 1e-8
    tol_spectral: float = 1e-6
    tol_structure: float = 1e-12
    # frame invariants re-checked by build_model
    tol_frame: float = 1e-10
    # connection solver uniqueness criterion
    solver_residual: float = 1e-10
    solver_min_singular: float = 1e-8
    # spectral assembly
    gram_threshold: float = 1e-12
    multiplicity_gap: float = 1e-6
    max_degree: int = 6
    # Galerkin slice used by the spectral suite and the certificate
    spectral_degree: int = 4
    # random test fields
    sphere_field_degree: int = 4
    integral_field_degree: int = 3
    integral_fields: int = 20
    k0_directions: int = 10_000
    group_box: dict = field(
        default_factory=lambda: {"heisenberg": 1.0, "group3d": 0.5}
    )
    workers_env: str = "CRLAB_WORKERS"


DEFAULTS = Defaults()
