"""Axially symmetric boojum configurations around a spherical colloid.

The package minimises a reduced Q-tensor energy on the meridian half-plane,
post-processes the minimiser for pole values, axis singularities and
biaxiality, and checks the tangent-map ODE that governs boundary blow-ups.
"""

from .anchoring import AnchoringParams, AnchoringProfile, default_profile, validate_profile
from .defects import (
    DefectReport,
    analyze,
    axis_census,
    density_probe,
    far_field_check,
    near_axis_expansion_check,
    pole_analysis,
)
from .energy import EnergyBreakdown, ModelParams, eval_energy, eval_gradient
from .grid import GridConfig, MeridianGrid, Tag, build_grid
from .minimizer import (
    SolveConfig,
    SolveResult,
    continuation,
    initial_field,
    prolong,
    select_minimizer,
    solve,
    solve_restarts,
)
from .tangent_ode import integrate, shoot_classify
from .tensor import Phase, augment, classify_phase, director, eigenvalues, eval_P, eval_S

__version__ = "0.1.0"

__all__ = [
    "analyze", "AnchoringParams", "AnchoringProfile", "augment", "axis_census", "build_grid",
    "classify_phase", "continuation", "default_profile", "DefectReport", "density_probe",
    "director", "eigenvalues", "EnergyBreakdown", "eval_energy", "eval_gradient", "eval_P",
    "eval_S", "far_field_check", "GridConfig", "initial_field", "integrate", "MeridianGrid",
    "ModelParams", "near_axis_expansion_check", "Phase", "pole_analysis", "prolong",
    "select_minimizer", "shoot_classify", "solve", "solve_restarts", "SolveConfig",
    "SolveResult", "Tag", "validate_profile",
]
