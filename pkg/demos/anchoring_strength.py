"""Weak versus strong anchoring on a coarse grid.

At nu = 1 the minimiser is defect-free: u stays close to the far-field value
(0, 1, 0) up to the colloid, poles included. At nu = 30 it carries a boojum
at each pole: the pole value is (0, -1, 0) and u2 changes sign once along
each half-axis.

Resolution matters: with far-field cells much wider than the colloid the
descent can stall in costly metastable states, so compare energies across
starts before trusting a single run.

    python demos/anchoring_strength.py
"""

import numpy as np

from boojum import (
    AnchoringParams,
    GridConfig,
    ModelParams,
    SolveConfig,
    axis_census,
    build_grid,
    default_profile,
    initial_field,
    pole_analysis,
    solve,
)

grid = build_grid(GridConfig(n_radial=48, n_polar=64, outer_radius=20.0, grading=1.05))
profile = default_profile(AnchoringParams(), grid)

for nu in (1.0, 30.0):
    res = solve(initial_field(grid), grid, profile, ModelParams(nu=nu, mu=1.0), SolveConfig(grad_tol=1e-7))
    poles = pole_analysis(res.field, grid)
    census = axis_census(res.field, grid)
    print(f"nu = {nu:g}: E = {res.breakdown.total:.6f}, converged = {res.converged}, "
          f"iterations = {res.iterations}")
    for side in ("north", "south"):
        jumps = ", ".join(f"r={j.r:.2f}" for j in census[side].jumps) or "none"
        print(f"  {side}: pole value {np.round(poles[side].value, 4)}, "
              f"|d - e_rho| = {poles[side].trace_dist[-1]:.3f}, jumps {jumps} ({census[side].parity})")
