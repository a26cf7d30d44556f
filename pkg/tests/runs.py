"""Desk-scale solves shared by the acceptance and refinement tests.

Every run uses nu = 1, mu = 1 and the default anchoring unless stated. A
"minimiser" is the lowest-energy converged result among several starts:
the meridian-rotation cold start, plus warm starts where available (the
coarser solution prolonged, or the branch obtained at larger nu).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache

from boojum import (
    AnchoringParams,
    GridConfig,
    ModelParams,
    SolveConfig,
    build_grid,
    default_profile,
    initial_field,
    prolong,
    select_minimizer,
    solve,
)
from boojum.grid import extend_outer_radius

PARAMS = ModelParams(nu=1.0, mu=1.0)
SOLVER = SolveConfig(max_iters=100_000, grad_tol=1e-8)
BASE = GridConfig(n_radial=64, n_polar=128, outer_radius=20.0, grading=1.05)
# one refinement halves every cell: steps h0 g^k split in two means grading sqrt(g)
FINE = GridConfig(n_radial=128, n_polar=256, outer_radius=20.0, grading=1.05 ** 0.5)
# nu at which the cold start settles on the boojum branch, used as a warm start
BOOJUM_NU = 10.0


@dataclass
class Run:
    grid: object
    profile: object
    params: ModelParams
    result: object
    candidates: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def field(self):
        return self.result.field

    def energies(self) -> str:
        return ", ".join(
            f"{name}: E={res.breakdown.total:.6f}{'' if res.converged else ' (not converged)'}"
            for name, res in self.candidates.items()
        )


def _solve(grid, profile, params, u0):
    return solve(u0, grid, profile, params, SOLVER)


def _run(cfg: GridConfig, warm: dict, params: ModelParams = PARAMS) -> Run:
    start = time.perf_counter()
    grid = build_grid(cfg)
    profile = default_profile(AnchoringParams(), grid)
    candidates = {"cold": _solve(grid, profile, params, initial_field(grid))}
    for name, make in warm.items():
        candidates[name] = _solve(grid, profile, params, make(grid, profile))
    best = select_minimizer(candidates.values())
    return Run(grid, profile, params, best, candidates, time.perf_counter() - start)


def _boojum_branch(grid, profile):
    high = _solve(grid, profile, ModelParams(BOOJUM_NU, PARAMS.mu), initial_field(grid))
    return high.field


@lru_cache(maxsize=None)
def base_run() -> Run:
    return _run(BASE, {f"from nu={BOOJUM_NU:g}": _boojum_branch})


@lru_cache(maxsize=None)
def fine_run() -> Run:
    coarse = base_run()
    return _run(FINE, {"prolonged 64x128": lambda g, p: prolong(coarse.field, coarse.grid, g)})


@lru_cache(maxsize=None)
def wide_run() -> Run:
    """Outer radius doubled at the resolution per unit length of :data:`BASE`."""
    coarse = base_run()
    cfg = extend_outer_radius(BASE, 2 * BASE.outer_radius)
    return _run(cfg, {"prolonged R=20": lambda g, p: prolong(coarse.field, coarse.grid, g)})


@lru_cache(maxsize=None)
def boojum_regime_run(nu: float = 30.0) -> Run:
    return _run(BASE, {}, ModelParams(nu, PARAMS.mu))
