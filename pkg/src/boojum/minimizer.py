"""Projected gradient descent for unit fields.

Each iteration moves every free node along the tangential, Jacobi-scaled
descent direction and renormalises:

    u <- (u - tau p) / |u - tau p|,   p = (I - u u^T) D^-1 g

where ``g`` is the tangential energy gradient and ``D`` the diagonal of the
quadratic part of the Hessian. ``tau`` comes from a Barzilai-Borwein (secant)
estimate, backtracked until the Armijo condition holds, so the recorded
energies never increase. The far-field row is pinned to ``(0, 1, 0)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .energy import (
    FAR_FIELD_VALUE,
    EnergyBreakdown,
    ModelParams,
    eval_energy,
    operators,
    project_tangent,
    raw_gradient,
)
from .grid import MeridianGrid

log = logging.getLogger(__name__)

STEP_RULES = ("fixed", "adaptive-secant")
INIT_MODES = ("meridian_rotation", "perturbed", "from_checkpoint")


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolveConfig:
    max_iters: int = 50_000
    grad_tol: float = 1e-6
    step_rule: str = "adaptive-secant"
    initial_step: float = 1e-3
    shrink: float = 0.5
    max_backtracks: int = 30
    armijo: float = 1e-4
    restarts: int = 0
    perturbation_scale: float = 0.0
    seed: int = 0
    continuation_nus: tuple[float, ...] = ()
    checkpoint_path: str | None = None
    checkpoint_every: int = 0

    def __post_init__(self):
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be an integer >= 1, got {self.max_iters!r}")
        if not self.grad_tol > 0:
            raise ValueError(f"grad_tol must be > 0, got {self.grad_tol!r}")
        if self.step_rule not in STEP_RULES:
            raise ValueError(f"step_rule must be one of {STEP_RULES}, got {self.step_rule!r}")
        if not self.initial_step > 0:
            raise ValueError(f"initial_step must be > 0, got {self.initial_step!r}")
        if not 0 < self.shrink < 1:
            raise ValueError(f"shrink must lie in (0, 1), got {self.shrink!r}")
        if self.restarts < 0:
            raise ValueError(f"restarts must be >= 0, got {self.restarts!r}")
        if not self.perturbation_scale >= 0:
            raise ValueError(f"perturbation_scale must be >= 0, got {self.perturbation_scale!r}")
        object.__setattr__(self, "continuation_nus", tuple(float(x) for x in self.continuation_nus))


@dataclass
class SolveResult:
    field: np.ndarray
    breakdown: EnergyBreakdown
    iterations: int
    converged: bool
    energy_history: list[float]
    grad_norm: float = np.nan
    params: ModelParams | None = None
    message: str = ""
    grad_history: list[float] = field(default_factory=list, repr=False)


def normalize(u) -> np.ndarray:
    return u / np.linalg.norm(u, axis=-1, keepdims=True)


def _pin(u, pinned):
    u[pinned] = FAR_FIELD_VALUE
    return u


def meridian_rotation(grid: MeridianGrid) -> np.ndarray:
    """``(sin eta, cos eta, 0)`` with ``eta`` falling linearly from pi at the colloid to 0."""
    r = grid.node_r
    R = grid.config.outer_radius
    eta = np.pi * (R - r) / (R - 1.0)
    u = np.stack([np.sin(eta), np.cos(eta), np.zeros_like(eta)], axis=-1)
    return _pin(u, operators(grid).pinned)


def initial_field(grid: MeridianGrid, mode: str = "meridian_rotation", cfg: SolveConfig | None = None,
                  rng: np.random.Generator | None = None, checkpoint=None) -> np.ndarray:
    """Starting field for :func:`solve`.

    ``perturbed`` adds tangential Gaussian noise of size
    ``cfg.perturbation_scale`` to the meridian rotation, drawn from ``rng``
    (default: seeded from ``cfg.seed``). ``from_checkpoint`` loads ``checkpoint``
    (a path or ``(header, field)`` pair).
    """
    cfg = cfg or SolveConfig()
    pinned = operators(grid).pinned
    if mode == "meridian_rotation":
        return meridian_rotation(grid)
    if mode == "perturbed":
        u = meridian_rotation(grid)
        if cfg.perturbation_scale == 0:
            return u
        rng = rng if rng is not None else np.random.default_rng(cfg.seed)
        noise = project_tangent(u, rng.standard_normal(u.shape))
        return _pin(normalize(u + cfg.perturbation_scale * noise), pinned)
    if mode == "from_checkpoint":
        if checkpoint is None:
            raise ValueError("mode 'from_checkpoint' needs a checkpoint")
        from .io import CheckpointError, read_checkpoint

        header, u = read_checkpoint(checkpoint) if not isinstance(checkpoint, tuple) else checkpoint
        if header.get("grid_digest") != grid.config.digest():
            raise CheckpointError("grid/config mismatch")
        return _pin(normalize(np.array(u, dtype=float)), pinned)
    raise ValueError(f"unknown initial mode {mode!r}; expected one of {INIT_MODES}")


def prolong(u, source: MeridianGrid, target: MeridianGrid) -> np.ndarray:
    """Transfer a field to another lattice by interpolation in ``(r, t)``.

    Nodes beyond the source's outer radius take the far-field value. Used to
    warm-start refined grids or larger domains from a converged solution.
    """
    from scipy.interpolate import RegularGridInterpolator

    uu = np.asarray(u, dtype=float).reshape(*source.shape, 3)
    interp = RegularGridInterpolator((source.r, source.t), uu)
    r = np.clip(target.node_r, source.r[0], source.r[-1])
    t = np.clip(target.node_t, source.t[0], source.t[-1])
    out = interp(np.column_stack([r, t]))
    out[target.node_r > source.r[-1]] = FAR_FIELD_VALUE
    return _pin(normalize(out), operators(target).pinned)


def _direction(u, g, diag, pinned):
    p = project_tangent(u, g / diag)
    p[pinned] = 0.0
    return p


def solve(u0, grid: MeridianGrid, profile, params: ModelParams, cfg: SolveConfig | None = None,
          callback=None) -> SolveResult:
    """Minimise the discrete energy from ``u0``.

    Convergence is declared when the largest nodal Jacobi-scaled tangential
    gradient, ``max |p|``, drops below ``cfg.grad_tol``.
    """
    cfg = cfg or SolveConfig()
    op = operators(grid)
    pinned = op.pinned
    u = np.array(u0, dtype=float, copy=True)
    if u.shape != (grid.size, 3):
        raise ValueError(f"initial field has shape {u.shape}, grid expects ({grid.size}, 3)")
    if np.max(np.abs(np.linalg.norm(u, axis=1) - 1.0)) > 1e-8:
        raise ValueError("initial field is not unit-norm")
    u = _pin(normalize(u), pinned)
    diag = op.jacobi_diagonal(params)

    def energy(v):
        e = eval_energy(v, grid, profile, params).total
        if not np.isfinite(e):
            raise SolverError("non-finite energy encountered")
        return e

    def tangential(v):
        g = project_tangent(v, raw_gradient(v, grid, profile, params))
        g[pinned] = 0.0
        return g

    E = energy(u)
    g = tangential(u)
    p = _direction(u, g, diag, pinned)
    crit = float(np.max(np.abs(p)))
    history, grads = [E], [crit]
    tau = cfg.initial_step
    it = 0
    message = ""
    converged = crit < cfg.grad_tol

    while not converged and it < cfg.max_iters:
        slope = float(np.sum(g * p))
        accepted = False
        step = tau
        for _ in range(cfg.max_backtracks + 1):
            trial = _pin(normalize(u - step * p), pinned)
            E_trial = energy(trial)
            if E_trial <= E - cfg.armijo * step * slope:
                accepted = True
                break
            step *= cfg.shrink
        if not accepted:
            message = f"line search failed after {cfg.max_backtracks} backtracks"
            log.info("iteration %d: %s", it, message)
            break

        g_new = tangential(trial)
        p_new = _direction(trial, g_new, diag, pinned)
        s = trial - u
        y = g_new - g
        u, E, g, p = trial, E_trial, g_new, p_new
        it += 1
        crit = float(np.max(np.abs(p)))
        history.append(E)
        grads.append(crit)
        converged = crit < cfg.grad_tol

        if cfg.step_rule == "adaptive-secant":
            sy = float(np.sum(s * y))
            if sy > 0:
                # alternate the two Barzilai-Borwein estimates in the Jacobi metric
                if it % 2:
                    tau = float(np.sum(diag * s * s)) / sy
                else:
                    tau = sy / float(np.sum(y * y / diag))
            else:
                tau = min(2.0 * step, 1e3)
        else:
            tau = cfg.initial_step

        if callback is not None:
            callback(it, u, E, crit)
        if cfg.checkpoint_path and cfg.checkpoint_every and it % cfg.checkpoint_every == 0:
            _write_checkpoint(cfg.checkpoint_path, u, grid, params, cfg, it, E)

    if converged:
        message = f"converged: max|p| = {crit:.3e} < {cfg.grad_tol:.1e}"
    elif not message:
        message = f"max_iters reached: max|p| = {crit:.3e}"
    result = SolveResult(
        field=u,
        breakdown=eval_energy(u, grid, profile, params),
        iterations=it,
        converged=converged,
        energy_history=history,
        grad_norm=crit,
        params=params,
        message=message,
        grad_history=grads,
    )
    if cfg.checkpoint_path:
        _write_checkpoint(cfg.checkpoint_path, u, grid, params, cfg, it, E)
    return result


def _write_checkpoint(path, u, grid, params, cfg, iteration, energy):
    from dataclasses import asdict

    from .io import write_checkpoint

    write_checkpoint(
        path,
        u,
        grid,
        {
            "grid": asdict(grid.config),
            "model": asdict(params),
            "seed": cfg.seed,
            "iteration": iteration,
            "energy": energy,
        },
    )


def solve_restarts(grid, profile, params, cfg: SolveConfig) -> list[SolveResult]:
    """Cold start from the meridian rotation plus ``cfg.restarts`` perturbed starts.

    Each restart draws from its own child stream of ``cfg.seed``. Results are
    returned in start order; distinct local minima are all kept.
    """
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    results = [solve(initial_field(grid, "meridian_rotation", cfg), grid, profile, params, cfg)]
    scale = cfg.perturbation_scale if cfg.perturbation_scale > 0 else 0.1
    perturbed = replace(cfg, perturbation_scale=scale)
    for child in children:
        u0 = initial_field(grid, "perturbed", perturbed, rng=np.random.default_rng(child))
        results.append(solve(u0, grid, profile, params, cfg))
    return results


def continuation(grid, profile, params: ModelParams, cfg: SolveConfig, u0=None) -> list[SolveResult]:
    """Solve for each ``nu`` in ``cfg.continuation_nus``, warm-starting from the previous one."""
    nus = cfg.continuation_nus
    if not nus:
        raise ValueError("continuation needs a nonempty continuation_nus")
    if any(b <= a for a, b in zip(nus, nus[1:])):
        raise ValueError(f"continuation_nus must be strictly ascending, got {nus}")
    u = initial_field(grid, "meridian_rotation", cfg) if u0 is None else u0
    results = []
    for nu in nus:
        try:
            res = solve(u, grid, profile, replace(params, nu=nu), cfg)
        except (SolverError, ValueError) as exc:
            raise SolverError(f"continuation failed at nu={nu}: {exc}") from exc
        results.append(res)
        u = res.field
    return results


def select_minimizer(results) -> SolveResult:
    """Lowest-energy converged result (lowest-energy overall if none converged)."""
    results = list(results)
    if not results:
        raise ValueError("no results to choose from")
    return min(results, key=lambda r: (not r.converged, r.breakdown.total))
