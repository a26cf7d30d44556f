from dataclasses import replace

import numpy as np
import pytest

from boojum import (
    AnchoringParams,
    GridConfig,
    ModelParams,
    SolveConfig,
    build_grid,
    continuation,
    default_profile,
    initial_field,
    prolong,
    select_minimizer,
    solve,
)
from boojum.energy import FAR_FIELD_VALUE
from boojum.grid import Tag
from boojum.io import CheckpointError, read_checkpoint
from boojum.minimizer import SolveResult, solve_restarts

CFG = SolveConfig(grad_tol=1e-8)


@pytest.fixture(scope="module")
def coarse():
    grid = build_grid(GridConfig(16, 32, 8.0, 1.05 ** 4))
    return grid, default_profile(AnchoringParams(), grid)


@pytest.fixture(scope="module")
def coarse_result(coarse):
    grid, profile = coarse
    return solve(initial_field(grid), grid, profile, ModelParams(), CFG)


def test_meridian_rotation_start(coarse):
    grid, _ = coarse
    u = initial_field(grid)
    np.testing.assert_allclose(np.linalg.norm(u, axis=1), 1.0, atol=1e-15)
    np.testing.assert_allclose(u[grid.colloid_nodes], np.tile([0, -1, 0], (grid.shape[1], 1)), atol=1e-15)
    assert np.all(u[grid.tags == Tag.FAR_FIELD] == FAR_FIELD_VALUE)
    assert np.all(u[:, 2] == 0) and np.all(u[:, 0] >= 0)


def test_perturbed_start_is_seeded(coarse):
    grid, _ = coarse
    cfg = SolveConfig(perturbation_scale=0.1, seed=4)
    a = initial_field(grid, "perturbed", cfg)
    b = initial_field(grid, "perturbed", cfg)
    c = initial_field(grid, "perturbed", replace(cfg, seed=5))
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, c)
    np.testing.assert_allclose(np.linalg.norm(a, axis=1), 1.0, atol=1e-14)
    np.testing.assert_array_equal(initial_field(grid, "perturbed", SolveConfig()), initial_field(grid))


def test_unknown_start_mode(coarse):
    with pytest.raises(ValueError, match="unknown initial mode"):
        initial_field(coarse[0], "random")
    with pytest.raises(ValueError, match="needs a checkpoint"):
        initial_field(coarse[0], "from_checkpoint")


def test_coarse_solve_converges(coarse_result):
    res = coarse_result
    assert res.converged, res.message
    assert res.grad_norm < CFG.grad_tol
    assert res.field[:, 0].min() >= -1e-8
    np.testing.assert_allclose(np.linalg.norm(res.field, axis=1), 1.0, atol=1e-12)
    history = np.array(res.energy_history)
    assert np.all(np.diff(history) <= 1e-12 * np.abs(history[:-1]))
    assert len(history) == res.iterations + 1


def test_solve_is_deterministic(coarse, coarse_result):
    grid, profile = coarse
    again = solve(initial_field(grid), grid, profile, ModelParams(), CFG)
    assert again.field.tobytes() == coarse_result.field.tobytes()
    assert again.energy_history == coarse_result.energy_history


def test_converged_field_is_a_fixed_point(coarse, coarse_result):
    grid, profile = coarse
    res = solve(coarse_result.field, grid, profile, ModelParams(), CFG)
    assert res.converged and res.iterations == 0
    # the start is renormalised, which moves the last bit
    assert res.breakdown.total == pytest.approx(coarse_result.breakdown.total, rel=1e-14)


def test_solve_rejects_bad_start(coarse):
    grid, profile = coarse
    with pytest.raises(ValueError, match="unit-norm"):
        solve(2 * initial_field(grid), grid, profile, ModelParams())
    with pytest.raises(ValueError, match="grid expects"):
        solve(np.ones((4, 3)), grid, profile, ModelParams())


def test_iteration_cap_reports_not_converged(coarse):
    grid, profile = coarse
    res = solve(initial_field(grid), grid, profile, ModelParams(), SolveConfig(max_iters=5))
    assert not res.converged and res.iterations == 5
    assert "max_iters" in res.message


def test_fixed_step_rule_descends(coarse):
    grid, profile = coarse
    res = solve(initial_field(grid), grid, profile, ModelParams(), SolveConfig(max_iters=50, step_rule="fixed"))
    assert res.energy_history[-1] < res.energy_history[0]


@pytest.mark.parametrize(
    "kwargs",
    [dict(max_iters=0), dict(grad_tol=0.0), dict(step_rule="newton"), dict(shrink=1.0), dict(restarts=-1)],
)
def test_solve_config_validation(kwargs):
    with pytest.raises(ValueError):
        SolveConfig(**kwargs)


def test_continuation_single_step_matches_cold_solve(coarse):
    grid, profile = coarse
    cfg = replace(CFG, continuation_nus=(0.5,))
    steps = continuation(grid, profile, ModelParams(), cfg)
    cold = solve(initial_field(grid), grid, profile, ModelParams(nu=0.5), CFG)
    assert len(steps) == 1
    assert steps[0].field.tobytes() == cold.field.tobytes()
    assert steps[0].params.nu == 0.5


def test_continuation_warm_starts(coarse):
    grid, profile = coarse
    steps = continuation(grid, profile, ModelParams(), replace(CFG, continuation_nus=(0.5, 1.0, 2.0)))
    assert [s.params.nu for s in steps] == [0.5, 1.0, 2.0]
    assert all(s.converged for s in steps)


def test_continuation_errors(coarse):
    grid, profile = coarse
    with pytest.raises(ValueError, match="nonempty"):
        continuation(grid, profile, ModelParams(), CFG)
    with pytest.raises(ValueError, match="ascending"):
        continuation(grid, profile, ModelParams(), replace(CFG, continuation_nus=(2.0, 1.0)))


def test_restarts_are_seeded_and_selected(coarse):
    grid, profile = coarse
    cfg = replace(CFG, restarts=2, perturbation_scale=0.2, seed=11)
    a = solve_restarts(grid, profile, ModelParams(), cfg)
    b = solve_restarts(grid, profile, ModelParams(), cfg)
    assert len(a) == 3
    for x, y in zip(a, b):
        assert x.field.tobytes() == y.field.tobytes()
    best = select_minimizer(a)
    assert best.breakdown.total == min(r.breakdown.total for r in a if r.converged)


def test_select_minimizer_prefers_converged(coarse_result):
    worse = replace(coarse_result, converged=False)
    lower = replace(coarse_result, breakdown=replace(coarse_result.breakdown, bulk=-1e9), converged=False)
    assert select_minimizer([lower, coarse_result, worse]) is coarse_result
    assert select_minimizer([lower, worse]) is lower
    with pytest.raises(ValueError):
        select_minimizer([])
    assert isinstance(coarse_result, SolveResult)


def test_checkpoint_written_and_reloaded(tmp_path, coarse, coarse_result):
    grid, profile = coarse
    path = tmp_path / "ck.csv"
    res = solve(coarse_result.field, grid, profile, ModelParams(), replace(CFG, checkpoint_path=str(path), seed=3))
    header, u = read_checkpoint(path)
    assert header["seed"] == 3 and header["model"] == {"nu": 1.0, "mu": 1.0}
    assert header["energy"] == res.breakdown.total
    warm = initial_field(grid, "from_checkpoint", checkpoint=path)
    assert warm.tobytes() == res.field.tobytes()
    other = build_grid(GridConfig(16, 32, 8.0, 1.1))
    with pytest.raises(CheckpointError, match="grid/config mismatch"):
        initial_field(other, "from_checkpoint", checkpoint=path)


def test_prolong(coarse, coarse_result):
    grid, _ = coarse
    same = prolong(coarse_result.field, grid, grid)
    np.testing.assert_allclose(same, coarse_result.field, atol=1e-14)
    fine = build_grid(GridConfig(32, 64, 12.0, 1.05 ** 2))
    u = prolong(coarse_result.field, grid, fine)
    np.testing.assert_allclose(np.linalg.norm(u, axis=1), 1.0, atol=1e-14)
    assert np.all(u[fine.node_r > 8.0] == FAR_FIELD_VALUE)


def test_exact_stationary_start(coarse):
    grid, _ = coarse
    u = np.tile(FAR_FIELD_VALUE, (grid.size, 1))
    us = np.tile(FAR_FIELD_VALUE, (grid.t.size, 1))
    res = solve(u, grid, us, ModelParams(nu=1.0, mu=0.0), CFG)
    assert res.converged and res.iterations == 0
    assert res.energy_history == [res.breakdown.total]


def test_mirror_symmetry_of_symmetric_start(coarse_result, coarse):
    grid, _ = coarse
    uu = coarse_result.field.reshape(*grid.shape, 3)
    assert np.max(np.abs(uu[:, ::-1] * [1, 1, -1] - uu)) < 1e-6
