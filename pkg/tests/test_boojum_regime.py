"""Strong anchoring: the regime in which the minimiser carries boojums.

At nu = 1 the desk-scale minimiser is defect-free (see the acceptance tests
C3-C5). At nu = 30 the same solver, grid and diagnostics find the predicted
structure: pole values (0, -1, 0), an odd number of axis jumps on each side,
the director tending to e_rho at the poles and a regular near-axis expansion.
"""

import numpy as np
import pytest

from boojum.defects import (
    axis_census,
    b_field_report,
    degenerate_fraction,
    density_probe,
    grid_floor,
    near_axis_expansion_check,
    pole_analysis,
)

import runs

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def strong():
    run = runs.boojum_regime_run(30.0)
    assert run.result.converged, run.result.message
    return run


def test_pole_values(strong):
    poles = pole_analysis(strong.field, strong.grid)
    for side in ("north", "south"):
        assert poles[side].deviation < 1e-2
        assert not poles[side].violation


def test_one_jump_per_side_near_the_colloid(strong):
    census = axis_census(strong.field, strong.grid)
    for side in ("north", "south"):
        c = census[side]
        assert c.parity == "odd" and c.count == 1
        assert 1.0 < c.jumps[0].r < 3.0
        assert c.jumps[0].u2_before < 0 < c.jumps[0].u2_after
        assert c.flags == []


def test_director_tends_to_e_rho(strong):
    poles = pole_analysis(strong.field, strong.grid)
    for side in ("north", "south"):
        assert poles[side].trace_dist[-1] < 0.1
        assert poles[side].monotone_tail


def test_reflection_symmetry(strong):
    # u1, u2 even and u3 odd under z -> -z
    uu = strong.field.reshape(*strong.grid.shape, 3)
    mirrored = uu[:, ::-1] * [1, 1, -1]
    assert np.max(np.abs(mirrored - uu)) < 1e-6


def test_degenerate_set_confined_to_the_axis(strong):
    rep = b_field_report(strong.field, strong.grid)
    assert rep.b_min >= -0.5 - 1e-10
    assert rep.near_floor_nodes > 0 and rep.confined
    assert degenerate_fraction(strong.field, strong.grid) == 0.0
    assert strong.field[:, 0].min() >= -1e-8


def test_near_axis_expansion(strong):
    rep = near_axis_expansion_check(strong.field, strong.grid)
    for side in ("north", "south"):
        med = rep[side].median_slopes()
        assert med["u1"] == pytest.approx(2.0, abs=0.1)
        assert med["u2"] == pytest.approx(2.0, abs=0.1)
        assert med["u3"] == pytest.approx(1.0, abs=0.1)
        assert all(f.sign_consistent for f in rep[side].fits)


def test_pole_density_decreases_toward_the_pole(strong):
    radii = np.geomspace(grid_floor(strong.grid), 0.5, 10)
    theta = density_probe(strong.field, strong.grid, (0.0, 1.0), radii).values
    assert np.all(np.diff(theta) > 0)
    assert theta[0] / theta[-1] < 0.1


def test_costs_more_than_the_weak_anchoring_minimiser(strong):
    assert strong.result.breakdown.total > runs.base_run().result.breakdown.total
