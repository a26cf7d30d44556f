import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boojum.anchoring import (
    POLE_VALUE,
    AnchoringParams,
    AnchoringProfile,
    default_profile,
    profile_on_grid,
    profile_values,
    validate_profile,
)
from boojum.grid import GridConfig, build_grid

DEFAULT = AnchoringParams()


def test_profile_examples():
    np.testing.assert_allclose(profile_values(np.pi / 2, AnchoringParams(np.pi / 2, np.pi / 4)), [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(
        profile_values(np.pi / 4, AnchoringParams(np.pi / 2, np.pi / 4)),
        [0.5, -np.sqrt(2) / 2, 0.5],
        atol=1e-15,
    )
    np.testing.assert_allclose(profile_values([0.0, np.pi], DEFAULT), [POLE_VALUE, POLE_VALUE], atol=1e-15)


@pytest.mark.parametrize("kwargs", [dict(amp_polar=0.0), dict(amp_polar=4.0), dict(amp_tilt=1.0), dict(amp_tilt=-0.1)])
def test_params_reject_out_of_range(kwargs):
    with pytest.raises(ValueError):
        AnchoringParams(**kwargs)


@given(st.floats(1e-2, np.pi), st.floats(1e-3, np.pi / 4), st.integers(4, 200))
def test_closed_form_profile_satisfies_constraints(a, b, n):
    grid = build_grid(GridConfig(2, n, 2.0))
    profile = default_profile(AnchoringParams(a, b), grid)
    report = validate_profile(profile)
    assert report.passed, report.lines()
    # reflection symmetry about the equator: u1, u2 even, u3 odd
    v = profile_values(grid.t, AnchoringParams(a, b))
    w = profile_values(np.pi - grid.t, AnchoringParams(a, b))
    np.testing.assert_allclose(w * [1, 1, -1], v, atol=1e-14)


def test_tiny_polar_amplitude_reads_as_constant():
    # u2 spans about amp_polar^2 / 2, below the constancy tolerance here
    grid = build_grid(GridConfig(2, 32, 2.0))
    rep = validate_profile(default_profile(AnchoringParams(1e-3, np.pi / 4), grid))
    assert not rep["non_constant"].passed
    assert "[2]" in rep["non_constant"].detail


def test_profile_includes_poles_and_colloid_nodes():
    grid = build_grid(GridConfig(4, 16, 3.0))
    profile = default_profile(DEFAULT, grid)
    assert len(profile) == 18
    np.testing.assert_array_equal(profile.values[0], POLE_VALUE)
    np.testing.assert_array_equal(profile_on_grid(profile, grid), profile.values[1:-1])


def test_off_node_profile_is_interpolated_on_the_sphere():
    theta = np.linspace(0, np.pi, 401)
    profile = AnchoringProfile(theta, profile_values(theta, DEFAULT))
    grid = build_grid(GridConfig(4, 16, 3.0))
    us = profile_on_grid(profile, grid)
    np.testing.assert_allclose(np.linalg.norm(us, axis=1), 1.0, atol=1e-14)
    np.testing.assert_allclose(us, profile_values(grid.t, DEFAULT), atol=1e-4)


def _make(values, theta=None):
    values = np.asarray(values, dtype=float)
    theta = np.linspace(0, np.pi, len(values)) if theta is None else theta
    return AnchoringProfile(theta, values)


def test_validation_flags_each_constraint():
    theta = np.linspace(0, np.pi, 33)
    good = profile_values(theta, DEFAULT)

    bad = good.copy()
    bad[10] *= 1.1
    assert not validate_profile(_make(bad))["unit_norm"].passed

    bad = good.copy()
    bad[0] = [0.0, 1.0, 0.0]
    rep = validate_profile(_make(bad))
    assert not rep["pole_value"].passed
    assert rep["pole_value"].violation == pytest.approx(2.0)

    bad = good.copy()
    bad[10, 0] *= -1
    rep = validate_profile(_make(bad))
    assert not rep["first_nonneg"].passed
    assert rep["first_nonneg"].violation == pytest.approx(good[10, 0])

    alpha = np.pi - np.pi / 2 * np.sin(theta) ** 2
    flat = np.stack([np.sin(alpha), np.cos(alpha), np.zeros_like(theta)], axis=1)
    rep = validate_profile(_make(flat))
    assert not rep["non_constant"].passed
    assert "[3]" in rep["non_constant"].detail
    assert rep["unit_norm"].passed and rep["pole_value"].passed


def test_pole_extrapolated_without_pole_samples():
    # cubic u3 near the pole: a quadratic fit needs fine samples to reach 1e-6
    theta = np.linspace(0.0, np.pi, 3001)[1:-1]
    rep = validate_profile(_make(profile_values(theta, DEFAULT), theta))
    assert rep["pole_value"].detail == "extrapolated"
    assert rep["pole_value"].passed


def test_profile_csv_round_trip(tmp_path):
    grid = build_grid(GridConfig(4, 16, 3.0))
    profile = default_profile(DEFAULT, grid)
    path = tmp_path / "p.csv"
    profile.to_csv(path)
    back = AnchoringProfile.from_csv(path)
    np.testing.assert_array_equal(back.theta, profile.theta)
    np.testing.assert_array_equal(back.values, profile.values)


def test_profile_csv_errors(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("theta_hat,us1,us2\n0,0,-1\n")
    with pytest.raises(ValueError, match="missing columns"):
        AnchoringProfile.from_csv(path)
    path.write_text("theta_hat,us1,us2,us3\n0,0,-1,x\n")
    with pytest.raises(ValueError, match=":2:"):
        AnchoringProfile.from_csv(path)
    path.write_text("theta_hat,us1,us2,us3\n")
    with pytest.raises(ValueError, match="no samples"):
        AnchoringProfile.from_csv(path)


def test_near_pole_behaviour():
    # u_s approaches the pole value quadratically in t
    t = np.array([1e-2, 5e-3])
    dev = np.linalg.norm(profile_values(t, DEFAULT) - POLE_VALUE, axis=1)
    slope = np.log(dev[0] / dev[1]) / np.log(2)
    assert slope == pytest.approx(2.0, abs=0.01)


def test_near_pole_orders_of_first_and_third_components():
    # u_s1 ~ sin^2 and u_s3 ~ sin^3 at the poles; the fitted slopes approach
    # 2 and 3 from below as the four nearest nodes close in on the pole
    slopes = []
    for n in (32, 128, 512):
        t = build_grid(GridConfig(2, n, 2.0)).t[:4]
        v = profile_values(t, DEFAULT)
        x = np.log(np.sin(t))
        slopes.append([np.polyfit(x, np.log(v[:, 0]), 1)[0], np.polyfit(x, np.log(v[:, 2]), 1)[0]])
    slopes = np.array(slopes)
    assert np.all(np.diff(slopes, axis=0) > 0)
    np.testing.assert_allclose(slopes[1], [2.0, 3.0], atol=0.01)
    np.testing.assert_allclose(slopes[2], [2.0, 3.0], atol=1e-3)
