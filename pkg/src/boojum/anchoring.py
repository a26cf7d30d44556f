"""Favoured-anchoring profiles on the colloid surface.

A profile is a sampled map ``t -> u_s(t)`` on the colloid nodes. It must be a
unit vector, equal ``(0, -1, 0)`` at both poles, have a nonnegative first
component, and no component may be constant.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

POLE_VALUE = np.array([0.0, -1.0, 0.0])


@dataclass(frozen=True)
class AnchoringParams:
    amp_polar: float = np.pi / 2
    amp_tilt: float = np.pi / 4

    def __post_init__(self):
        if not 0.0 < self.amp_polar <= np.pi:
            raise ValueError(f"amp_polar must lie in (0, pi], got {self.amp_polar!r}")
        if not 0.0 < self.amp_tilt <= np.pi / 4:
            raise ValueError(f"amp_tilt must lie in (0, pi/4], got {self.amp_tilt!r}")


@dataclass(frozen=True, eq=False)
class AnchoringProfile:
    theta: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if theta.ndim != 1 or values.shape != (theta.size, 3):
            raise ValueError(
                f"profile needs theta of shape (n,) and values of shape (n, 3); "
                f"got {theta.shape} and {values.shape}"
            )
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.theta.size

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta_hat", "us1", "us2", "us3"])
            for t, (a, b, c) in zip(self.theta, self.values):
                writer.writerow([repr(float(t)), repr(float(a)), repr(float(b)), repr(float(c))])

    @classmethod
    def from_csv(cls, path) -> "AnchoringProfile":
        with Path(path).open(newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"theta_hat", "us1", "us2", "us3"} - set(reader.fieldnames or [])
            if missing:
                raise ValueError(f"{path}: missing columns {sorted(missing)}")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                try:
                    rows.append([float(row[k]) for k in ("theta_hat", "us1", "us2", "us3")])
                except (TypeError, ValueError) as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
        if not rows:
            raise ValueError(f"{path}: no samples")
        data = np.array(rows)
        return cls(data[:, 0], data[:, 1:])


def profile_values(theta, params: AnchoringParams) -> np.ndarray:
    """``u_s = (sin a cos d, cos a, sin a sin d)``, ``a = pi - A sin^2 t``, ``d = B sin 2t``."""
    theta = np.asarray(theta, dtype=float)
    alpha = np.pi - params.amp_polar * np.sin(theta) ** 2
    delta = params.amp_tilt * np.sin(2 * theta)
    return np.stack(
        [np.sin(alpha) * np.cos(delta), np.cos(alpha), np.sin(alpha) * np.sin(delta)], axis=-1
    )


def default_profile(params: AnchoringParams, grid) -> AnchoringProfile:
    """Closed-form profile sampled at both poles and at every colloid node."""
    t = np.asarray(grid.t, dtype=float)
    if t.size == 0:
        raise ValueError("grid has no colloid-boundary nodes")
    theta = np.concatenate([[0.0], t, [np.pi]])
    values = profile_values(theta, params)
    # sin(pi) is not exactly zero in floating point
    values[[0, -1]] = POLE_VALUE
    return AnchoringProfile(theta, values)


def profile_on_grid(profile: AnchoringProfile, grid) -> np.ndarray:
    """Profile values aligned with the grid's colloid nodes.

    Samples whose angle matches a node are used as they are; otherwise the
    profile is interpolated component-wise and renormalised.
    """
    order = np.argsort(profile.theta)
    th, vals = profile.theta[order], profile.values[order]
    pos = np.clip(np.searchsorted(th, grid.t), 0, th.size - 1)
    prev = np.clip(pos - 1, 0, th.size - 1)
    pick = np.where(np.abs(th[prev] - grid.t) < np.abs(th[pos] - grid.t), prev, pos)
    if np.all(np.abs(th[pick] - grid.t) <= 1e-12):
        return vals[pick]
    out = np.stack([np.interp(grid.t, th, vals[:, k]) for k in range(3)], axis=-1)
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


@dataclass
class ConstraintCheck:
    name: str
    passed: bool
    violation: float
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[ConstraintCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> ConstraintCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "violation": c.violation, "detail": c.detail}
                for c in self.checks
            ],
        }

    def lines(self) -> list[str]:
        return [
            f"{'PASS' if c.passed else 'FAIL'}  {c.name:<16} violation={c.violation:.3e}  {c.detail}".rstrip()
            for c in self.checks
        ]


def validate_profile(
    profile: AnchoringProfile,
    norm_tol: float = 1e-10,
    pole_tol: float = 1e-10,
    sign_tol: float = 1e-12,
    const_tol: float = 1e-6,
    extrap_tol: float = 1e-6,
) -> ValidationReport:
    """Check the four anchoring constraints, reporting the worst violation of each.

    Pole values are read from samples at ``t = 0`` and ``t = pi`` when present.
    Profiles without pole samples are extrapolated there and judged against
    the looser ``extrap_tol``.
    """
    theta, vals = profile.theta, profile.values
    report = ValidationReport()

    norm_dev = float(np.max(np.abs(np.linalg.norm(vals, axis=-1) - 1.0)))
    report.checks.append(ConstraintCheck("unit_norm", norm_dev <= norm_tol, norm_dev))

    pole_dev, extrapolated = 0.0, False
    for target in (0.0, np.pi):
        hit = np.flatnonzero(np.abs(theta - target) <= 1e-12)
        if hit.size:
            value = vals[hit[0]]
        else:
            # quadratic extrapolation from the three samples nearest the pole
            near = np.argsort(np.abs(theta - target))[:3]
            value = np.array(
                [np.polyval(np.polyfit(theta[near], vals[near, k], min(2, near.size - 1)), target)
                 for k in range(3)]
            )
            extrapolated = True
        pole_dev = max(pole_dev, float(np.linalg.norm(value - POLE_VALUE)))
    allowed = extrap_tol if extrapolated else pole_tol
    report.checks.append(
        ConstraintCheck(
            "pole_value", pole_dev <= allowed, pole_dev, "extrapolated" if extrapolated else ""
        )
    )

    neg = float(max(0.0, -np.min(vals[:, 0])))
    report.checks.append(ConstraintCheck("first_nonneg", neg <= sign_tol, neg))

    spans = np.ptp(vals, axis=0)
    flat = [k + 1 for k in range(3) if spans[k] <= const_tol]
    report.checks.append(
        ConstraintCheck(
            "non_constant",
            not flat,
            float(max(0.0, const_tol - spans.min())),
            f"constant components: {flat}" if flat else "",
        )
    )
    return report
