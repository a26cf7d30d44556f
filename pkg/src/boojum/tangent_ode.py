"""Shooting test for 0-homogeneous tangent maps at a boundary point.

A tangent map ``v(theta)`` on ``(0, pi/2)`` with values on the unit sphere solves

    -(sin th v')' + (4 v1, 0, v3) / sin th = [ |v'|^2 sin th + (4 v1^2 + v3^2) / sin th ] v

and conserves ``C_e = |v'|^2 sin^2 th - (4 v1^2 + v3^2)``. Solutions regular at
``th = 0`` start from ``v ~ (a tan^2(th/2), -1, b tan(th/2))``; the free
boundary at ``th = pi/2`` requires ``v1 = v3 = 0`` and ``|v'|^2 = C_e``. The
sweep in :func:`shoot_classify` checks that only ``a = b = 0`` meets both.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import DOP853

K_DIAG = np.array([4.0, 0.0, 1.0])


def rhs(theta, y):
    v, vp = y[:3], y[3:]
    s, c = np.sin(theta), np.cos(theta)
    kv = K_DIAG * v
    lam = vp @ vp * s + v @ kv / s
    return np.concatenate([vp, (-c * vp + kv / s - lam * v) / s])


def conserved(theta, v, vp):
    """First integral ``C_e`` along a trajectory (broadcasts over rows)."""
    s = np.sin(theta)
    return np.sum(vp * vp, axis=-1) * s ** 2 - (v * v) @ K_DIAG


@dataclass
class Trajectory:
    theta: np.ndarray
    v: np.ndarray
    v_prime: np.ndarray
    success: bool
    message: str = ""

    @property
    def C_e(self) -> np.ndarray:
        return conserved(self.theta, self.v, self.v_prime)

    @property
    def ce_drift(self) -> float:
        ce = self.C_e
        return float(np.max(np.abs(ce - ce[0])))

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.v, axis=1) - 1.0)))

    @property
    def tangency(self) -> float:
        return float(np.max(np.abs(np.sum(self.v * self.v_prime, axis=1))))

    def mismatch(self) -> float:
        """Natural-boundary residual ``|v1| + |v3| + ||v'|^2 - C_e|`` at the end point."""
        v, vp = self.v[-1], self.v_prime[-1]
        ce = self.C_e[-1]
        return float(abs(v[0]) + abs(v[2]) + abs(vp @ vp - ce))


def _project(y):
    v = y[:3] / np.linalg.norm(y[:3])
    vp = y[3:] - (v @ y[3:]) * v
    return np.concatenate([v, vp])


def integrate(v0, v0_prime, theta0: float = 1e-2, theta1: float = np.pi / 2, tol: float = 1e-12,
              max_steps: int = 200_000) -> Trajectory:
    """Adaptive DOP853 integration from ``theta0`` to ``theta1``.

    After each accepted step ``v`` is renormalised and ``v'`` projected onto
    the tangent plane. A failed step (e.g. step-size underflow) ends the run
    with ``success=False`` and keeps the states reached so far.
    """
    v0 = np.asarray(v0, dtype=float)
    v0_prime = np.asarray(v0_prime, dtype=float)
    if not theta0 > 0:
        raise ValueError("theta0 must be > 0; the system is singular at theta = 0")
    if abs(np.linalg.norm(v0) - 1.0) > 1e-10:
        raise ValueError("v0 must be a unit vector")
    if abs(v0 @ v0_prime) > 1e-8:
        raise ValueError("v0_prime must be orthogonal to v0")

    solver = DOP853(rhs, theta0, np.concatenate([v0, v0_prime]), theta1, rtol=tol, atol=tol * 1e-2)
    thetas, states = [theta0], [solver.y.copy()]
    message, ok = "", True
    for _ in range(max_steps):
        if solver.status != "running":
            break
        msg = solver.step()
        if solver.status == "failed":
            ok, message = False, f"integration stopped at theta={solver.t:.6g}: {msg}"
            break
        y = _project(solver.y)
        solver.y = y
        # keep the first-same-as-last derivative consistent with the projected state
        solver.f = rhs(solver.t, y)
        thetas.append(solver.t)
        states.append(y.copy())
    else:
        ok, message = False, f"max_steps={max_steps} reached at theta={solver.t:.6g}"
    ys = np.array(states)
    return Trajectory(np.array(thetas), ys[:, :3], ys[:, 3:], ok, message)


def regular_start(a: float, b: float, theta0: float = 1e-2, pole: float = -1.0):
    """Initial state on the regular branch ``v1 = a T^2``, ``v3 = b T``, ``T = tan(theta/2)``."""
    T = np.tan(0.5 * theta0)
    v1, v3 = a * T ** 2, b * T
    rest = 1.0 - v1 ** 2 - v3 ** 2
    if rest <= 0:
        raise ValueError(f"perturbation ({a}, {b}) too large for theta0={theta0}")
    v2 = pole * np.sqrt(rest)
    d1 = a * T * (1 + T ** 2)
    d3 = 0.5 * b * (1 + T ** 2)
    d2 = -(v1 * d1 + v3 * d3) / v2
    return np.array([v1, v2, v3]), np.array([d1, d2, d3])


@dataclass
class Shot:
    a: float
    b: float
    magnitude: float
    mismatch: float
    ce_drift: float
    norm_drift: float
    success: bool


@dataclass
class ShotReport:
    tol: float
    theta0: float
    zero_shot: Shot
    shots: list[Shot] = field(default_factory=list)

    @property
    def min_nonzero_mismatch(self) -> float:
        return min(s.mismatch for s in self.shots) if self.shots else np.inf

    @property
    def max_ce_drift(self) -> float:
        return max(s.ce_drift for s in [self.zero_shot, *self.shots])

    @property
    def certified(self) -> bool:
        """Only the unperturbed start satisfies the boundary condition, with a 10x margin."""
        return self.zero_shot.mismatch < self.tol and self.min_nonzero_mismatch > 10 * self.tol

    def as_dict(self) -> dict:
        from dataclasses import asdict

        return {
            "tol": self.tol,
            "theta0": self.theta0,
            "certified": self.certified,
            "zero_shot": asdict(self.zero_shot),
            "min_nonzero_mismatch": self.min_nonzero_mismatch,
            "max_ce_drift": self.max_ce_drift,
            "shots": [asdict(s) for s in self.shots],
        }


def perturbation_grid(n_mag: int = 8, n_angle: int = 8, lo: float = 1e-3, hi: float = 1.0):
    """``(magnitude, a, b)`` rows: log-spaced magnitudes times evenly spread directions."""
    mags = np.logspace(np.log10(lo), np.log10(hi), n_mag)
    angles = 2 * np.pi * (np.arange(n_angle) + 0.5) / n_angle
    return [(m, m * np.cos(t), m * np.sin(t)) for m in mags for t in angles]


def _shoot(a, b, m, theta0, tol):
    v0, vp0 = regular_start(a, b, theta0)
    tr = integrate(v0, vp0, theta0, np.pi / 2, tol)
    return Shot(float(a), float(b), float(m), tr.mismatch(), tr.ce_drift, tr.norm_drift, tr.success)


def shoot_classify(perturbations=None, tol: float = 1e-6, theta0: float = 1e-2,
                   ode_tol: float = 1e-12) -> ShotReport:
    """Integrate every regular start to ``pi/2`` and record the boundary mismatch."""
    perturbations = perturbation_grid() if perturbations is None else perturbations
    zero = _shoot(0.0, 0.0, 0.0, theta0, ode_tol)
    shots = [_shoot(a, b, m, theta0, ode_tol) for m, a, b in perturbations]
    return ShotReport(tol, theta0, zero, shots)
