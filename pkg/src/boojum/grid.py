"""Boundary-fitted lattice on the meridian half-plane outside the unit disk.

Nodes live on curvilinear coordinates ``(r, t)`` with ``rho = r sin t`` and
``z = r cos t``. Radial lines are vertex-centred (``r = 1`` and ``r = R_out``
are node rows), polar lines are cell-centred so that no node touches the
symmetry axis. Every node owns a dual cell; the integral of ``f rho drho dz``
is approximated by ``sum(f[i] * cell_weights[i])`` where the weights are the
exact cell moments ``int r^2 sin(t) dr dt``.

Arrays indexed by node use the flattened ``(n_radial + 1, n_polar)`` lattice in
C order, i.e. ``index = i * n_polar + j``.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np


class Tag(IntEnum):
    INTERIOR = 0
    COLLOID_BOUNDARY = 1
    FAR_FIELD = 2
    NEAR_AXIS_NORTH = 3
    NEAR_AXIS_SOUTH = 4

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class GridConfig:
    n_radial: int = 64
    n_polar: int = 128
    outer_radius: float = 20.0
    grading: float = 1.05

    def __post_init__(self):
        if int(self.n_radial) != self.n_radial or self.n_radial < 2:
            raise ValueError(f"n_radial must be an integer >= 2, got {self.n_radial!r}")
        if int(self.n_polar) != self.n_polar or self.n_polar < 4:
            raise ValueError(f"n_polar must be an integer >= 4, got {self.n_polar!r}")
        if not np.isfinite(self.outer_radius) or self.outer_radius <= 1.0:
            raise ValueError(f"outer_radius must be > 1, got {self.outer_radius!r}")
        if not np.isfinite(self.grading) or self.grading < 1.0:
            raise ValueError(f"grading must be >= 1, got {self.grading!r}")

    def digest(self) -> str:
        """Stable hash identifying the lattice, used to match checkpoints."""
        payload = json.dumps(
            {k: repr(v) for k, v in asdict(self).items()}, sort_keys=True
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def radial_nodes(n_radial: int, outer_radius: float, grading: float) -> np.ndarray:
    """Nodes ``1 = r_0 < ... < r_n = outer_radius`` with steps ``h_k = h_0 g^k``."""
    k = np.arange(n_radial)
    if grading == 1.0:
        steps = np.full(n_radial, 1.0)
    else:
        steps = grading ** k.astype(float)
    steps *= (outer_radius - 1.0) / steps.sum()
    r = np.concatenate([[1.0], 1.0 + np.cumsum(steps)])
    r[-1] = outer_radius
    return r


@dataclass(frozen=True, eq=False)
class MeridianGrid:
    """Immutable lattice with quadrature weights and node tags.

    Attributes
    ----------
    r, t : 1-d arrays of the radial (``n_radial + 1``) and polar (``n_polar``)
        coordinate lines.
    cell_weights : exact ``rho drho dz`` moment of each node's dual cell.
    area_weights : exact ``drho dz`` area of each node's dual cell.
    surface_weights : ``dz`` length of the dual arc of each colloid node
        (length ``n_polar``, aligned with ``t``).
    tags : per-node :class:`Tag` codes.
    """

    config: GridConfig
    r: np.ndarray
    t: np.ndarray
    r_edges: np.ndarray
    t_edges: np.ndarray
    cell_weights: np.ndarray
    area_weights: np.ndarray
    surface_weights: np.ndarray
    tags: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.r.size, self.t.size)

    @property
    def size(self) -> int:
        return self.r.size * self.t.size

    @property
    def dtheta(self) -> float:
        return np.pi / self.t.size

    @property
    def node_r(self) -> np.ndarray:
        return np.repeat(self.r, self.t.size)

    @property
    def node_t(self) -> np.ndarray:
        return np.tile(self.t, self.r.size)

    @property
    def rho(self) -> np.ndarray:
        return self.node_r * np.sin(self.node_t)

    @property
    def z(self) -> np.ndarray:
        return self.node_r * np.cos(self.node_t)

    def index(self, i, j):
        return np.asarray(i) * self.t.size + np.asarray(j)

    @property
    def colloid_nodes(self) -> np.ndarray:
        return self.index(0, np.arange(self.t.size))

    @property
    def far_field_nodes(self) -> np.ndarray:
        return self.index(self.r.size - 1, np.arange(self.t.size))

    def row(self, j: int) -> np.ndarray:
        """Indices of the radial line at polar index ``j``, ordered outward."""
        return self.index(np.arange(self.r.size), j)

    def tag_counts(self) -> dict[str, int]:
        return {tag.label: int(np.count_nonzero(self.tags == tag)) for tag in Tag}

    def to_csv(self, path) -> None:
        path = Path(path)
        rho, z = self.rho, self.z
        nr, nt = self.node_r, self.node_t
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "r", "theta_hat", "rho", "z", "tag"])
            for k in range(self.size):
                writer.writerow(
                    [k, repr(float(nr[k])), repr(float(nt[k])), repr(float(rho[k])),
                     repr(float(z[k])), Tag(int(self.tags[k])).label]
                )


def classify_nodes(r: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Tag codes for the ``len(r) x len(t)`` lattice.

    Colloid and far-field rows take precedence over the near-axis columns.
    """
    tags = np.full((r.size, t.size), Tag.INTERIOR, dtype=np.int8)
    tags[:, 0] = Tag.NEAR_AXIS_NORTH
    tags[:, -1] = Tag.NEAR_AXIS_SOUTH
    tags[0, :] = Tag.COLLOID_BOUNDARY
    tags[-1, :] = Tag.FAR_FIELD
    return tags.ravel()


def build_grid(cfg: GridConfig) -> MeridianGrid:
    r = radial_nodes(cfg.n_radial, cfg.outer_radius, cfg.grading)
    dt = np.pi / cfg.n_polar
    t = (np.arange(cfg.n_polar) + 0.5) * dt
    t_edges = np.arange(cfg.n_polar + 1) * dt
    t_edges[-1] = np.pi

    mid = 0.5 * (r[1:] + r[:-1])
    r_edges = np.concatenate([[r[0]], mid, [r[-1]]])

    r_moment = (r_edges[1:] ** 3 - r_edges[:-1] ** 3) / 3.0
    r_area = (r_edges[1:] ** 2 - r_edges[:-1] ** 2) / 2.0
    t_moment = np.cos(t_edges[:-1]) - np.cos(t_edges[1:])

    cell_weights = np.outer(r_moment, t_moment).ravel()
    area_weights = np.outer(r_area, np.diff(t_edges)).ravel()
    # the colloid arc has r = 1, so dz over the dual arc is the polar moment
    surface_weights = t_moment.copy()

    grid = MeridianGrid(
        config=cfg,
        r=r,
        t=t,
        r_edges=r_edges,
        t_edges=t_edges,
        cell_weights=cell_weights,
        area_weights=area_weights,
        surface_weights=surface_weights,
        tags=classify_nodes(r, t),
    )
    for arr in (r, t, r_edges, t_edges, cell_weights, area_weights, surface_weights, grid.tags):
        arr.setflags(write=False)
    return grid


def domain_moment(outer_radius: float) -> float:
    """Closed form of ``int rho drho dz`` over the truncated half-annulus."""
    return 2.0 * (outer_radius ** 3 - 1.0) / 3.0


def first_step(cfg: GridConfig) -> float:
    return float(np.diff(radial_nodes(cfg.n_radial, cfg.outer_radius, cfg.grading)[:2])[0])


def extend_outer_radius(cfg: GridConfig, outer_radius: float) -> GridConfig:
    """Config reaching ``outer_radius`` with the same grading, first step and polar count.

    The radial count is the nearest integer that keeps the first step of
    ``cfg``; the step sequence is then rescaled slightly to land on the new
    outer radius, so the resolution per unit length is preserved.
    """
    h0, g = first_step(cfg), cfg.grading
    span = outer_radius - 1.0
    n = span / h0 if g == 1.0 else np.log1p(span * (g - 1.0) / h0) / np.log(g)
    return GridConfig(max(2, int(round(n))), cfg.n_polar, outer_radius, g)
