"""Post-processing of converged fields: poles, axis singularities, densities.

All functions take a field of shape ``(n_nodes, 3)`` on a
:class:`~boojum.grid.MeridianGrid` and never modify it.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .energy import FAR_FIELD_VALUE, energy_density
from .grid import MeridianGrid, Tag
from .io import atomic_write_text
from .tensor import biaxiality_b, degenerate_mask, director

log = logging.getLogger(__name__)

POLE_TARGET = np.array([0.0, -1.0, 0.0])
E_RHO = np.array([1.0, 0.0, 0.0])
SIDES = ("north", "south")
UNRESOLVED = "unresolved layer - refine grid"


def _grid_u(u, grid):
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.size, 3):
        raise ValueError(f"field has shape {u.shape}, grid expects ({grid.size}, 3)")
    return u.reshape(*grid.shape, 3)


def _axis_column(grid, side):
    return 0 if side == "north" else grid.t.size - 1


# -- axis census ---------------------------------------------------------------

@dataclass
class AxisJump:
    r: float
    u2_before: float
    u2_after: float


@dataclass
class AxisCensus:
    side: str
    jumps: list[AxisJump]
    flags: list[str] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.jumps)

    @property
    def parity(self) -> str:
        return "odd" if self.count % 2 else "even"


def _census_line(r, u2, side, guard=0.5, max_plateau=3) -> AxisCensus:
    strong = np.abs(u2) > guard
    flags = []
    # runs of weak nodes are transition layers; long ones are under-resolved
    run = 0
    for k, ok in enumerate(np.append(strong, True)):
        if not ok:
            run += 1
            continue
        if run > max_plateau:
            flags.append(f"{UNRESOLVED} (|u2| <= {guard} over {run} nodes ending at r={r[k - 1]:.4g})")
        run = 0

    idx = np.flatnonzero(strong)
    jumps = []
    for a, b in zip(idx[:-1], idx[1:]):
        if np.sign(u2[a]) == np.sign(u2[b]):
            continue
        # locate the zero crossing inside the layer by linear interpolation
        seg = np.arange(a, b + 1)
        s = np.sign(u2[seg])
        k = seg[np.flatnonzero(s[:-1] != s[1:])[0]] if np.any(s[:-1] != s[1:]) else a
        if u2[k + 1] == u2[k]:
            loc = 0.5 * (r[k] + r[k + 1])
        else:
            loc = r[k] + (r[k + 1] - r[k]) * u2[k] / (u2[k] - u2[k + 1])
        jumps.append(AxisJump(float(loc), float(u2[a]), float(u2[b])))
    return AxisCensus(side, jumps, flags)


def axis_census(u, grid: MeridianGrid, guard: float = 0.5, max_plateau: int = 3) -> dict[str, AxisCensus]:
    """Sign changes of ``u2`` along the two near-axis lines, scanned outward.

    Only nodes with ``|u2| > guard`` take part, so a jump is counted once even
    when the transition layer spans several nodes. Runs of more than
    ``max_plateau`` consecutive weak nodes raise an ``unresolved layer`` flag.
    """
    uu = _grid_u(u, grid)
    return {
        side: _census_line(grid.r, uu[:, _axis_column(grid, side), 1], side, guard, max_plateau)
        for side in SIDES
    }


# -- poles ---------------------------------------------------------------------

@dataclass
class PoleReport:
    side: str
    node: int
    value: np.ndarray
    deviation: float
    violation: bool
    trace_rho: np.ndarray
    trace_dist: np.ndarray
    trace_b: np.ndarray

    @property
    def monotone_tail(self) -> bool:
        """Director distance strictly decreasing over the last four nodes toward the pole."""
        tail = self.trace_dist[-4:]
        return bool(tail.size == 4 and np.all(np.diff(tail) < 0))


def pole_analysis(u, grid: MeridianGrid, tol: float = 1e-2, n_trace: int = 8) -> dict[str, PoleReport]:
    """Pole values and the director along the colloid row as ``rho -> 0``.

    Traces are ordered by decreasing ``rho``, so the last entry is the node
    nearest the pole. Distances use the sign convention ``d_rho >= 0`` and so
    lie in ``[0, sqrt 2]``.
    """
    uu = _grid_u(u, grid)
    nt = grid.t.size
    n_trace = max(1, min(n_trace, nt // 2))
    out = {}
    for side in SIDES:
        cols = np.arange(n_trace)[::-1] if side == "north" else np.arange(nt - n_trace, nt)
        vals = uu[0, cols]
        d = director(vals).as_array()
        dist = np.linalg.norm(d - E_RHO, axis=-1)
        j = _axis_column(grid, side)
        value = uu[0, j].copy()
        dev = float(np.linalg.norm(value - POLE_TARGET))
        out[side] = PoleReport(
            side=side,
            node=int(grid.index(0, j)),
            value=value,
            deviation=dev,
            violation=dev >= tol,
            trace_rho=np.sin(grid.t[cols]),
            trace_dist=dist,
            trace_b=biaxiality_b(vals),
        )
    return out


# -- near-axis expansion ---------------------------------------------------------

@dataclass
class ExpansionFit:
    side: str
    radial_index: int
    r: float
    axis_value: float
    slopes: dict[str, float]
    coefficient: float
    status: str = "ok"

    @property
    def sign_consistent(self) -> bool:
        # u2 bends away from its axis value +-1 into the sphere
        return self.status == "ok" and self.coefficient * self.axis_value < 0


@dataclass
class ExpansionReport:
    side: str
    fits: list[ExpansionFit]
    notice: str = ""

    def median_slopes(self) -> dict[str, float]:
        ok = [f for f in self.fits if f.status == "ok"]
        if not ok:
            return {}
        return {k: float(np.median([f.slopes[k] for f in ok])) for k in ("u1", "u2", "u3")}


def _loglog_slope(x, y, floor=1e-13):
    y = np.abs(y)
    if np.any(y <= floor):
        return np.nan
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def near_axis_expansion_check(u, grid: MeridianGrid, n_cols: int = 4, census=None,
                              flat_tol: float = 1e-12) -> dict[str, ExpansionReport]:
    """Fit the leading powers of ``u`` in ``rho`` across the first polar columns.

    For every radial line in the regular stretch between the colloid and the
    first axis jump, ``u2 - s`` (``s = +-1`` the axis value), ``u1`` and ``u3``
    are fitted against ``rho = r sin t`` over ``n_cols`` near-axis columns.
    Expected slopes are 2, 2 and 1. The result is diagnostic only.
    """
    uu = _grid_u(u, grid)
    census = census or axis_census(u, grid)
    nt = grid.t.size
    out = {}
    for side in SIDES:
        cols = np.arange(n_cols) if side == "north" else np.arange(nt - 1, nt - 1 - n_cols, -1)
        stop = census[side].jumps[0].r if census[side].jumps else grid.r[-1]
        # interior radial lines only; the colloid and pinned rows are excluded
        rows = [i for i in range(1, grid.r.size - 1) if grid.r[i] < stop]
        if len(rows) < 3:
            out[side] = ExpansionReport(side, [], notice=f"regular segment has {len(rows)} nodes (< 3); skipped")
            continue
        fits = []
        for i in rows:
            rho = grid.r[i] * np.sin(grid.t[cols])
            v = uu[i, cols]
            s = 1.0 if v[0, 1] >= 0 else -1.0
            dev2 = v[:, 1] - s
            if np.all(np.abs(v[:, [0, 2]]) <= flat_tol) and np.all(np.abs(dev2) <= flat_tol):
                fits.append(ExpansionFit(side, i, float(grid.r[i]), s,
                                         {"u1": np.nan, "u2": np.nan, "u3": np.nan}, 0.0, "flat"))
                continue
            slopes = {
                "u1": _loglog_slope(rho, v[:, 0]),
                "u2": _loglog_slope(rho, dev2),
                "u3": _loglog_slope(rho, v[:, 2]),
            }
            c = float(np.dot(dev2, rho ** 2) / np.dot(rho ** 2, rho ** 2))
            fits.append(ExpansionFit(side, i, float(grid.r[i]), s, slopes, c))
        out[side] = ExpansionReport(side, fits)
    return out


# -- energy densities -------------------------------------------------------------

@dataclass
class DensityProfile:
    kind: str
    center: tuple[float, float]
    radii: np.ndarray
    values: np.ndarray
    notices: list[str] = field(default_factory=list)


def grid_floor(grid: MeridianGrid) -> float:
    """Smallest probe radius resolved by the lattice: two first radial steps."""
    return 2.0 * float(grid.r[1] - grid.r[0])


def density_probe(u, grid: MeridianGrid, center, radii, density=None) -> DensityProfile:
    """Scaled energy of the field in balls around ``center = (rho, z)``.

    On the axis (``rho = 0``) this is the half-ball density
    ``Theta(r) = r^-1 int_{B_r} e rho drho dz``; off the axis it is the planar
    ``Xi(r) = int_{D_r} e drho dz``. Here ``e = |Du|^2 + rho^-2 (4 u1^2 + u3^2)``
    and the ``2 pi`` azimuthal factor is omitted. A dual cell counts when its
    node lies in the ball. Radii reaching the outer boundary are truncated.
    """
    rc, zc = map(float, center)
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if np.any(radii <= 0):
        raise ValueError("probe radii must be positive")
    e = energy_density(u, grid) if density is None else np.asarray(density)
    on_axis = abs(rc) < 1e-12
    kind = "theta" if on_axis else "xi"
    weights = grid.cell_weights if on_axis else grid.area_weights

    # largest ball that stays inside the outer boundary
    reach = grid.config.outer_radius - np.hypot(rc, zc)
    notices = []
    if np.any(radii > reach):
        notices.append(f"radii above {reach:.4g} exceed the domain; truncated")
        radii = np.minimum(radii, reach)
    floor = grid_floor(grid)
    if np.any(radii < floor):
        notices.append(f"radii below the grid floor {floor:.4g} are not resolved")

    dist = np.hypot(grid.rho - rc, grid.z - zc)
    contrib = e * weights
    values = np.array([contrib[dist <= s].sum() for s in radii])
    if on_axis:
        values = values / radii
    return DensityProfile(kind, (rc, zc), radii, values, notices)


# -- far field, biaxiality, phases ---------------------------------------------

def far_field_check(u, grid: MeridianGrid) -> float:
    """Largest ``|u - (0,1,0)|`` over ``r >= R_out/2``, excluding the pinned row."""
    u = np.asarray(u, dtype=float)
    sel = (grid.node_r >= 0.5 * grid.config.outer_radius) & (grid.tags != Tag.FAR_FIELD)
    if not np.any(sel):
        return 0.0
    return float(np.max(np.linalg.norm(u[sel] - FAR_FIELD_VALUE, axis=1)))


def _axis_mask(grid):
    j = grid.node_t
    return (j == grid.t[0]) | (j == grid.t[-1])


@dataclass
class BiaxialityReport:
    b_min: float
    b_min_off_axis: float
    near_floor_nodes: int
    near_floor_off_axis: int

    @property
    def confined(self) -> bool:
        return self.near_floor_off_axis == 0


def b_field_report(u, grid: MeridianGrid, tol: float = 1e-3) -> BiaxialityReport:
    """Minimum of ``b`` and where values within ``tol`` of ``-1/2`` occur."""
    b = biaxiality_b(u)
    axis = _axis_mask(grid)
    near = b <= -0.5 + tol
    off = b[~axis]
    return BiaxialityReport(
        b_min=float(b.min()),
        b_min_off_axis=float(off.min()) if off.size else np.nan,
        near_floor_nodes=int(np.count_nonzero(near)),
        near_floor_off_axis=int(np.count_nonzero(near & ~axis)),
    )


def degenerate_fraction(u, grid: MeridianGrid, tol: float = 1e-3, factor: float = 3.0) -> float:
    """Share of degenerate-uniaxial nodes lying farther than ``factor`` near-axis radii from the axis."""
    deg = degenerate_mask(u, tol=tol)
    if not np.any(deg):
        return 0.0
    limit = factor * grid.node_r * np.sin(grid.t[0])
    return float(np.count_nonzero(deg & (grid.rho > limit)) / np.count_nonzero(deg))


# -- director raster --------------------------------------------------------------

RASTER_COLUMNS = ["rho", "z", "inside", "u1", "u2", "u3", "d_rho", "d_phi", "d_z", "b"]


def director_raster(u, grid: MeridianGrid, n_rho: int = 64, n_z: int = 128, extent: float | None = None):
    """Sample field and director on a uniform ``(rho, z)`` raster.

    Returns an array with columns :data:`RASTER_COLUMNS`; points outside the
    annulus have ``inside = 0`` and NaN values.
    """
    uu = _grid_u(u, grid)
    R = grid.config.outer_radius
    extent = R if extent is None else float(extent)
    rho = np.linspace(0.0, extent, n_rho)
    z = np.linspace(-extent, extent, n_z)
    P, Z = np.meshgrid(rho, z, indexing="xy")
    r = np.hypot(P, Z)
    t = np.arctan2(P, Z)
    inside = (r >= 1.0) & (r <= R)
    # the polar lattice is cell-centred; values beyond the outer columns are held constant
    tq = np.clip(t, grid.t[0], grid.t[-1])
    rq = np.clip(r, 1.0, R)
    interp = RegularGridInterpolator((grid.r, grid.t), uu)
    vals = interp(np.stack([rq.ravel(), tq.ravel()], axis=-1))
    vals /= np.linalg.norm(vals, axis=1, keepdims=True)
    d = director(vals).as_array()
    b = biaxiality_b(vals)
    table = np.column_stack([P.ravel(), Z.ravel(), inside.ravel().astype(float), vals, d, b])
    table[~inside.ravel(), 3:] = np.nan
    return table


def write_raster_csv(path, table) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RASTER_COLUMNS)
    for row in table:
        writer.writerow([repr(float(x)) if np.isfinite(x) else "nan" for x in row])
    atomic_write_text(path, buf.getvalue())


# -- combined report ------------------------------------------------------------

@dataclass
class DefectReport:
    pole_value_north: np.ndarray
    pole_value_south: np.ndarray
    axis_jumps_north: list[AxisJump]
    axis_jumps_south: list[AxisJump]
    jump_count_parity: dict[str, str]
    pole_director_trace: dict[str, list[tuple[float, float]]]
    far_field_deviation: float
    b_field_min_off_axis: float
    pole_violation: dict[str, bool]
    degenerate_off_axis_fraction: float
    flags: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pole_value_north"] = [float(x) for x in self.pole_value_north]
        d["pole_value_south"] = [float(x) for x in self.pole_value_south]
        return d


def analyze(u, grid: MeridianGrid, tol: float = 1e-2) -> DefectReport:
    census = axis_census(u, grid)
    poles = pole_analysis(u, grid, tol=tol)
    flags = [f"{side}: {msg}" for side in SIDES for msg in census[side].flags]
    for side in SIDES:
        if poles[side].violation:
            flags.append(
                f"{side}: pole value {np.round(poles[side].value, 6).tolist()} is "
                f"{poles[side].deviation:.3g} away from (0, -1, 0)"
            )
    for msg in flags:
        log.info("%s", msg)
    return DefectReport(
        pole_value_north=poles["north"].value,
        pole_value_south=poles["south"].value,
        axis_jumps_north=census["north"].jumps,
        axis_jumps_south=census["south"].jumps,
        jump_count_parity={side: census[side].parity for side in SIDES},
        pole_director_trace={
            side: [(float(a), float(b)) for a, b in zip(poles[side].trace_rho, poles[side].trace_dist)]
            for side in SIDES
        },
        far_field_deviation=far_field_check(u, grid),
        b_field_min_off_axis=b_field_report(u, grid).b_min_off_axis,
        pole_violation={side: poles[side].violation for side in SIDES},
        degenerate_off_axis_fraction=degenerate_fraction(u, grid),
        flags=flags,
    )
