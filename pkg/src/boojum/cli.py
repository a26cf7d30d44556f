"""Command-line entry point.

Exit codes: 0 success (solver converged, checks passed), 1 usage, config or
input error, 2 the run finished but did not converge or a check failed.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import defects
from .anchoring import AnchoringParams, AnchoringProfile, default_profile, validate_profile
from .config import ConfigError, RunConfig, load_config
from .grid import GridConfig, build_grid
from .io import CheckpointError, dumps_json, read_checkpoint, write_checkpoint, write_field_csv, write_json
from .minimizer import SolverError, continuation, initial_field, select_minimizer, solve, solve_restarts
from .tangent_ode import perturbation_grid, shoot_classify

log = logging.getLogger("boojum")

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2


class UsageError(Exception):
    pass


def _profile(cfg: RunConfig, grid):
    if cfg.anchoring_profile is None:
        return default_profile(cfg.anchoring, grid)
    try:
        return AnchoringProfile.from_csv(cfg.anchoring_profile)
    except (OSError, ValueError) as exc:
        raise UsageError(f"anchoring profile: {exc}") from None


def _run_solver(cfg: RunConfig, grid, profile):
    solver = cfg.solver
    if cfg.solver.checkpoint_every:
        solver = replace(solver, checkpoint_path=str(cfg.outputs / "checkpoint.csv"))
    if solver.continuation_nus:
        u0 = None
        if cfg.init != "meridian_rotation":
            u0 = _initial(cfg, grid, solver)
        stages = continuation(grid, profile, cfg.model, solver, u0=u0)
        return stages[-1], stages
    if solver.restarts:
        runs = solve_restarts(grid, profile, cfg.model, solver)
        return select_minimizer(runs), runs
    res = solve(_initial(cfg, grid, solver), grid, profile, cfg.model, solver)
    return res, [res]


def _initial(cfg, grid, solver):
    try:
        return initial_field(grid, cfg.init, solver, rng=np.random.default_rng(cfg.seed),
                             checkpoint=cfg.init_checkpoint)
    except (OSError, CheckpointError) as exc:
        raise UsageError(f"initial field: {exc}") from None


def _run_summary(res):
    return {
        "converged": res.converged,
        "iterations": res.iterations,
        "grad_norm": res.grad_norm,
        "message": res.message,
        "nu": res.params.nu if res.params else None,
        "energy": res.breakdown.as_dict(),
    }


def _analyses(u, grid, analyses, out: Path) -> dict:
    written = {}
    if analyses & {"defects", "far_field"}:
        report = defects.analyze(u, grid)
        write_json(out / "report.json", report.as_dict())
        written["report"] = report
        if "defects" in analyses:
            defects.write_raster_csv(out / "director_raster.csv", defects.director_raster(u, grid))
    if "densities" in analyses:
        write_json(out / "densities.json", _density_table(u, grid, None, None))
    if "tangent_ode" in analyses:
        write_json(out / "tangent_ode.json", shoot_classify().as_dict())
    return written


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    if cfg.threads:
        log.info("threads=%d requested; the solver runs single-threaded", cfg.threads)
    grid = build_grid(cfg.grid)
    profile = _profile(cfg, grid)
    check = validate_profile(profile)
    if not check.passed:
        for line in check.lines():
            print(line, file=sys.stderr)
        raise UsageError("anchoring profile violates its constraints")

    out = cfg.outputs
    try:
        res, runs = _run_solver(cfg, grid, profile)
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_FAILED

    write_field_csv(out / "field.csv", res.field, grid)
    write_json(
        out / "energy.json",
        {
            **_run_summary(res),
            "grid": asdict(cfg.grid),
            "grid_digest": cfg.grid.digest(),
            "model": asdict(res.params),
            "seed": cfg.seed,
            "runs": [_run_summary(r) for r in runs],
        },
    )
    write_checkpoint(
        out / "checkpoint.csv",
        res.field,
        grid,
        {
            "grid": asdict(cfg.grid),
            "model": asdict(res.params),
            "anchoring": asdict(cfg.anchoring),
            "seed": cfg.seed,
            "iteration": res.iterations,
            "energy": res.breakdown.total,
        },
    )
    _analyses(res.field, grid, cfg.analyses, out)
    print(f"{res.message}; E = {res.breakdown.total:.10g}; artifacts in {out}")
    return EXIT_OK if res.converged else EXIT_FAILED


def _load_checkpoint(path, config=None):
    header, u = read_checkpoint(path)
    try:
        gcfg = GridConfig(**header["grid"])
    except (TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}:1: bad grid section ({exc})") from None
    if gcfg.digest() != header["grid_digest"]:
        raise CheckpointError(f"{path}: grid/config mismatch")
    if config is not None and load_config(config).grid.digest() != header["grid_digest"]:
        raise CheckpointError(f"{path}: grid/config mismatch with {config}")
    return header, build_grid(gcfg), u


def cmd_analyze(args) -> int:
    header, grid, u = _load_checkpoint(args.checkpoint, args.config)
    out = Path(args.out) if args.out else Path(args.checkpoint).parent
    report = defects.analyze(u, grid)
    write_json(out / "report.json", report.as_dict())
    defects.write_raster_csv(out / "director_raster.csv", defects.director_raster(u, grid))
    print(f"parity north={report.jump_count_parity['north']} south={report.jump_count_parity['south']}; "
          f"far-field deviation {report.far_field_deviation:.3e}")
    for flag in report.flags:
        print(f"note: {flag}")
    return EXIT_OK


def _density_table(u, grid, center, radii):
    centers = {"north": (0.0, 1.0), "south": (0.0, -1.0)}
    if center is None:
        chosen = list(centers.items())
    elif center in centers:
        chosen = [(center, centers[center])]
    else:
        try:
            rc, zc = (float(x) for x in center.split(","))
        except ValueError:
            raise UsageError(f"--center must be north, south or RHO,Z; got {center!r}") from None
        chosen = [(center, (rc, zc))]
    if radii is None:
        radii = np.geomspace(defects.grid_floor(grid), 0.5, 12)
    density = defects.energy_density(u, grid)
    table = {}
    for name, c in chosen:
        prof = defects.density_probe(u, grid, c, radii, density=density)
        table[name] = {"kind": prof.kind, "center": list(prof.center), "radii": prof.radii,
                       "values": prof.values, "notices": prof.notices}
    return table


def cmd_densities(args) -> int:
    _, grid, u = _load_checkpoint(args.checkpoint)
    table = _density_table(u, grid, args.center, args.radii)
    text = dumps_json(table)
    if args.out:
        write_json(args.out, table)
    print(text, end="")
    return EXIT_OK


def cmd_validate_anchoring(args) -> int:
    if args.profile:
        try:
            profile = AnchoringProfile.from_csv(args.profile)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read profile: {exc}") from None
    else:
        try:
            params = AnchoringParams(args.amp_polar, args.amp_tilt)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        profile = default_profile(params, build_grid(GridConfig(n_radial=2, n_polar=args.n_polar)))
    report = validate_profile(profile)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_tangent_ode(args) -> int:
    grid = perturbation_grid(args.n_mag, args.n_angle)
    report = shoot_classify(grid, tol=args.tol, theta0=args.theta0, ode_tol=args.ode_tol)
    if args.out:
        write_json(args.out, report.as_dict())
    print(dumps_json({k: v for k, v in report.as_dict().items() if k != "shots"}), end="")
    return EXIT_OK if report.certified else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="boojum", description="Axially symmetric nematic colloid solver")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="minimise the energy for a config file")
    s.add_argument("config")
    s.set_defaults(func=cmd_solve)

    a = sub.add_parser("analyze", help="defect report and director raster for a checkpoint")
    a.add_argument("checkpoint")
    a.add_argument("--config", help="config whose grid must match the checkpoint")
    a.add_argument("--out", help="output directory (default: next to the checkpoint)")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("validate-anchoring", help="check an anchoring profile")
    v.add_argument("--profile", help="CSV with columns theta_hat,us1,us2,us3")
    v.add_argument("--amp-polar", type=float, default=np.pi / 2)
    v.add_argument("--amp-tilt", type=float, default=np.pi / 4)
    v.add_argument("--n-polar", type=int, default=128)
    v.set_defaults(func=cmd_validate_anchoring)

    t = sub.add_parser("tangent-ode", help="shooting certificate for the tangent-map ODE")
    t.add_argument("--tol", type=float, default=1e-6)
    t.add_argument("--theta0", type=float, default=1e-2)
    t.add_argument("--ode-tol", type=float, default=1e-12)
    t.add_argument("--n-mag", type=int, default=8)
    t.add_argument("--n-angle", type=int, default=8)
    t.add_argument("--out", help="write the full JSON report here")
    t.set_defaults(func=cmd_tangent_ode)

    d = sub.add_parser("densities", help="scaled energy densities around a point")
    d.add_argument("checkpoint")
    d.add_argument("--center", help="north, south or RHO,Z (default: both poles)")
    d.add_argument("--radii", type=float, nargs="+")
    d.add_argument("--out")
    d.set_defaults(func=cmd_densities)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, CheckpointError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
