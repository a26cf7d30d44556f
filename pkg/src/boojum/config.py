"""Run configuration: flat ``key = value`` text with dotted section prefixes.

Example::

    # coarse run
    seed = 7
    grid.n_radial = 16
    grid.n_polar = 32
    grid.outer_radius = 8
    model.nu = 1.0
    model.mu = 1.0
    anchoring.amp_polar = 1.5707963267948966
    solver.grad_tol = 1e-6
    solver.continuation_nus = 1, 3, 10
    outputs.dir = out/coarse
    analyses.defects = true

Sections are ``grid``, ``model``, ``anchoring``, ``solver``, ``outputs`` and
``analyses``; the top-level keys are ``seed`` and ``threads``. Relative paths
are resolved against the directory of the config file.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .anchoring import AnchoringParams
from .energy import ModelParams
from .grid import GridConfig
from .minimizer import INIT_MODES, SolveConfig


class ConfigError(ValueError):
    pass


ANALYSES = ("defects", "densities", "tangent_ode", "far_field")


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    model: ModelParams = field(default_factory=ModelParams)
    anchoring: AnchoringParams = field(default_factory=AnchoringParams)
    anchoring_profile: Path | None = None
    solver: SolveConfig = field(default_factory=SolveConfig)
    init: str = "meridian_rotation"
    init_checkpoint: Path | None = None
    outputs: Path = Path("out")
    analyses: frozenset = frozenset({"defects", "far_field"})
    seed: int = 0
    # accepted for compatibility; the solver is single-threaded
    threads: int = 0


def _parse_bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _convert(text: str, kind):
    kind = str(kind)
    if "tuple" in kind:
        return tuple(float(x) for x in text.replace(",", " ").split())
    if kind.startswith("int"):
        return int(text)
    if kind.startswith("float"):
        return float(text)
    if kind.startswith("bool"):
        return _parse_bool(text)
    return text


def _field_types(cls):
    return {f.name: f.type for f in dataclasses.fields(cls)}


SECTIONS = {
    "grid": GridConfig,
    "model": ModelParams,
    "anchoring": AnchoringParams,
    "solver": SolveConfig,
}


def parse_config(text: str, source: str = "<config>", base_dir: Path | None = None) -> RunConfig:
    """Parse config text; every problem is reported as ``source:line: message``."""
    base_dir = Path(".") if base_dir is None else Path(base_dir)
    values: dict[str, dict[str, object]] = {k: {} for k in SECTIONS}
    extra: dict[str, object] = {}
    where: dict[str, int] = {}
    analyses: set[str] = set(RunConfig.analyses)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in where:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}' (first set on line {where[key]})")
        where[key] = lineno
        section, _, name = key.rpartition(".")
        try:
            if section in SECTIONS:
                types = _field_types(SECTIONS[section])
                if name == "profile" and section == "anchoring":
                    extra["anchoring_profile"] = base_dir / value
                elif name == "init" and section == "solver":
                    if value not in INIT_MODES:
                        raise ValueError(f"expected one of {INIT_MODES}, got {value!r}")
                    extra["init"] = value
                elif name == "init_checkpoint" and section == "solver":
                    extra["init_checkpoint"] = base_dir / value
                elif name in types:
                    if section == "solver" and name in ("seed", "checkpoint_path"):
                        raise ValueError(f"set '{'seed' if name == 'seed' else 'outputs.dir'}' instead")
                    values[section][name] = _convert(value, types[name])
                else:
                    raise KeyError(key)
            elif section == "outputs" and name == "dir":
                extra["outputs"] = base_dir / value
            elif section == "analyses":
                if name not in ANALYSES:
                    raise KeyError(key)
                (analyses.add if _parse_bool(value) else analyses.discard)(name)
            elif section == "" and name in ("seed", "threads"):
                extra[name] = int(value)
                if extra[name] < 0:
                    raise ValueError("must be >= 0")
            else:
                raise KeyError(key)
        except KeyError:
            raise ConfigError(f"{source}:{lineno}: unknown key '{key}'") from None
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: {key}: {exc}") from None

    seed = int(extra.get("seed", 0))
    values["solver"]["seed"] = seed
    built = {}
    for section, cls in SECTIONS.items():
        try:
            built[section] = cls(**values[section])
        except ValueError as exc:
            # point at the line of the offending key when it can be identified
            bad = [k for k in values[section] if k == str(exc).split()[0]]
            line = where.get(f"{section}.{bad[0]}") if bad else None
            loc = f"{source}:{line}" if line else source
            raise ConfigError(f"{loc}: {section}.{exc}") from None
    init = extra.get("init", "meridian_rotation")
    if init == "from_checkpoint" and "init_checkpoint" not in extra:
        raise ConfigError(f"{source}: solver.init = from_checkpoint needs solver.init_checkpoint")
    return RunConfig(
        grid=built["grid"],
        model=built["model"],
        anchoring=built["anchoring"],
        anchoring_profile=extra.get("anchoring_profile"),
        solver=built["solver"],
        init=init,
        init_checkpoint=extra.get("init_checkpoint"),
        outputs=extra.get("outputs", base_dir / "out"),
        analyses=frozenset(analyses),
        seed=seed,
        threads=int(extra.get("threads", 0)),
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None
    return parse_config(text, str(path), path.parent)
