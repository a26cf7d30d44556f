"""CSV/JSON serialisation of fields, reports and checkpoints.

Floats are written with ``repr`` (shortest round-tripping form), so a field
written and read back is bit-identical.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

FIELD_COLUMNS = ["index", "r", "theta_hat", "u1", "u2", "u3"]


class CheckpointError(ValueError):
    pass


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    atomic_write_text(path, dumps_json(obj))


def field_csv_text(u, grid) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FIELD_COLUMNS)
    nr, nt = grid.node_r, grid.node_t
    for k, (a, b, c) in enumerate(np.asarray(u, dtype=float)):
        writer.writerow([k, repr(float(nr[k])), repr(float(nt[k])), repr(float(a)), repr(float(b)), repr(float(c))])
    return buf.getvalue()


def write_field_csv(path, u, grid) -> None:
    atomic_write_text(path, field_csv_text(u, grid))


def _parse_field_rows(lines, source: str, first_lineno: int, n_expected: int | None):
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise CheckpointError(f"{source}: empty field table") from None
    if header != FIELD_COLUMNS:
        raise CheckpointError(f"{source}:{first_lineno}: expected header {FIELD_COLUMNS}, got {header}")
    values = []
    for offset, row in enumerate(reader, start=1):
        lineno = first_lineno + offset
        if len(row) != len(FIELD_COLUMNS):
            raise CheckpointError(f"{source}:{lineno}: expected {len(FIELD_COLUMNS)} columns, got {len(row)}")
        try:
            k = int(row[0])
            vals = [float(x) for x in row[3:]]
        except ValueError as exc:
            raise CheckpointError(f"{source}:{lineno}: {exc}") from None
        if k != len(values):
            raise CheckpointError(f"{source}:{lineno}: node index {k} out of sequence")
        values.append(vals)
    if n_expected is not None and len(values) != n_expected:
        raise CheckpointError(f"{source}: expected {n_expected} nodes, found {len(values)} (truncated?)")
    return np.array(values, dtype=float).reshape(-1, 3)


def read_field_csv(path, grid=None) -> np.ndarray:
    path = Path(path)
    lines = path.read_text().splitlines()
    return _parse_field_rows(lines, str(path), 1, None if grid is None else grid.size)


def write_checkpoint(path, u, grid, header: dict) -> None:
    """One file: a ``#``-prefixed JSON header line followed by the field CSV."""
    head = dict(header)
    head["grid_digest"] = grid.config.digest()
    head["n_nodes"] = grid.size
    text = "# " + json.dumps(_jsonable(head), sort_keys=True) + "\n" + field_csv_text(u, grid)
    atomic_write_text(path, text)


def read_checkpoint(path):
    """Return ``(header, field)``; raises :class:`CheckpointError` on malformed input."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CheckpointError(f"{path}: {exc.strerror or exc}") from None
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise CheckpointError(f"{path}:1: missing JSON header line")
    try:
        header = json.loads(lines[0][2:])
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}:1: bad JSON header ({exc.msg})") from None
    for key in ("grid", "grid_digest", "n_nodes"):
        if key not in header:
            raise CheckpointError(f"{path}:1: header lacks '{key}'")
    u = _parse_field_rows(lines[1:], str(path), 2, int(header["n_nodes"]))
    return header, u
