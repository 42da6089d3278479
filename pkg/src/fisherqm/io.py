"""CSV/JSON readers and writers.

Reals go out with 17 significant digits in JSON and 12 in CSV, so repeated
runs give byte-identical files. Files are written atomically.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import DataError
from .grid import AmplitudeOnGrid, DensityOnGrid, Grid

JSON_DIGITS = 17
CSV_DIGITS = 12


def _fmt_json(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return format(v, f".{JSON_DIGITS}g") if math.isfinite(v) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_fmt_json(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{_fmt_json(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every real printed to 17 significant digits."""
    return _fmt_json(obj, indent, 0) + "\n"


def atomic_write(path, text: str):
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


def write_json(path, obj):
    atomic_write(path, dumps(obj))


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None


def _fmt_csv(v) -> str:
    return format(float(v), f".{CSV_DIGITS}g")


def csv_text(header, columns) -> str:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_fmt_csv(v) for v in row))
    return "\n".join(lines) + "\n"


def write_density_csv(path, d: DensityOnGrid | AmplitudeOnGrid):
    atomic_write(path, csv_text(("x", "value"), (d.grid.nodes, d.values)))


def write_ground_state_csv(path, x, psi):
    psi = np.asarray(psi)
    atomic_write(path, csv_text(("x", "psi", "p"), (x, psi, psi**2)))


def _read_table(path) -> tuple[list, np.ndarray]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise DataError(f"{path}: expected a header and at least one data row")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric value ({exc})") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise DataError(f"{path}: ragged rows")
    return header, data


def read_density_csv(path) -> DensityOnGrid:
    """Read ``x,value`` (or the ``x,psi,p`` ground-state layout) as a density."""
    header, data = _read_table(path)
    if header[:2] == ["x", "value"]:
        col = 1
    elif header == ["x", "psi", "p"]:
        col = 2
    else:
        raise DataError(f"{path}: expected header 'x,value' or 'x,psi,p', got {','.join(header)}")
    grid = Grid.from_nodes(data[:, 0])
    return DensityOnGrid(grid, data[:, col])


def read_prices_csv(path, column: str | None = None) -> np.ndarray:
    """Price column from a CSV with a header row; rows are chronological."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file")
        names = {n.strip().lower(): n for n in reader.fieldnames}
        if column is None:
            if len(names) != 1:
                raise DataError(f"{path}: several columns, pick one with --column")
            key = reader.fieldnames[0]
        else:
            key = names.get(column.strip().lower())
            if key is None:
                raise DataError(f"{path}: no column {column!r} (have {', '.join(reader.fieldnames)})")
        values = []
        for i, row in enumerate(reader, start=2):
            cell = (row.get(key) or "").strip()
            try:
                values.append(float(cell))
            except ValueError:
                raise DataError(f"{path}:{i}: cannot parse price {cell!r}") from None
    return np.array(values, dtype=float)


def write_returns_csv(path, values):
    atomic_write(path, csv_text(("log_return",), (values,)))


def read_returns_csv(path) -> np.ndarray:
    header, data = _read_table(path)
    if header != ["log_return"]:
        raise DataError(f"{path}: expected header 'log_return', got {','.join(header)}")
    return data[:, 0]
