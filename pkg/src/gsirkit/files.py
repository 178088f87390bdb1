"""CSV and JSON file handling with atomic writes."""
from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import InvalidInput
from .synth import Dataset


class CsvFormatError(InvalidInput):
    def __init__(self, path, row: int, col: int | None, msg: str):
        where = f"row {row}" + (f", column {col}" if col is not None else "")
        super().__init__(f"{path}: {where}: {msg}")
        self.row = row
        self.col = col


def atomic_write(path: str | Path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: str | Path, obj) -> None:
    atomic_write(path, dump_json(obj))


def read_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc


def read_csv_matrix(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Header and float matrix; rows and columns in errors are 1-based, header is row 1."""
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(path, 1, None, "missing header row") from None
        header = [h.strip() for h in header]
        if not header or any(not h for h in header):
            raise CsvFormatError(path, 1, None, "empty column name in header")
        rows = []
        for i, rec in enumerate(reader, start=2):
            if not rec:
                raise CsvFormatError(path, i, None, "empty row")
            if len(rec) != len(header):
                raise CsvFormatError(path, i, None, f"expected {len(header)} fields, found {len(rec)}")
            vals = []
            for j, cell in enumerate(rec, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise CsvFormatError(path, i, j, f"not a number: {cell!r}") from None
                if not np.isfinite(v):
                    raise CsvFormatError(path, i, j, f"non-finite value: {cell!r}")
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise CsvFormatError(path, 2, None, "no data rows")
    return header, np.asarray(rows, dtype=float)


def read_dataset(path: str | Path, x_columns=None, y_columns=None) -> Dataset:
    """Split a CSV into X and Y by explicit column names or by x*/y* prefixes."""
    header, M = read_csv_matrix(path)
    index = {h: j for j, h in enumerate(header)}
    xs = list(x_columns) if x_columns else [h for h in header if h.startswith("x")]
    ys = list(y_columns) if y_columns else [h for h in header if h.startswith("y")]
    missing = [c for c in xs + ys if c not in index]
    if missing:
        raise InvalidInput(f"{path}: missing columns {missing}")
    if not xs or not ys:
        raise InvalidInput(f"{path}: need at least one X column and one Y column")
    return Dataset(M[:, [index[c] for c in xs]], M[:, [index[c] for c in ys]])
