"""Flat-file formats: CSV tables, signal CSVs and JSON coefficient records.

Numbers are written with 17 significant digits and a '.' decimal point
regardless of locale, so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .banach import GridFunction
from .spectral import CoefficientVector

__all__ = [
    "format_value",
    "write_csv",
    "read_csv",
    "write_signal",
    "read_signal",
    "write_coefficients",
    "read_coefficients",
    "write_json",
    "read_input",
]

PathLike = Union[str, Path]


def format_value(v) -> str:
    """Render one cell: 17 significant digits for floats, plain text otherwise."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def write_csv(path: PathLike, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def read_csv(path: PathLike) -> tuple:
    """``(header, rows)`` with every cell left as text."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [r for r in reader if r]


def write_signal(path: PathLike, g: GridFunction) -> Path:
    return write_csv(path, ["x", "value"], zip(g.x, g.samples))


def read_signal(path: PathLike) -> GridFunction:
    """Read an ``(x, value)`` CSV on a uniform grid of ``[0, 2π)``."""
    header, rows = read_csv(path)
    if [h.strip() for h in header] != ["x", "value"]:
        raise ValueError(f"{path}: expected header 'x,value', got {header}")
    data = np.array(rows, dtype=float)
    return GridFunction.from_xy(data[:, 0], data[:, 1])


def write_json(path: PathLike, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_coefficients(path: PathLike, c: CoefficientVector) -> Path:
    return write_json(path, c.to_record())


def read_coefficients(path: PathLike) -> CoefficientVector:
    with open(path, encoding="utf-8") as fh:
        rec = json.load(fh)
    if not isinstance(rec, dict) or set(rec) - {"index", "value", "delta"}:
        raise ValueError(f"{path}: expected an object with 'index' and 'value' lists")
    return CoefficientVector.from_record(rec)


def read_input(path: PathLike) -> Union[GridFunction, CoefficientVector]:
    """A signal CSV (``.csv``) or a coefficient record (anything else, JSON)."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_signal(path)
    return read_coefficients(path)
