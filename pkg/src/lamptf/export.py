"""Deterministic CSV/JSON serialization shared by the CLI and the reproduction suite."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .phase import FixedPoint, PhasePortrait

__all__ = [
    "fmt",
    "to_jsonable",
    "csv_text",
    "json_text",
    "write_text",
    "FIXED_POINT_HEADER",
    "fixed_point_rows",
    "trajectory_rows",
]

FIXED_POINT_HEADER = ("X", "Y", "trace", "det", "discriminant", "kind", "eig1", "eig2")


def fmt(v) -> str:
    """17 significant digits, enough to round-trip any double."""
    if isinstance(v, str):
        return v
    if isinstance(v, enum.Enum):
        return str(v.value)
    if isinstance(v, complex):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    return format(float(v), ".17g")


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (float, Fraction, np.floating)):
        v = float(obj)
        # JSON has no inf/nan; emit them as strings
        return v if math.isfinite(v) else str(v)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def fixed_point_rows(fps: Sequence[FixedPoint]) -> list:
    return [
        (fp.coords[0], fp.coords[1], fp.trace, fp.det, fp.discriminant, fp.kind, *fp.eigenvalues)
        for fp in fps
    ]


def trajectory_rows(pp: PhasePortrait) -> list:
    """(index, seed_index, direction, t, X, Y) for every stored sample."""
    rows = []
    for i, curve in enumerate(pp.trajectories):
        seed, direction = divmod(i, 2)
        sign = 1 if direction == 0 else -1
        for t, (X, Y) in zip(curve.t, curve.y):
            rows.append((i, seed, sign, t, X, Y))
    return rows
