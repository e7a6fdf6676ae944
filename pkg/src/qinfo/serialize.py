"""Deterministic JSON/CSV rendering with 12 significant digits."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, is_dataclass
from fractions import Fraction

import numpy as np

SIG_DIGITS = 12


def _round(x: float) -> float | None:
    if not np.isfinite(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def to_plain(obj):
    """Convert dataclasses, arrays and numpy scalars to JSON-ready values."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            if np.allclose(obj.imag, 0):
                return to_plain(obj.real.tolist())
            return to_plain([[_round(z.real), _round(z.imag)] for z in obj.ravel()])
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return _round(float(obj))
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if isinstance(obj, complex):
        return [_round(obj.real), _round(obj.imag)]
    return obj


def dumps(obj) -> str:
    return json.dumps(to_plain(obj), sort_keys=False, separators=(",", ":"))


def csv_rows(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([to_plain(v) for v in row])
    return buf.getvalue()
