"""Serialization: signals as JSON ``[re, im]`` pairs or CSV, report tables as CSV.

Report floats are written with 12 significant digits so repeated runs are
byte-identical; signal files keep full precision.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

SIG_DIGITS = 12


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.{SIG_DIGITS}g}"
    return str(x)


def _round(obj):
    """Recursively round floats for JSON output."""
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return fmt(x)
        return float(fmt(x))
    return obj


def signal_to_pairs(f) -> list:
    f = np.asarray(f, dtype=complex)
    return [[float(v.real), float(v.imag)] for v in f]


def pairs_to_signal(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim == 1:
        return arr.astype(complex)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def read_signal(path) -> np.ndarray:
    """JSON (list of numbers or ``[re, im]`` pairs, optionally under "values")
    or CSV with columns ``index, re, im``."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        rows = list(csv.DictReader(text.splitlines()))
        if not rows or not {"index", "re", "im"} <= set(rows[0]):
            raise ValueError(f"{path}: need CSV columns index, re, im")
        out = np.zeros(len(rows), dtype=complex)
        for r in rows:
            out[int(r["index"])] = complex(float(r["re"]), float(r["im"]))
        return out
    data = json.loads(text)
    if isinstance(data, dict):
        data = data["values"]
    return pairs_to_signal(data)


def write_signal(path, f) -> None:
    """Signals keep full float precision (``repr``) so files round-trip exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix.lower() == ".csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "re", "im"])
            for i, v in enumerate(np.asarray(f, dtype=complex)):
                w.writerow([i, repr(float(v.real)), repr(float(v.imag))])
    else:
        path.write_text(json.dumps(signal_to_pairs(f)) + "\n")


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_round(obj), indent=2, sort_keys=True) + "\n")


MAXIMAL_COLUMNS = ["family", "p", "N", "seed", "value"]
STRONG_COLUMNS = ["family", "p", "n_end", "partial_sum", "hardy_norm", "ratio"]
LEMMA_COLUMNS = ["lemma_id", "k", "l", "n", "lhs", "bound_shape", "ratio"]
KERNEL_COLUMNS = ["n", "l1_norm", "max_abs"]
