"""CSV and JSON writers.  Every number is written with 17 significant digits
so that a float survives a round trip exactly, and every CSV has a single
header row."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .regime import RegimeGrid
from .transient import ProfileSnapshot, TransientResult

__all__ = [
    "TIMESERIES_COLUMNS",
    "format_number",
    "regime_boundary_rows",
    "regime_rows",
    "result_to_document",
    "rows_to_csv",
    "timeseries_rows",
    "write_csv",
    "write_json",
]

TIMESERIES_COLUMNS = ("t", "V", "I", "P", "theta_min", "theta_max", "control_mode")


def format_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def rows_to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_number(v) for v in row])
    return buf.getvalue()


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rows_to_csv(header, rows))
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no infinities; strings keep the document valid
        return x if math.isfinite(x) else format_number(x)
    if hasattr(obj, "value"):  # enums
        return obj.value
    return obj


def dumps(doc) -> str:
    # repr of a Python float is the shortest round-tripping form
    return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"


def write_json(path: str | Path, doc) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(doc))
    return path


def timeseries_rows(result: TransientResult):
    for k in range(len(result.times)):
        yield (
            result.times[k], result.V[k], result.I[k], result.P[k],
            result.theta_min[k], result.theta_max[k], result.control_mode[k],
        )


def _snapshot_doc(s: ProfileSnapshot) -> dict:
    return {"t": s.t, "V": s.V, "I": s.I, "geometry": s.geometry, "coords": s.coords, "theta": s.theta}


def result_to_document(result: TransientResult, snapshots: bool = True) -> dict:
    doc = {
        "model": result.model,
        "switch_time": result.switch_time,
        "blowup": None,
        "timeseries": {c: [] for c in TIMESERIES_COLUMNS},
        "final": {"coords": result.coords, "theta": result.final_state},
    }
    for row in timeseries_rows(result):
        for c, v in zip(TIMESERIES_COLUMNS, row):
            doc["timeseries"][c].append(v)
    if result.blowup is not None:
        b = result.blowup
        doc["blowup"] = {
            "detected": b.detected,
            "t_estimate": b.t_estimate,
            "theta_max_at_stop": b.theta_max_at_stop,
            "reason": b.reason,
        }
    if snapshots:
        doc["snapshots"] = [_snapshot_doc(s) for s in result.profile_snapshots]
    return doc


def regime_rows(grid: RegimeGrid):
    for i, T in enumerate(grid.T_values):
        for j, E in enumerate(grid.E_values):
            yield (T, E, bool(grid.flash[i, j]))


def regime_boundary_rows(grid: RegimeGrid):
    return zip(grid.T_values, grid.boundary)
