"""CSV and JSONL writers. Floats are written with 17 significant digits."""

from __future__ import annotations

import csv
import json

import numpy as np

REPORT_COLUMNS = ("i", "j", "k", "t1_value", "t2_value", "i_value", "subject", "bound", "margin")
SOLUTION_COLUMNS = ("i", "j", "k", "t1_value", "t2_value", "i_value")
FUZZ_COLUMNS = ("index", "seed", "n1", "n2", "n3", "nodes", "verdict",
                "max_violation", "min_relative_margin")
LIMIT_COLUMNS = ("level", "factor", "n1", "n2", "n3", "x", "y", "z",
                 "subject", "bound", "margin", "verdict")


def fmt_num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _json(value) -> str:
    """JSON text with floats at 17 significant digits (json.dumps would use repr)."""
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        return f"{x:.17g}" if np.isfinite(x) else "null"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(v)}" for k, v in value.items()) + "}"
    return "[" + ", ".join(_json(v) for v in value) + "]"


def _rows_out(stream, fmt, columns, rows, trailer=None):
    if fmt == "csv":
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt_num(v) if not isinstance(v, str) else v for v in row])
    elif fmt == "jsonl":
        for row in rows:
            stream.write(_json(dict(zip(columns, row))) + "\n")
        if trailer is not None:
            stream.write(_json(trailer) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def _node_cells(index, coords):
    """``(i, j, k, t1, t2, i_value)``; plane grids get ``k = 0`` and a blank third coordinate."""
    if len(index) == 3:
        return tuple(index) + tuple(coords)
    return (index[0], index[1], 0, coords[0], coords[1], None)


def write_report(report, stream, fmt="csv", meta=None):
    rows = (_node_cells(r.index, r.coords) + (r.subject, r.bound, r.margin)
            for r in report.records)
    trailer = {"summary": dict(report.summary(), **(meta or {}))}
    _rows_out(stream, fmt, REPORT_COLUMNS, rows, trailer)


def write_solution(solutions: dict, stream, fmt="csv"):
    names = list(solutions)
    first = solutions[names[0]]
    d = first.domain
    scales = (d.t1, d.t2) + ((d.i,) if first.values.ndim == 3 else ())
    rows = []
    for idx in np.ndindex(first.values.shape):
        coords = tuple(float(s.points[k]) for s, k in zip(scales, idx))
        rows.append(_node_cells(idx, coords) + tuple(float(solutions[n].values[idx]) for n in names))
    _rows_out(stream, fmt, SOLUTION_COLUMNS + tuple(names), rows)


def write_fuzz(results, stream, fmt="csv", meta=None):
    rows = [(r.index, r.seed) + tuple(r.shape) + (r.nodes, r.verdict, r.max_violation,
                                                  r.min_relative_margin)
            for r in results]
    _rows_out(stream, fmt, FUZZ_COLUMNS, rows, {"summary": meta or {}})


def write_limit(rows, stream, fmt="csv", meta=None):
    _rows_out(stream, fmt, LIMIT_COLUMNS, rows, {"summary": meta or {}})
