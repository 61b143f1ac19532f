"""CSV and JSON formats for lattice states, solutions and reports.

CSV files are UTF-8 with a header row and ``\\n`` line endings.  Floats are
written with 17 significant digits, rationals as ``num/den``.

==================  ==========================
result              CSV header
==================  ==========================
lattice field       ``s,u``
solution snapshots  ``t,x,u``
initial data        ``x,u``
convergence report  ``dx,dt,error,norm``
front tracking      ``t,front``
==================  ==========================
"""
from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .lattice import LatticeField, Line, Ring, Stencil
from .rational import format_fraction, is_exact, parse_fraction
from .solvers import ContinuumField

__all__ = [
    "format_number",
    "write_csv",
    "read_csv",
    "lattice_to_json",
    "lattice_from_json",
    "write_lattice_csv",
    "read_lattice_csv",
    "write_solution_csv",
    "read_solution_csv",
    "read_initial_csv",
    "snapshot_to_json",
    "write_report_csv",
    "write_speed_csv",
    "write_json",
]


def format_number(v):
    if is_exact(v):
        return format_fraction(v)
    return format(float(v), ".17g")


def _parse_number(text):
    return parse_fraction(text) if "/" in text else float(text)


def _cell(v):
    # integer indices stay plain; values go through format_number
    if isinstance(v, str) or (isinstance(v, (int, np.integer)) and not isinstance(v, bool)):
        return str(v)
    return format_number(v)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def read_csv(path, expected):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != list(expected):
            raise ValueError(f"{path}: expected header {','.join(expected)}, got {header}")
        return [[c.strip() for c in row] for row in reader if row]


def write_json(path, doc):
    text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def lattice_to_json(field: LatticeField, stencil: Stencil):
    doc = {"topology": "ring" if field.is_ring else "line"}
    if field.is_ring:
        doc["M"] = field.topology.M
    else:
        doc["origin"] = field.origin
    doc["p"] = format_fraction(stencil.p)
    doc["r"] = field.r
    doc["mode"] = field.mode
    doc["values"] = [format_fraction(v) if field.exact else float(v) for v in field.values]
    return doc


def lattice_from_json(doc):
    """Inverse of :func:`lattice_to_json`; returns ``(field, stencil)``."""
    exact = doc.get("mode", "rational") == "rational"
    vals = [parse_fraction(v) if exact else float(v) for v in doc["values"]]
    if doc["topology"] == "ring":
        field = LatticeField(vals, Ring(int(doc["M"])), r=int(doc["r"]), exact=exact)
    elif doc["topology"] == "line":
        field = LatticeField(vals, Line(), origin=int(doc["origin"]), r=int(doc["r"]), exact=exact)
    else:
        raise ValueError(f"unknown topology {doc['topology']!r}")
    return field, Stencil(parse_fraction(doc["p"]))


def write_lattice_csv(field: LatticeField, path):
    write_csv(path, ["s", "u"], zip(field.positions(), field.values))


def read_lattice_csv(path, topology="line"):
    rows = read_csv(path, ["s", "u"])
    s = [int(r[0]) for r in rows]
    vals = [_parse_number(r[1]) for r in rows]
    if s != list(range(s[0], s[0] + len(s))):
        raise ValueError(f"{path}: cell indices must be consecutive")
    if topology == "ring":
        return LatticeField(vals, Ring(len(vals)))
    return LatticeField(vals, Line(), origin=s[0])


def write_solution_csv(fields, path):
    rows = []
    for f in fields:
        for x, u in zip(f.x, f.values):
            rows.append((f.t, x, u))
    write_csv(path, ["t", "x", "u"], rows)


def read_solution_csv(path):
    """Rows of ``(t, x, u)`` grouped into arrays: ``{t: (x, u)}``."""
    rows = read_csv(path, ["t", "x", "u"])
    out = {}
    for t, x, u in rows:
        out.setdefault(float(t), ([], []))
        out[float(t)][0].append(float(x))
        out[float(t)][1].append(float(u))
    return {t: (np.array(x), np.array(u)) for t, (x, u) in out.items()}


def read_initial_csv(path, L=None):
    """Uniformly spaced periodic samples ``x,u``; ``L`` defaults to ``M * spacing``."""
    rows = read_csv(path, ["x", "u"])
    x = np.array([float(r[0]) for r in rows])
    u = np.array([float(r[1]) for r in rows])
    if len(x) < 2:
        raise ValueError(f"{path}: need at least two samples")
    h = np.diff(x)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ValueError(f"{path}: samples must be uniformly spaced")
    return ContinuumField(L if L is not None else h[0] * len(x), u, 0.0, x[0])


def snapshot_to_json(field: ContinuumField):
    return {"t": float(field.t), "L": float(field.L), "x0": float(field.x0), "M": field.M,
            "values": [float(v) for v in field.values]}


def write_report_csv(report, path):
    write_csv(path, ["dx", "dt", "error", "norm"],
              [(dx, dt, err, report.norm) for dx, dt, err in report.rows])


def write_speed_csv(estimate, path):
    write_csv(path, ["t", "front"], zip(estimate.times, estimate.fronts))
