"""JSON and CSV formats for tensors, amalgams, squares, partitions and reports.

Exact rationals are written as ``"p/q"`` strings so nothing is lost, and
JSON is always dumped with sorted keys so equal objects give equal bytes.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from .latin import EMPTY, GroupedPartition, IntegerAmalgam, LatinSquare, PartialLatinSquare
from .partitioning import Partition
from .tensor import WTensor


def num_out(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


def num_in(x):
    if isinstance(x, str):
        return Fraction(x)
    return x


def element_out(g):
    return [num_out(c) for c in g]


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path):
    return json.loads(Path(path).read_text())


# ---- tensors -------------------------------------------------------------------

def tensor_to_dict(w: WTensor) -> dict:
    """Entries flattened with ``i`` varying fastest, then ``j``, then ``k``."""
    flat = w.entries.flatten(order="F")
    d = {
        "n": w.n,
        "mode": w.mode,
        "window_measure": num_out(w.window_measure),
        "entries": [num_out(x) if w.mode == "exact" else float(x) for x in flat],
    }
    if w.mode != "exact":
        d["mc_stddev"] = [float(x) for x in w.mc_stddev.flatten(order="F")]
        d["samples"] = int(w.samples)
        d["seed"] = w.seed
    return d


def tensor_from_dict(d: dict) -> WTensor:
    n = int(d["n"])
    if d["mode"] == "exact":
        vals = np.empty(n ** 3, dtype=object)
        vals[:] = [Fraction(x) for x in d["entries"]]
        entries = vals.reshape((n, n, n), order="F")
        return WTensor(n, entries, "exact", Fraction(d["window_measure"]))
    entries = np.array(d["entries"], dtype=float).reshape((n, n, n), order="F")
    sd = np.array(d["mc_stddev"], dtype=float).reshape((n, n, n), order="F")
    return WTensor(n, entries, d["mode"], num_in(d["window_measure"]), mc_stddev=sd,
                   samples=d.get("samples", 0), seed=d.get("seed"))


# ---- amalgams --------------------------------------------------------------------

def amalgam_to_dict(m: IntegerAmalgam) -> dict:
    d = {"n": m.n, "t": m.t, "mode": m.mode, "entries": m.entries.tolist()}
    if m.mode == "partial":
        d["support_mask"] = m.support_mask.astype(int).tolist()
        d["required_S"] = sorted(list(p) for p in m.required_S)
        d["required_S1"] = sorted(list(p) for p in m.required_S1)
        d["required_S2"] = sorted(list(p) for p in m.required_S2)
    return d


def amalgam_from_dict(d: dict) -> IntegerAmalgam:
    e = np.array(d["entries"], dtype=np.int64)
    if e.ndim != 3 or len(set(e.shape)) != 1:
        raise ValueError("amalgam entries must be an n x n x n nested list")
    n = e.shape[0]
    if "n" in d and int(d["n"]) != n:
        raise ValueError(f"amalgam 'n' is {d['n']} but entries are {n} x {n} x {n}")
    mode = d.get("mode", "compact")
    t = int(d["t"]) if "t" in d else None
    if mode == "compact":
        return IntegerAmalgam.from_entries(e, t)
    mask = np.array(d["support_mask"], dtype=bool) if "support_mask" in d else None
    return IntegerAmalgam(n, e, t, mask,
                          {tuple(p) for p in d.get("required_S", [])},
                          {tuple(p) for p in d.get("required_S1", [])},
                          {tuple(p) for p in d.get("required_S2", [])}, mode)


# ---- squares ---------------------------------------------------------------------

def square_to_csv(sq) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(sq.table if hasattr(sq, "table") else sq):
        writer.writerow(int(x) for x in row)
    return buf.getvalue()


def square_from_csv(text: str):
    """Latin square if every cell is filled, partial square otherwise."""
    rows = [[int(x) for x in r] for r in csv.reader(io.StringIO(text)) if r]
    table = np.array(rows, dtype=np.int64).reshape(len(rows), -1)
    if (table == EMPTY).any():
        return PartialLatinSquare(table)
    return LatinSquare(table)


def write_square_csv(sq, path) -> None:
    Path(path).write_text(square_to_csv(sq))


def read_square_csv(path):
    return square_from_csv(Path(path).read_text())


def square_to_dict(sq, groups: GroupedPartition | None = None) -> dict:
    return {
        "order": int(sq.order),
        "groups": groups.groups if groups is not None else None,
        "table": np.asarray(sq.table).tolist(),
    }


def square_from_dict(d: dict):
    table = np.array(d["table"], dtype=np.int64)
    if table.shape != (d["order"], d["order"]):
        raise ValueError("table shape does not match 'order'")
    sq = PartialLatinSquare(table) if (table == EMPTY).any() else LatinSquare(table)
    groups = GroupedPartition([list(g) for g in d["groups"]]) if d.get("groups") else None
    return sq, groups


# ---- partitions and reports ---------------------------------------------------------

def partition_to_dict(p: Partition) -> dict:
    cells = []
    for c in p.cells:
        entry = {"id": c.id, "representative": element_out(c.representative),
                 "measure": num_out(c.measure)}
        if c.bounds is not None:
            entry["bounds"] = [[num_out(lo), num_out(hi)] for lo, hi in c.bounds]
        if c.atom_ids is not None:
            entry["atom_ids"] = list(c.atom_ids)
        if c.elements is not None:
            entry["elements"] = list(c.elements)
        cells.append(entry)
    return {"cells": cells}


def report_to_dict(report) -> dict:
    """Plain fields of an approximation or probe report (line-law details summarized)."""
    out = {}
    for f in fields(report):
        v = getattr(report, f.name)
        if f.name == "line_laws":
            if v is not None:
                out["line_laws"] = {"passed": v.passed, "line_value": num_out(v.line_value),
                                    "lines_checked": v.lines_checked}
            continue
        if isinstance(v, tuple):
            v = json.loads(json.dumps(v))
        out[f.name] = num_out(v)
    if hasattr(report, "obstruction"):
        out["obstruction"] = report.obstruction
    if hasattr(report, "within_bound"):
        out["within_bound"] = report.within_bound
    return out


def amap_to_dict(amap) -> dict:
    return {
        "square": square_to_dict(amap.square, amap.groups),
        "alpha": [element_out(g) for g in amap.alpha],
        "in_window": list(amap.in_window),
    }


__all__ = [
    "amalgam_from_dict", "amalgam_to_dict", "amap_to_dict", "dumps", "partition_to_dict",
    "read_json", "read_square_csv", "report_to_dict", "square_from_csv", "square_from_dict",
    "square_to_csv", "square_to_dict", "tensor_from_dict", "tensor_to_dict", "write_json",
    "write_square_csv",
]
