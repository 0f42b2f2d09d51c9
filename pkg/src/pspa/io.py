"""Delimited-file input and structured report output.

File layout: a header row, then one row per observation. Column names are

    y            outcome
    x1 .. xd     covariates
    fhat         predicted outcome
    qhat1 .. qhatd  predicted covariates

The names (and the x / qhat prefixes) can be overridden with a column map.
"""
from __future__ import annotations

import csv
import json
import math
import re
import warnings

import numpy as np

from .data import Dataset
from .errors import DataError

__all__ = ["ColumnMap", "load_dataset", "read_table", "write_dataset", "result_record", "dumps_json"]

DELIMITERS = ",\t;|"


class ColumnMap:
    def __init__(self, y="y", fhat="fhat", x_prefix="x", qhat_prefix="qhat"):
        self.y = y
        self.fhat = fhat
        self.x_prefix = x_prefix
        self.qhat_prefix = qhat_prefix

    @classmethod
    def from_mapping(cls, mapping=None):
        mapping = dict(mapping or {})
        unknown = set(mapping) - {"y", "fhat", "x_prefix", "qhat_prefix"}
        if unknown:
            raise DataError(f"unknown column-map keys: {sorted(unknown)}")
        return cls(**mapping)

    def x(self, d):
        return [f"{self.x_prefix}{k}" for k in range(1, d + 1)]

    def qhat(self, d):
        return [f"{self.qhat_prefix}{k}" for k in range(1, d + 1)]


def read_table(path):
    """Header plus a float matrix; parse errors name the row and column."""
    with open(path, newline="", encoding="utf-8") as fh:
        text = fh.read()
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise DataError(f"{path}: empty file or missing header row")
    try:
        dialect = csv.Sniffer().sniff(lines[0], delimiters=DELIMITERS)
        delim = dialect.delimiter
    except csv.Error:
        delim = ","  # single-column file
    reader = csv.reader(lines, delimiter=delim)
    header = [h.strip() for h in next(reader)]
    dup = {h for h in header if header.count(h) > 1}
    if dup:
        raise DataError(f"{path}: duplicate column(s) {sorted(dup)}")
    rows = []
    for r, cells in enumerate(reader, start=1):
        line = r + 1
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) != len(header):
            raise DataError(f"{path}: row {r} (line {line}) has {len(cells)} fields, header has {len(header)}")
        vals = []
        for name, cell in zip(header, cells):
            try:
                v = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: row {r} (line {line}), column {name!r}: cannot parse {cell.strip()!r} as a number"
                ) from None
            if not math.isfinite(v):
                raise DataError(f"{path}: row {r} (line {line}), column {name!r}: non-finite value {cell.strip()!r}")
            vals.append(v)
        rows.append(vals)
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
    return header, data


def _infer_d(header, prefix):
    pat = re.compile(rf"^{re.escape(prefix)}(\d+)$")
    idx = sorted(int(m.group(1)) for h in header if (m := pat.match(h)))
    if idx != list(range(1, len(idx) + 1)):
        raise DataError(f"covariate columns must be {prefix}1..{prefix}d without gaps, found {idx}")
    return len(idx)


def _take(header, data, names, path):
    missing = [c for c in names if c not in header]
    if missing:
        raise DataError(f"{path}: missing required column(s) {missing}")
    cols = [header.index(c) for c in names]
    return data[:, cols]


_NEEDS = {
    # (labeled, unlabeled) groups per mode
    "labels": (("y", "x", "fhat"), ("x", "fhat")),
    "covariates": (("y", "x", "qhat"), ("y", "qhat")),
    "both": (("y", "x", "fhat", "qhat"), ("fhat", "qhat")),
}


def _columns(groups, cmap, d):
    out = {}
    for g in groups:
        if g == "y":
            out[g] = [cmap.y]
        elif g == "fhat":
            out[g] = [cmap.fhat]
        elif g == "x":
            out[g] = cmap.x(d)
        else:
            out[g] = cmap.qhat(d)
    return out


def load_dataset(labeled_path, unlabeled_path=None, mode="labels", column_map=None):
    """Read labeled (and optionally unlabeled) files into a :class:`Dataset`.

    ``d`` is the number of ``x<k>`` columns in the labeled header. Columns
    the mode does not use are ignored with a warning.
    """
    if mode not in _NEEDS:
        raise DataError(f"mode must be one of {tuple(_NEEDS)}, got {mode!r}")
    cmap = column_map if isinstance(column_map, ColumnMap) else ColumnMap.from_mapping(column_map)
    lab_groups, unl_groups = _NEEDS[mode]

    header, table = read_table(labeled_path)
    d = _infer_d(header, cmap.x_prefix)
    if table.shape[0] < 2:
        raise DataError(f"{labeled_path}: need at least 2 labeled rows, got {table.shape[0]}")
    cols = _columns(lab_groups, cmap, d)
    lab = {g: _take(header, table, names, labeled_path) for g, names in cols.items()}
    _warn_extra(labeled_path, header, cols)

    unl = {}
    if unlabeled_path is not None:
        uheader, utable = read_table(unlabeled_path)
        ucols = _columns(unl_groups, cmap, d)
        unl = {g: _take(uheader, utable, names, unlabeled_path) for g, names in ucols.items()}
        _warn_extra(unlabeled_path, uheader, ucols)

    def vec(block, g):
        return block[g][:, 0] if g in block else None

    return Dataset(
        mode=mode,
        y=vec(lab, "y"),
        X=lab["x"],
        fhat=vec(lab, "fhat"),
        qhat=lab.get("qhat"),
        y_unlabeled=vec(unl, "y"),
        X_unlabeled=unl.get("x"),
        fhat_unlabeled=vec(unl, "fhat"),
        qhat_unlabeled=unl.get("qhat"),
    )


def _warn_extra(path, header, cols):
    used = {c for names in cols.values() for c in names}
    extra = [h for h in header if h not in used]
    if extra:
        warnings.warn(f"{path}: ignoring column(s) {extra}", UserWarning, stacklevel=3)


def write_dataset(data, labeled_path, unlabeled_path=None, column_map=None):
    """Inverse of :func:`load_dataset`, writing floats with 17 significant digits."""
    cmap = column_map if isinstance(column_map, ColumnMap) else ColumnMap.from_mapping(column_map)
    lab_groups, unl_groups = _NEEDS[data.mode]
    d = data.d

    def block(groups, fields):
        names, arrays = [], []
        for g in groups:
            v = fields[g]
            if g in ("y", "fhat"):
                names.append(cmap.y if g == "y" else cmap.fhat)
                arrays.append(np.asarray(v)[:, None])
            else:
                names += cmap.x(d) if g == "x" else cmap.qhat(d)
                arrays.append(np.asarray(v).reshape(len(v), -1))
        return names, np.hstack(arrays)

    def dump(path, names, table):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names)
            for row in table:
                w.writerow(["%.17g" % v for v in row])

    dump(labeled_path, *block(lab_groups, {"y": data.y, "x": data.X, "fhat": data.fhat, "qhat": data.qhat}))
    if unlabeled_path is not None:
        fields = {"y": data.y_unlabeled, "x": data.X_unlabeled, "fhat": data.fhat_unlabeled,
                  "qhat": data.qhat_unlabeled}
        dump(unlabeled_path, *block(unl_groups, fields))


def result_record(result, mode, model_name):
    """Machine-readable summary of an :class:`InferenceResult`."""
    coords = []
    for j in range(result.theta.shape[0]):
        coords.append({
            "index": j + 1,
            "estimate": float(result.theta[j]),
            "se": float(result.se[j]),
            "ci_lower": float(result.ci_lower[j]),
            "ci_upper": float(result.ci_upper[j]),
            "pvalue": float(result.pvalue[j]),
            "omega": float(result.omega.omega[j]),
        })
    return {
        "method": result.method,
        "mode": mode,
        "model": model_name,
        "n": int(result.n),
        "N": int(result.N),
        "rho": float(result.rho),
        "alpha": float(result.alpha),
        "admissible": result.admissible,
        "events": list(result.events),
        "coefficients": coords,
    }


def _num(v):
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    return "%.17g" % v


def dumps_json(obj, indent=2, _level=0):
    """JSON text with every float written to 17 significant digits.

    Non-finite floats use the ``NaN`` / ``Infinity`` tokens that Python's
    ``json`` module reads back.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{dumps_json(str(k))}: {dumps_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")
