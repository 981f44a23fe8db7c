"""File formats: polynomial and matrix JSON, curve and branch CSV, reports.

Every JSON document written here validates against a schema shipped in
``hyperlab/schemas``.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import re
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

import jsonschema
import numpy as np

from . import __version__
from .hyperpoly import HomPoly
from .polynomial import SparsePoly
from .stability import RealPoly
from .tracking import BranchSystem, RegularityReport, SampledCurve

GRID_RTOL = 1e-6


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("hyperlab.schemas").joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(obj, name: str) -> None:
    """Raise ``jsonschema.ValidationError`` unless ``obj`` matches schema ``name``."""
    jsonschema.validate(obj, load_schema(name), cls=jsonschema.Draft202012Validator)


def metadata() -> dict:
    return {
        "tool": "hyperlab",
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, fixed indentation)."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def without_metadata(obj: dict) -> dict:
    return {k: v for k, v in obj.items() if k != "metadata"}


# polynomials


def poly_to_dict(p: SparsePoly) -> dict:
    E, c = p.arrays()
    d = {
        "nvars": p.nvars,
        "degree": int(p.degree if hasattr(p, "degree") else p.total_degree),
        "terms": [{"exp": [int(x) for x in e], "coeff": float(np.real(a))} for e, a in zip(E, c)],
    }
    if not isinstance(p, HomPoly):
        d["homogeneous"] = False
    return d


def poly_from_dict(d: dict):
    """HomPoly, or RealPoly when ``"homogeneous": false``."""
    validate(d, "polynomial")
    terms = {tuple(t["exp"]): float(t["coeff"]) for t in d["terms"]}
    if d.get("homogeneous", True):
        return HomPoly(d["nvars"], d["degree"], terms)
    p = RealPoly(d["nvars"], terms)
    if not p.is_zero() and p.degree != d["degree"]:
        raise ValueError(f"declared degree {d['degree']} but terms have degree {p.degree}")
    return p


def load_poly(path) -> SparsePoly:
    return poly_from_dict(json.loads(Path(path).read_text()))


def save_poly(p: SparsePoly, path) -> None:
    d = poly_to_dict(p)
    validate(d, "polynomial")
    Path(path).write_text(dumps(d))


# matrices


def matrix_to_dict(A) -> dict:
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    return {"m": A.shape[0], "n": A.shape[1], "re": A.real.tolist(), "im": A.imag.tolist()}


def matrix_from_dict(d: dict) -> np.ndarray:
    validate(d, "matrix")
    re_ = np.array(d["re"], dtype=float)
    im_ = np.array(d["im"], dtype=float) if "im" in d else np.zeros_like(re_)
    if re_.shape != (d["m"], d["n"]) or im_.shape != re_.shape:
        raise ValueError(f"matrix parts must have shape ({d['m']}, {d['n']})")
    return re_ + 1j * im_


def load_matrix(path) -> np.ndarray:
    return matrix_from_dict(json.loads(Path(path).read_text()))


# CSV curves

_MATRIX_COL = re.compile(r"^(re|im)_(\d+)_(\d+)$")


def _grid(t: np.ndarray) -> Tuple[float, float]:
    if t.size < 2:
        raise ValueError("a curve needs at least two rows")
    h = np.diff(t)
    span = t[-1] - t[0]
    if span <= 0 or np.max(np.abs(h - span / (t.size - 1))) > GRID_RTOL * span:
        raise ValueError("t column must be an increasing uniform grid")
    return float(t[0]), float(t[-1])


def _check_header(header: List[str]) -> str:
    validate(header, "curve_csv")
    if header[0] != "t":
        raise ValueError("first CSV column must be t")
    kinds = {re.sub(r"[0-9_]+$", "", h) for h in header[1:]}
    if kinds <= {"c"}:
        return "points"
    if kinds <= {"a"}:
        return "monic"
    if kinds <= {"re", "im"}:
        return "matrix"
    if kinds <= {"lam", "perm"}:
        return "branches"
    raise ValueError(f"unrecognised CSV header {header}")


def read_curve_csv(path) -> Tuple[str, SampledCurve]:
    """Read any curve CSV; returns ``(kind, curve)``.

    ``kind`` is ``points``, ``monic``, ``matrix`` or ``branches``.  Matrix
    curves come back with complex ``(N+1, m, n)`` samples; branch files with
    their ``lam`` columns only.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    header = [h.strip() for h in rows[0]]
    kind = _check_header(header)
    cols = [i for i, h in enumerate(header) if h != "perm"]
    try:
        data = np.array([[float(r[i]) for i in cols] for r in rows[1:]], dtype=float)
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: malformed numeric row ({exc})") from exc
    t0, t1 = _grid(data[:, 0])
    names = [header[i] for i in cols[1:]]
    vals = data[:, 1:]
    if kind == "matrix":
        idx = [_MATRIX_COL.match(h).groups() for h in names]
        m = max(int(i) for _, i, _ in idx)
        n = max(int(j) for _, _, j in idx)
        M = np.zeros((vals.shape[0], m, n), dtype=complex)
        for col, (part, i, j) in enumerate(idx):
            if part == "re":
                M[:, int(i) - 1, int(j) - 1] += vals[:, col]
            else:
                M[:, int(i) - 1, int(j) - 1] += 1j * vals[:, col]
        return kind, SampledCurve(t0, t1, M)
    return kind, SampledCurve(t0, t1, vals)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_curve_csv(path, curve: SampledCurve, kind: str = "points") -> None:
    t = curve.t
    V = np.asarray(curve.values)
    if kind == "matrix":
        _, m, n = V.shape
        header = ["t"] + [f"{p}_{i + 1}_{j + 1}" for i in range(m) for j in range(n) for p in ("re", "im")]
        rows = []
        for k in range(len(t)):
            row = [_fmt(t[k])]
            for i in range(m):
                for j in range(n):
                    row += [_fmt(V[k, i, j].real), _fmt(V[k, i, j].imag)]
            rows.append(row)
    else:
        prefix = {"points": "c", "monic": "a"}[kind]
        header = ["t"] + [f"{prefix}{j + 1}" for j in range(V.shape[1])]
        rows = [[_fmt(t[k])] + [_fmt(x) for x in V[k]] for k in range(len(t))]
    _write_rows(path, header, rows)


def _write_rows(path, header, rows: Iterable) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_branches_csv(path, bs: BranchSystem) -> None:
    t = bs.t
    d = bs.labels.shape[1]
    header = ["t"] + [f"lam{j + 1}" for j in range(d)] + ["perm"]
    rows = (
        [_fmt(t[i])] + [_fmt(x) for x in bs.labels[i]] + [" ".join(str(int(p)) for p in bs.perms[i])]
        for i in range(len(t))
    )
    _write_rows(path, header, rows)


def track_report(mode: str, bs: BranchSystem, rep: RegularityReport, extra: Optional[dict] = None) -> dict:
    out = {
        "mode": mode,
        "nsteps": int(bs.sorted.nsteps),
        "t0": bs.sorted.t0,
        "t1": bs.sorted.t1,
        "nswaps": int(bs.nswaps),
        "report": rep.to_dict(),
        "crossing_log": [e.to_dict() for e in bs.crossing_log],
        "metadata": metadata(),
    }
    if "rank_tol" in bs.meta:
        out["rank_tol"] = float(bs.meta["rank_tol"])
    if extra:
        out.update(extra)
    validate(out, "regularity_report")
    return out
