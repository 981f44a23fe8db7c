"""Command-line front end.

Exit codes: 0 when the check passes, 2 for a mathematical finding
(counterexample, non-real-rooted sample, rank deficiency), 1 for bad input.
The default tolerance can be overridden with the HYPERLAB_TOL environment
variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

import jsonschema
import numpy as np

from . import generators as gen
from . import io
from .errors import HyperlabError, NotRealRooted, RankDeficient
from .hyperpoly import COUNTEREXAMPLE, HomPoly, char_roots, check_hyperbolic
from .realroot import DEFAULT_TOL, MonicRealPoly, solve_batch, solve_real_rooted
from .spectral import eig_desc, singular_desc, sorted_eigs, sorted_singular
from .stability import DEFAULT_NDIRS, RealPoly, check_real_stable
from .tracking import PairOptions, SampledCurve, identity_system, pair_branches, regularity_report, sorted_branches, uniform_sweep

EXIT_OK, EXIT_INPUT, EXIT_FINDING = 0, 1, 2

HERM_CAVEAT = (
    "Uniform bounds are empirical: joint local DC regularity of the family in (t, r) cannot be verified from samples."
)


class UsageError(Exception):
    pass


def _tol() -> float:
    raw = os.environ.get("HYPERLAB_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError as exc:
        raise UsageError(f"HYPERLAB_TOL={raw!r} is not a number") from exc
    if not tol > 0:
        raise UsageError("HYPERLAB_TOL must be positive")
    return tol


def _vector(text: str, name: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"{name} must be a comma-separated list of numbers") from exc


def _refine(text: Optional[str]) -> List[int]:
    """``a..b`` means the grid sizes 2^a, 2^(a+1), ..., 2^b."""
    if not text:
        return []
    try:
        a, b = (int(x) for x in text.split(".."))
    except ValueError as exc:
        raise UsageError("--refine expects a..b with integer exponents") from exc
    if not 3 <= a <= b:
        raise UsageError("--refine a..b needs 3 <= a <= b")
    return [2**k for k in range(a, b + 1)]


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _poly(path: Optional[str]):
    if not path:
        raise UsageError("--poly is required")
    return io.load_poly(path)


def cmd_check_hyperbolic(args) -> int:
    f = _poly(args.poly)
    if not isinstance(f, HomPoly):
        raise UsageError("check-hyperbolic needs a homogeneous polynomial; use check-stable for RealPoly files")
    if not args.dir:
        raise UsageError("--dir is required")
    v = _vector(args.dir, "--dir")
    rep = check_hyperbolic(f, v, nsamples=args.samples, radius=args.radius, seed=args.seed, tol=_tol())
    doc = dict(rep.to_dict(), seed=args.seed, metadata=io.metadata())
    io.validate(doc, "hyperbolicity_report")
    _emit(io.dumps(doc), args.out)
    return EXIT_FINDING if rep.verdict == COUNTEREXAMPLE else EXIT_OK


def cmd_check_stable(args) -> int:
    f = _poly(args.poly)
    if isinstance(f, HomPoly):
        f = RealPoly(f.nvars, f.terms)
    rep = check_real_stable(f, ndirs=args.dirs, nsamples=args.samples, seed=args.seed, radius=args.radius, tol=_tol())
    doc = dict(rep.to_dict(), seed=args.seed, metadata=io.metadata())
    io.validate(doc, "hyperbolicity_report")
    _emit(io.dumps(doc), args.out)
    return EXIT_FINDING if rep.verdict == COUNTEREXAMPLE else EXIT_OK


def cmd_roots(args) -> int:
    tol = _tol()
    if args.coeffs:
        rt = solve_real_rooted(MonicRealPoly(_vector(args.coeffs, "--coeffs")), tol)
        doc = {"kind": "monic", "roots": rt.values.tolist(), "residual": rt.residual}
    elif args.matrix:
        A = io.load_matrix(args.matrix)
        if args.mode == "sv":
            doc = {"kind": "singular", "roots": singular_desc(A).sigma.tolist()}
        else:
            doc = {"kind": "eigen", "roots": eig_desc(A).values.tolist()}
    else:
        f = _poly(args.poly)
        if not (args.dir and args.point):
            raise UsageError("roots --poly needs --dir and --point")
        cr = char_roots(f, _vector(args.dir, "--dir"), _vector(args.point, "--point"), tol)
        doc = {"kind": "characteristic", "roots": cr.values.tolist(), "point": cr.point.tolist()}
    _emit(io.dumps(doc), args.out)
    return EXIT_OK


def _monic_sorted(curve: SampledCurve, tol: float) -> SampledCurve:
    b = solve_batch(curve.values, tol)
    bad = np.flatnonzero(b.defect > tol)
    if bad.size:
        i = int(bad[0])
        raise NotRealRooted(f"coefficient row {i} is not real-rooted (defect {b.defect[i]:.3g})", float(b.defect[i]), i)
    return SampledCurve(curve.t0, curve.t1, b.values)


def _sorted_for_mode(mode: str, kind: str, curve: SampledCurve, args, tol: float):
    """Sorted root data for a track input, plus report extras."""
    if mode == "poly":
        if kind != "points":
            raise UsageError("poly mode needs a point curve (t,c1,...,cn)")
        f = _poly(args.poly)
        if not args.dir:
            raise UsageError("--dir is required in poly mode")
        return sorted_branches(f, _vector(args.dir, "--dir"), curve, tol), {}
    if mode == "monic":
        if kind != "monic":
            raise UsageError("monic mode needs a coefficient curve (t,a1,...,ad)")
        return _monic_sorted(curve, tol), {}
    if kind != "matrix":
        raise UsageError(f"{mode} mode needs a matrix curve (t,re_1_1,im_1_1,...)")
    if mode == "herm":
        return sorted_eigs(curve), {}
    sig, thresh = sorted_singular(curve)
    return sig, {"rank_tol": thresh}


def cmd_track(args) -> int:
    if not args.curve:
        raise UsageError("--curve is required")
    tol = _tol()
    kind, curve = io.read_curve_csv(args.curve)
    srt, extra = _sorted_for_mode(args.mode, kind, curve, args, tol)
    bs = pair_branches(srt, PairOptions())
    rep = regularity_report(bs, _refine(args.refine))
    if args.out:
        io.write_branches_csv(args.out, bs)
    doc = io.track_report(args.mode, bs, rep, extra)
    _emit(io.dumps(doc), args.report)
    return EXIT_OK


def cmd_regularity_report(args) -> int:
    if not args.curve:
        raise UsageError("--curve is required")
    kind, curve = io.read_curve_csv(args.curve)
    if kind != "branches":
        raise UsageError("regularity-report reads branch CSV (t,lam1,...,lamd[,perm])")
    srt = SampledCurve(curve.t0, curve.t1, -np.sort(-curve.values, axis=1))
    bs = identity_system(srt) if args.no_pair else pair_branches(srt, PairOptions())
    rep = regularity_report(bs, _refine(args.refine))
    _emit(io.dumps(io.track_report("branches", bs, rep)), args.out)
    return EXIT_OK


_CONSTRUCTIONS = ("lorentzian", "gk", "herm-det", "lax", "determinantal")


def _generate(args):
    rng = np.random.default_rng(args.seed)
    name = args.construction
    if name == "lorentzian":
        return gen.lorentzian(args.n or 3), {"n": args.n or 3}
    if name == "gk":
        if not (args.d and args.k):
            raise UsageError("gk needs --d and --k")
        return gen.gk_compose(args.k, args.d), {"d": args.d, "k": args.k}
    if name == "herm-det":
        d = args.d or 2
        return gen.herm_det(d), {"d": d}
    if name == "lax":
        d = args.d or 3
        A, B = gen.random_symmetric(rng, d), gen.random_symmetric(rng, d)
        return gen.lax_pencil(A, B), {"d": d, "A": A.tolist(), "B": B.tolist()}
    m, n = args.m or 3, args.n or 2
    if m < 1 or n < 1:
        raise UsageError("determinantal needs --m >= 1 and --n >= 1")
    As = [gen.random_psd(rng, m) for _ in range(n)]
    B = gen.random_hermitian(rng, m)
    return gen.determinantal(As, B), {
        "m": m,
        "n": n,
        "A": [io.matrix_to_dict(A) for A in As],
        "B": io.matrix_to_dict(B),
    }


def cmd_generate(args) -> int:
    poly, params = _generate(args)
    doc = io.poly_to_dict(poly)
    io.validate(doc, "polynomial")
    _emit(io.dumps(doc), args.out)
    files = [str(args.out)] if args.out else ["<stdout>"]
    manifest = {
        "construction": args.construction,
        "parameters": params,
        "seed": args.seed,
        "files": files,
        "metadata": io.metadata(),
    }
    io.validate(manifest, "manifest")
    target = args.manifest or (str(Path(args.out).with_suffix("")) + ".manifest.json" if args.out else None)
    if target:
        Path(target).write_text(io.dumps(manifest))
    return EXIT_OK


def _monomials(terms, t, r):
    out = np.zeros_like(t)
    for term in terms or []:
        out = out + term["coef"] * t ** term.get("t_pow", 0) * r ** term.get("r_pow", 0)
    return out


def family_curve(spec: dict, r: float) -> SampledCurve:
    """The member ``r`` of a family spec as a point or matrix curve."""
    t = np.linspace(spec["t0"], spec["t1"], spec["nsteps"] + 1)
    if spec["mode"] == "poly":
        if "coords" not in spec:
            raise UsageError("poly family needs coords")
        X = np.stack([_monomials(c, t, r) for c in spec["coords"]], axis=1)
        return SampledCurve(spec["t0"], spec["t1"], X)
    if "entries" not in spec:
        raise UsageError(f"{spec['mode']} family needs entries")
    given = {(e["row"], e["col"]) for e in spec["entries"]}
    m = spec.get("m") or max(max(e["row"], e["col"]) for e in spec["entries"])
    n = spec.get("n") or (m if spec["mode"] == "herm" else max(e["col"] for e in spec["entries"]))
    M = np.zeros((t.size, m, n), dtype=complex)
    for e in spec["entries"]:
        i, j = e["row"] - 1, e["col"] - 1
        if i >= m or j >= n:
            raise UsageError(f"entry ({e['row']}, {e['col']}) outside {m} x {n}")
        val = _monomials(e.get("re"), t, r) + 1j * _monomials(e.get("im"), t, r)
        M[:, i, j] = val
        if spec["mode"] == "herm" and i != j and (e["col"], e["row"]) not in given:
            M[:, j, i] = np.conj(val)
    return SampledCurve(spec["t0"], spec["t1"], M)


def _r_grid(spec) -> np.ndarray:
    r = spec["r"]
    if isinstance(r, dict):
        return np.linspace(r["start"], r["stop"], r["num"])
    return np.array(r, dtype=float)


def run_sweep(spec: dict, tol: float, workers: Optional[int] = None):
    io.validate(spec, "family")
    mode = spec["mode"]
    if mode == "poly":
        if "poly" not in spec or "dir" not in spec:
            raise UsageError("poly family needs poly (file path) and dir")
        f = io.load_poly(spec["poly"])
        v = np.array(spec["dir"], dtype=float)
        sorted_for = lambda r: sorted_branches(f, v, family_curve(spec, r), tol)  # noqa: E731
    elif mode == "herm":
        sorted_for = lambda r: sorted_eigs(family_curve(spec, r))  # noqa: E731
    else:
        sorted_for = lambda r: sorted_singular(family_curve(spec, r))[0]  # noqa: E731
    return uniform_sweep(_r_grid(spec), sorted_for, PairOptions(), max_workers=workers or spec.get("workers"))


def cmd_sweep(args) -> int:
    if not args.family:
        raise UsageError("--family is required")
    spec = json.loads(Path(args.family).read_text())
    if spec.get("mode") == "poly" and "poly" in spec:
        spec["poly"] = str((Path(args.family).parent / spec["poly"]).resolve()) if not Path(spec["poly"]).is_absolute() else spec["poly"]
    table = run_sweep(spec, _tol(), args.workers)
    header = ["r", "ok", "c1_bound", "w21_norm", "tv_derivative", "nswaps", "error"]
    lines = [header]
    for row in table.rows:
        lines.append([repr(row.r), str(row.ok).lower(), repr(row.c1_bound), repr(row.w21_norm), repr(row.tv_derivative), str(row.nswaps), row.error])
    lines.append(["sup", "", repr(table.sup_c1), repr(table.sup_w21), "", "", HERM_CAVEAT if spec["mode"] != "poly" else ""])
    if args.out:
        with open(args.out, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(lines)
    else:
        csv.writer(sys.stdout, lineterminator="\n").writerows(lines)
    return EXIT_OK if any(r.ok for r in table.rows) else EXIT_FINDING


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hyperlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-hyperbolic", help="sampled hyperbolicity test of a HomPoly file")
    p.add_argument("--poly")
    p.add_argument("--dir", help="direction v, comma separated")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check_hyperbolic)

    p = sub.add_parser("check-stable", help="sampled real-stability test of a polynomial file")
    p.add_argument("--poly")
    p.add_argument("--dirs", type=int, default=DEFAULT_NDIRS, help="number of positive directions")
    p.add_argument("--samples", type=int, default=200, help="points per direction")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check_stable)

    p = sub.add_parser("roots", help="characteristic roots, eigenvalues, singular values or monic roots")
    p.add_argument("--poly")
    p.add_argument("--dir")
    p.add_argument("--point")
    p.add_argument("--matrix")
    p.add_argument("--coeffs", help="a1,...,ad of Z^d + a1 Z^(d-1) + ... + ad")
    p.add_argument("--mode", choices=["herm", "sv"], default="herm")
    p.add_argument("--out")
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("track", help="sorted roots along a curve, paired into branches, with a regularity report")
    p.add_argument("--mode", choices=["poly", "herm", "sv", "monic"], default="poly")
    p.add_argument("--curve")
    p.add_argument("--poly")
    p.add_argument("--dir")
    p.add_argument("--refine", help="a..b: grid sizes 2^a..2^b for the refinement trace")
    p.add_argument("--seed", type=int, default=0, help="accepted for a uniform interface; tracking draws no random numbers")
    p.add_argument("--out", help="branch CSV path")
    p.add_argument("--report", help="report JSON path (stdout if omitted)")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("regularity-report", help="regularity report of branch CSV data")
    p.add_argument("--curve")
    p.add_argument("--no-pair", action="store_true", help="keep the sorted labeling")
    p.add_argument("--refine")
    p.add_argument("--out")
    p.set_defaults(func=cmd_regularity_report)

    p = sub.add_parser("generate", help="write a polynomial from one of the constructions")
    p.add_argument("construction", choices=_CONSTRUCTIONS)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sweep", help="uniform-bound table over a curve family")
    p.add_argument("--family")
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int, default=0, help="accepted for a uniform interface; sweeps draw no random numbers")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (NotRealRooted, RankDeficient) as exc:
        print(f"hyperlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FINDING
    except (UsageError, HyperlabError, ValueError, OSError, KeyError, jsonschema.ValidationError) as exc:
        msg = exc.message if isinstance(exc, jsonschema.ValidationError) else str(exc)
        print(f"hyperlab: {type(exc).__name__}: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
