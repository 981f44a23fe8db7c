"""Real stable polynomials through their homogenization.

``f`` of degree ``d`` in ``n`` variables is real stable iff its homogenization
``f_H(Z, W)`` is hyperbolic with respect to every ``(v', 0)`` with ``v' > 0``.
Stability is only ever tested through that reduction.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateDirection, DimensionMismatch, NotRealRooted, ZeroPolynomial
from .hyperpoly import COUNTEREXAMPLE, PASSED, HomPoly, HyperbolicityReport, check_hyperbolic
from .polynomial import SparsePoly
from .realroot import DEFAULT_TOL, MonicRealPoly, solve_batch

DEFAULT_NDIRS = 32


class RealPoly(SparsePoly):
    """Real polynomial, not necessarily homogeneous; ``degree`` is the total degree."""

    def __init__(self, nvars: int, terms=()):
        super().__init__(nvars, terms)
        for c in self._terms.values():
            if np.iscomplexobj(c) and np.imag(c) != 0:
                raise ValueError("RealPoly coefficients must be real")
        self._terms = {e: float(np.real(c)) for e, c in self._terms.items()}

    @property
    def degree(self) -> int:
        return self.total_degree

    def _like(self, terms):
        return RealPoly(self.nvars, terms)

    __hash__ = SparsePoly.__hash__


def homogenize(f: RealPoly) -> HomPoly:
    """``f_H`` in ``n+1`` variables (last one ``W``) with ``f_H(Z, 1) = f(Z)``."""
    if f.is_zero():
        raise ZeroPolynomial("cannot homogenize the zero polynomial")
    d = f.degree
    return HomPoly(f.nvars + 1, d, {e + (d - sum(e),): c for e, c in f.items()})


def dehomogenize(fh: HomPoly) -> RealPoly:
    return RealPoly(fh.nvars - 1, {e[:-1]: c for e, c in fh.items()})


def _positive_directions(rng, n, ndirs):
    return np.exp(rng.uniform(-1.0, 1.0, size=(ndirs, n)))


def check_real_stable(
    f: RealPoly,
    ndirs: int = DEFAULT_NDIRS,
    nsamples: int = 200,
    seed: int = 0,
    radius: float = 1.0,
    tol: float = DEFAULT_TOL,
) -> HyperbolicityReport:
    """Sampled stability test: hyperbolicity of ``f_H`` along random positive directions.

    On failure the report carries the counterexample point ``(x', w)`` and the
    direction ``(v', 0)`` of the offending ray.
    """
    if ndirs < 1 or nsamples < 1:
        raise ValueError("ndirs and nsamples must be >= 1")
    fh = homogenize(f)
    rng = np.random.default_rng(seed)
    dirs = _positive_directions(rng, f.nvars, ndirs)
    worst = 0.0
    total = 0
    for i, vp in enumerate(dirs):
        v = np.append(vp, 0.0)
        rep = check_hyperbolic(fh, v, nsamples=nsamples, radius=radius, seed=int(rng.integers(2**31)), tol=tol)
        total += rep.samples_tested
        worst = max(worst, rep.worst_defect)
        if rep.verdict == COUNTEREXAMPLE:
            return HyperbolicityReport(COUNTEREXAMPLE, total, rep.worst_defect, rep.counterexample, v, tol)
    return HyperbolicityReport(PASSED, total, worst, None, None, tol)


def restrict_ray_coefficients(f: RealPoly, x, v) -> np.ndarray:
    """Ascending coefficients of ``T -> f(x + T v)`` by exact term expansion."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape != (f.nvars,) or v.shape != (f.nvars,):
        raise DimensionMismatch("x and v must have length nvars")
    out = np.zeros(f.degree + 1)
    for e, c in f.items():
        # prod_i (x_i + T v_i)^(e_i) as an ascending coefficient vector
        acc = np.array([c])
        for i, ei in enumerate(e):
            for _ in range(ei):
                acc = np.convolve(acc, [x[i], v[i]])
        out[: acc.size] += acc
    return out


def restrict_ray(f: RealPoly, x, v, tol: float = DEFAULT_TOL) -> MonicRealPoly:
    """``f(x + T v)`` divided by its leading coefficient ``f_d(v)``."""
    c = restrict_ray_coefficients(f, x, v)
    top = f.homogeneous_part(f.degree)
    absbound = sum(abs(a) * np.prod(np.abs(v) ** np.array(e)) for e, a in top.items())
    if f.degree == 0 or abs(c[-1]) <= tol * max(absbound, 1e-300):
        raise DegenerateDirection("T-degree of f(x + T v) drops below deg f")
    return MonicRealPoly((c[:-1] / c[-1])[::-1])


def stable_roots(f: RealPoly, x, v, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Non-increasing roots of ``f(x - T v)``, obtained from the ray restriction.

    The roots of ``f(x - T v)`` are the negatives of those of ``f(x + T v)``.
    """
    p = restrict_ray(f, x, v, tol)
    b = solve_batch(p.coeffs[None, :], tol)
    if b.defect[0] > tol:
        raise NotRealRooted(f"f(x + T v) is not real-rooted (defect {b.defect[0]:.3g})", defect=float(b.defect[0]))
    return np.sort(-b.values[0])[::-1]
