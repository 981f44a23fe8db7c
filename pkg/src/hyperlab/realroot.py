"""Univariate real-rooted polynomials.

A monic polynomial ``Z^d + a_1 Z^{d-1} + ... + a_d`` is stored by its
coefficient vector ``(a_1, ..., a_d)``.  Roots come from the eigenvalues of the
(balanced) companion matrix and are then polished by Newton's method on the
real line.

Numerically multiple real roots show up as small complex clusters around the
true root (radius ~ eps**(1/m) for an m-fold root).  Such a cluster is
recognised when its mean is real and its spread is compatible with an m-fold
root at backward error ``tol``; its members are then reported at the root of
``P^(m-1)`` near the cluster centre.  Anything else with an imaginary part
above ``tol * scale(p)`` counts against real-rootedness.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import NoConvergence, NotRealRooted

DEFAULT_TOL = 1e-9
_EPS = np.finfo(float).eps
_NEWTON_STEPS = 8


@dataclass(frozen=True, eq=False)
class MonicRealPoly:
    """Monic ``Z^d + sum_j a_j Z^(d-j)`` with real coefficients ``a_1..a_d``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.size == 0:
            raise ValueError("a monic polynomial needs degree >= 1")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return int(self.coeffs.size)

    def __call__(self, z):
        return _horner(self.coeffs, z)

    def __eq__(self, other):
        if not isinstance(other, MonicRealPoly):
            return NotImplemented
        return self.degree == other.degree and bool(np.array_equal(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __repr__(self):
        return f"MonicRealPoly({self.coeffs.tolist()})"

    def shift(self, c: float) -> "MonicRealPoly":
        """Return ``Z -> P(Z - c)``; its roots are those of ``P`` shifted by ``c``."""
        d = self.degree
        full = np.concatenate(([1.0], self.coeffs))
        out = np.zeros(d + 1)
        # (Z - c)^(d-j) expanded binomially
        for j, a in enumerate(full):
            e = d - j
            for i in range(e + 1):
                out[d - i] += a * comb(e, i) * (-c) ** (e - i)
        return MonicRealPoly(out[1:])


@dataclass(frozen=True, eq=False)
class RootTuple:
    values: np.ndarray
    residual: float

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=False)
class RootBatch:
    """Roots of many polynomials of the same degree.

    ``values`` is ``(M, d)`` sorted non-increasing per row, ``residual`` the
    scaled backward residual per row and ``defect`` the realness defect.
    """

    values: np.ndarray
    residual: np.ndarray
    defect: np.ndarray
    scale: np.ndarray


def _horner(coeffs, z):
    z = np.asarray(z)
    acc = np.ones_like(z, dtype=np.result_type(z, float))
    for a in coeffs:
        acc = acc * z + a
    return acc


def scale_of(coeffs) -> np.ndarray:
    """``max(1, max_j |a_j|^(1/j))`` for a coefficient vector or a stack of them."""
    a = np.atleast_2d(np.abs(np.asarray(coeffs, dtype=float)))
    j = np.arange(1, a.shape[1] + 1)
    s = np.max(a ** (1.0 / j), axis=1, initial=1.0)
    return s if np.ndim(coeffs) > 1 else s[0]


def scale(p: MonicRealPoly) -> float:
    return float(scale_of(p.coeffs))


def from_roots(roots) -> MonicRealPoly:
    """Monic polynomial with the given real roots (signed elementary symmetric sums)."""
    r = np.asarray(roots, dtype=float).reshape(-1)
    if r.size == 0:
        raise ValueError("need at least one root")
    if not np.all(np.isfinite(r)):
        raise ValueError("roots must be finite")
    c = np.zeros(r.size + 1)
    c[0] = 1.0
    for k, lam in enumerate(r, start=1):
        c[1 : k + 1] = c[1 : k + 1] - lam * c[0:k]
    return MonicRealPoly(c[1:])


def _companion_eigs(A: np.ndarray) -> np.ndarray:
    M, d = A.shape
    C = np.zeros((M, d, d))
    C[:, 0, :] = -A
    if d > 1:
        idx = np.arange(d - 1)
        C[:, idx + 1, idx] = 1.0
    # LAPACK geev balances the companion matrix before the QR iteration
    return np.linalg.eigvals(C)


def _backward_residual(full: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """|P(lam)| / sum_k |a_k| |lam|^(d-k), elementwise; full is (M, d+1) with a_0 = 1."""
    acc = np.ones_like(lam)
    den = np.ones_like(lam)
    alam = np.abs(lam)
    for k in range(1, full.shape[1]):
        acc = acc * lam + full[:, k : k + 1]
        den = den * alam + np.abs(full[:, k : k + 1])
    return np.abs(acc) / np.maximum(den, np.finfo(float).tiny)


def _deriv_coeffs(full: np.ndarray, order: int) -> np.ndarray:
    """Coefficients (highest first) of the order-th derivative of sum full[k] Z^(d-k)."""
    c = np.array(full, dtype=float)
    for _ in range(order):
        d = c.size - 1
        c = c[:-1] * np.arange(d, 0, -1)
    return c


def _polyval(c, x):
    acc = 0.0
    for a in c:
        acc = acc * x + a
    return acc


def _newton(c, x0, steps=_NEWTON_STEPS):
    """Newton on the polynomial with highest-first coefficients c; keeps the best iterate."""
    dc = _deriv_coeffs(c, 1)
    absc = np.abs(c)
    x = best = float(x0)
    best_res = abs(_polyval(c, x)) / max(_polyval(absc, abs(x)), 1e-300)
    for _ in range(steps):
        px, dpx = _polyval(c, x), _polyval(dc, x)
        if dpx == 0.0 or not np.isfinite(px / dpx):
            break
        x = x - px / dpx
        res = abs(_polyval(c, x)) / max(_polyval(absc, abs(x)), 1e-300)
        if res < best_res:
            best, best_res = x, res
        if res == 0.0:
            break
    return best


def _cluster_radius(m: int, sc: float, tol: float, d: int) -> float:
    return sc * max(tol, 64 * d * _EPS) ** (1.0 / m)


def _is_multiple_root(full: np.ndarray, c: float, m: int, tol: float) -> bool:
    """True when ``c`` is a root of ``P, P', ..., P^(m-1)`` to backward residual ``tol``."""
    for j in range(m):
        dc = _deriv_coeffs(full, j)
        if _backward_residual((dc / dc[0])[None, :], np.array([[c]]))[0, 0] > tol:
            return False
    return True


def _resolve_row(a: np.ndarray, z: np.ndarray, sc: float, tol: float):
    """Turn one row of complex eigenvalues into real roots.

    Returns (roots, defect) where defect is the largest imaginary part, over
    ``sc``, that could not be explained as a multiple real root.
    """
    d = z.size
    real_tol = tol * sc
    full = np.concatenate(([1.0], a))
    free = np.ones(d, dtype=bool)
    groups = []
    defect = 0.0
    for i in np.argsort(-np.abs(z.imag)):
        if not free[i] or abs(z[i].imag) <= real_tol:
            continue
        near = [j for j in np.argsort(np.abs(z - z[i])) if free[j]]
        found = None
        for m in range(2, len(near) + 1):
            grp = near[:m]
            mean = z[grp].mean()
            if abs(mean.imag) <= real_tol and np.max(np.abs(z[grp] - mean)) <= _cluster_radius(m, sc, tol, d):
                found = grp
                break
        if found is None:
            defect = max(defect, abs(z[i].imag) / sc)
            continue
        # absorb further eigenvalues of the same multiple root (a triple root
        # splits into a conjugate pair plus a real point)
        for j in near[len(found):]:
            grp = found + [j]
            m = len(grp)
            if np.max(np.abs(z[grp] - z[grp].mean())) > _cluster_radius(m, sc, tol, d):
                break
            if not _is_multiple_root(full, _newton(_deriv_coeffs(full, m - 1), z[grp].mean().real), m, tol):
                break
            found = grp
        free[found] = False
        groups.append(found)
        defect = max(defect, abs(z[found].mean().imag) / sc)

    roots = np.empty(d)
    for i in np.flatnonzero(free):
        defect = max(defect, abs(z[i].imag) / sc)
        roots[i] = _newton(full, z[i].real)
    for grp in groups:
        m = len(grp)
        centre = z[grp].mean().real
        roots[grp] = _newton(_deriv_coeffs(full, m - 1), centre)
    return roots, defect


def solve_batch(coeffs, tol: float = DEFAULT_TOL) -> RootBatch:
    """Roots of a stack of monic polynomials, no exceptions raised.

    ``coeffs`` is ``(M, d)``.  Rows whose eigenvalues are all numerically real
    take a vectorized polishing path; the rest go through cluster resolution.
    """
    A = np.atleast_2d(np.asarray(coeffs, dtype=float))
    M, d = A.shape
    sc = scale_of(A) if M else np.zeros(0)
    if M == 0:
        return RootBatch(np.zeros((0, d)), np.zeros(0), np.zeros(0), sc)
    z = _companion_eigs(A)
    full = np.concatenate([np.ones((M, 1)), A], axis=1)
    imag_ok = np.all(np.abs(z.imag) <= tol * sc[:, None], axis=1)

    roots = np.empty((M, d))
    defect = np.zeros(M)

    fast = np.flatnonzero(imag_ok)
    if fast.size:
        F = full[fast]
        lam = z[fast].real.copy()
        res = _backward_residual(F, lam)
        dF = F[:, :-1] * np.arange(d, 0, -1)
        for _ in range(3):
            acc = np.ones_like(lam)
            dacc = np.zeros_like(lam)
            for k in range(1, d + 1):
                dacc = dacc * lam + (dF[:, k - 1 : k] if k - 1 < dF.shape[1] else 0.0)
                acc = acc * lam + F[:, k : k + 1]
            with np.errstate(divide="ignore", invalid="ignore"):
                step = acc / dacc
            cand = lam - np.where(np.isfinite(step), step, 0.0)
            cres = _backward_residual(F, cand)
            better = cres < res
            lam = np.where(better, cand, lam)
            res = np.where(better, cres, res)
        roots[fast] = lam
        defect[fast] = np.max(np.abs(z[fast].imag), axis=1) / sc[fast]

    for i in np.flatnonzero(~imag_ok):
        roots[i], defect[i] = _resolve_row(A[i], z[i], sc[i], tol)

    roots = -np.sort(-roots, axis=1)
    residual = np.max(_backward_residual(full, roots), axis=1)
    return RootBatch(roots, residual, defect, sc)


def solve_real_rooted(p: MonicRealPoly, tol: float = DEFAULT_TOL) -> RootTuple:
    """All ``d`` roots of a real-rooted ``p``, with multiplicity, sorted non-increasing.

    Raises NotRealRooted when some root has an imaginary part above
    ``tol * scale(p)`` that is not a numerically multiple real root, and
    NoConvergence when polishing leaves a backward residual above ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    b = solve_batch(p.coeffs[None, :], tol)
    if b.defect[0] > tol:
        raise NotRealRooted(f"polynomial is not real-rooted (defect {b.defect[0]:.3g})", defect=float(b.defect[0]))
    if not np.isfinite(b.residual[0]) or b.residual[0] > tol:
        raise NoConvergence(f"root polishing failed (residual {b.residual[0]:.3g})")
    return RootTuple(b.values[0], float(b.residual[0]))


def realness_defect(p: MonicRealPoly, tol: float = DEFAULT_TOL) -> float:
    """Largest unexplained ``|Im root| / scale(p)``; 0 means real-rooted to working precision."""
    b = solve_batch(p.coeffs[None, :], tol)
    if not np.isfinite(b.defect[0]):
        raise NoConvergence("eigenvalue solve failed")
    return float(b.defect[0])
