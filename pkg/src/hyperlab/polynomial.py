"""Sparse multivariate polynomials over the reals.

Terms are stored as ``{exponent tuple: coefficient}`` with zero coefficients
dropped.  Values are treated as immutable; every operation returns a new
polynomial.  Coefficients may be complex in intermediate computations (the
determinant expansions) and are realified by the callers.
"""

from __future__ import annotations

from functools import cached_property
from math import factorial
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from .errors import DimensionMismatch, HomogeneityError

Exponent = Tuple[int, ...]

# keeps (points x terms) temporaries of batch evaluation around this many entries
_BATCH_ENTRIES = 1 << 21


class SparsePoly:
    """Polynomial in ``nvars`` variables, not necessarily homogeneous."""

    def __init__(self, nvars: int, terms: Mapping[Exponent, complex] | Iterable = ()):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        self.nvars = int(nvars)
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: Dict[Exponent, complex] = {}
        for exp, c in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.nvars:
                raise DimensionMismatch(f"exponent {exp} has length {len(exp)}, expected {self.nvars}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            if not np.isfinite(c):
                raise ValueError("coefficients must be finite")
            if c != 0:
                clean[exp] = clean.get(exp, 0) + c
        self._terms = {e: c for e, c in clean.items() if c != 0}

    @property
    def terms(self) -> Dict[Exponent, complex]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def total_degree(self) -> int:
        return max((sum(e) for e in self._terms), default=0)

    def _like(self, terms) -> "SparsePoly":
        return SparsePoly(self.nvars, terms)

    def __eq__(self, other):
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self._terms.items())))

    def __repr__(self):
        return f"{type(self).__name__}(nvars={self.nvars}, terms={len(self._terms)})"

    @cached_property
    def _arrays(self):
        exps = sorted(self._terms)
        E = np.array(exps, dtype=np.int64).reshape(len(exps), self.nvars)
        c = np.array([self._terms[e] for e in exps])
        if c.size == 0:
            c = np.zeros(0)
        return E, c

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """Exponent matrix and coefficient vector in sorted (deterministic) term order."""
        E, c = self._arrays
        return E.copy(), c.copy()

    def __call__(self, x) -> float:
        return self.eval(x)

    def eval(self, x):
        x = np.asarray(x)
        if x.shape != (self.nvars,):
            raise DimensionMismatch(f"point has shape {x.shape}, expected ({self.nvars},)")
        return self.eval_batch(x[None, :])[0]

    def eval_batch(self, X) -> np.ndarray:
        """Evaluate at the rows of ``X`` (shape ``(M, nvars)``)."""
        X = np.atleast_2d(np.asarray(X))
        if X.shape[1] != self.nvars:
            raise DimensionMismatch(f"points have {X.shape[1]} coordinates, expected {self.nvars}")
        E, c = self._arrays
        out_dtype = np.result_type(X.dtype, c.dtype, float)
        out = np.zeros(X.shape[0], dtype=out_dtype)
        if c.size == 0:
            return out
        chunk = max(1, _BATCH_ENTRIES // max(1, c.size * max(1, self.nvars)))
        for s in range(0, X.shape[0], chunk):
            Xs = X[s : s + chunk]
            mono = np.prod(Xs[:, None, :] ** E[None, :, :], axis=2)
            out[s : s + chunk] = mono @ c
        return out

    def __add__(self, other: "SparsePoly") -> "SparsePoly":
        _check_nvars(self, other)
        t = dict(self._terms)
        for e, c in other._terms.items():
            t[e] = t.get(e, 0) + c
        return self._like(t)

    def __neg__(self):
        return self._like({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, s) -> "SparsePoly":
        return self._like({e: s * c for e, c in self._terms.items()})

    def __mul__(self, other):
        if np.isscalar(other):
            return self.scaled(other)
        _check_nvars(self, other)
        return self._like(mul_terms(self._terms, other._terms))

    __rmul__ = __mul__

    def partial(self, i: int) -> "SparsePoly":
        t = {}
        for e, c in self._terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                t[tuple(ne)] = c * e[i]
        return self._like(t)

    def directional(self, v) -> "SparsePoly":
        """``sum_i v_i d/dZ_i`` applied once."""
        v = np.asarray(v)
        t: Dict[Exponent, complex] = {}
        for e, c in self._terms.items():
            for i, ei in enumerate(e):
                if ei and v[i] != 0:
                    ne = list(e)
                    ne[i] -= 1
                    ne = tuple(ne)
                    t[ne] = t.get(ne, 0) + c * ei * v[i]
        return self._like(t)

    def homogeneous_part(self, k: int) -> "SparsePoly":
        return self._like({e: c for e, c in self._terms.items() if sum(e) == k})

    def real_part(self, tol: float = 0.0) -> "SparsePoly":
        """Drop imaginary parts, checking they are below ``tol`` times the largest coefficient."""
        if not self._terms:
            return self._like({})
        big = max(abs(c) for c in self._terms.values())
        worst = max(abs(np.imag(c)) for c in self._terms.values())
        if worst > tol * big:
            raise ValueError(f"imaginary coefficient part {worst:.3g} exceeds tolerance")
        return self._like({e: float(np.real(c)) for e, c in self._terms.items()})

    def taylor_coefficients(self, x0) -> list:
        """Expand ``p(x0 + t*xi)`` in powers of ``t``.

        Returns ``[(coef_poly_k, abs_bound_k) for k = 0..deg]``; ``coef_poly_k``
        is homogeneous of degree ``k`` in ``xi`` and ``abs_bound_k`` is the sum of
        absolute contributions, a scale for deciding numerical vanishing.
        """
        x0 = np.asarray(x0, dtype=float)
        deg = self.total_degree
        coefs = [dict() for _ in range(deg + 1)]
        bounds = [0.0] * (deg + 1)
        for e, c in self._terms.items():
            for alpha in _sub_multi_indices(e):
                k = sum(alpha)
                w = c
                for i, (ei, ai) in enumerate(zip(e, alpha)):
                    if ei:
                        w = w * _binom(ei, ai) * x0[i] ** (ei - ai)
                coefs[k][alpha] = coefs[k].get(alpha, 0) + w
                bounds[k] += abs(w) if w != 0 else 0.0
        return [(self._like(coefs[k]), bounds[k]) for k in range(deg + 1)]


def _binom(n, k):
    return factorial(n) // (factorial(k) * factorial(n - k))


def _sub_multi_indices(e):
    if not e:
        yield ()
        return
    for a in range(e[0] + 1):
        for rest in _sub_multi_indices(e[1:]):
            yield (a,) + rest


def _check_nvars(a, b):
    if not isinstance(b, SparsePoly):
        raise TypeError(f"cannot combine polynomial with {type(b).__name__}")
    if a.nvars != b.nvars:
        raise DimensionMismatch(f"{a.nvars} vs {b.nvars} variables")


def mul_terms(a: Mapping, b: Mapping) -> Dict[Exponent, complex]:
    out: Dict[Exponent, complex] = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return out


def linear_form(coeffs, const=0.0) -> SparsePoly:
    """``sum_i coeffs[i] Z_i + const``."""
    coeffs = list(coeffs)
    n = len(coeffs)
    t = {}
    for i, a in enumerate(coeffs):
        if a != 0:
            e = [0] * n
            e[i] = 1
            t[tuple(e)] = a
    if const != 0:
        t[(0,) * n] = const
    return SparsePoly(n, t)


def check_homogeneous(poly: SparsePoly, degree: int) -> None:
    for e in poly._terms:
        if sum(e) != degree:
            raise HomogeneityError(f"term {e} has degree {sum(e)}, expected {degree}")
