"""Constructions of hyperbolic and real stable polynomials.

Determinants of matrices of affine forms are expanded exactly by Laplace
expansion along rows, memoized over column subsets (``O(m 2^m)`` products of
a linear form with a polynomial).

Coordinates on Herm(d), in this fixed order: the ``d`` diagonal entries, then
the real parts of the strict upper triangle row-major, then the imaginary
parts of the strict upper triangle row-major.
"""

from __future__ import annotations

from itertools import combinations
from math import comb
from typing import Dict, List, Sequence

import numpy as np

from .errors import BadK, NotHermitian, NotPSD, NotSymmetric
from .hyperpoly import HomPoly
from .polynomial import SparsePoly, linear_form
from .stability import RealPoly

MAX_DET_SIZE = 12


def det_of_forms(M: Sequence[Sequence[SparsePoly]]) -> SparsePoly:
    """Determinant of a square matrix whose entries are polynomials (usually affine forms)."""
    m = len(M)
    if m == 0:
        raise ValueError("empty matrix")
    if m > MAX_DET_SIZE:
        raise ValueError(f"symbolic determinant limited to size {MAX_DET_SIZE}")
    nvars = M[0][0].nvars
    one = SparsePoly(nvars, {(0,) * nvars: 1.0})
    memo: Dict[int, SparsePoly] = {0: one}

    # minor on rows m-|S|..m-1 and the column set S (bitmask)
    def minor(mask: int) -> SparsePoly:
        if mask in memo:
            return memo[mask]
        cols = [c for c in range(m) if mask >> c & 1]
        row = m - len(cols)
        acc = SparsePoly(nvars)
        for pos, c in enumerate(cols):
            entry = M[row][c]
            if entry.is_zero():
                continue
            sub = minor(mask & ~(1 << c))
            if sub.is_zero():
                continue
            term = entry * sub
            acc = acc - term if pos % 2 else acc + term
        memo[mask] = acc
        return acc

    return minor((1 << m) - 1)


def _pencil_forms(mats: Sequence[np.ndarray], const: np.ndarray | None) -> List[List[SparsePoly]]:
    m = mats[0].shape[0]
    rows = []
    for a in range(m):
        row = []
        for b in range(m):
            c0 = 0.0 if const is None else const[a, b]
            row.append(linear_form([M[a, b] for M in mats], c0))
        rows.append(row)
    return rows


def _check_hermitian(A, name, tol=1e-10):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotHermitian(f"{name} must be square")
    nrm = max(np.linalg.norm(A, 2), 1e-300)
    if np.linalg.norm(A - A.conj().T, 2) > tol * nrm:
        raise NotHermitian(f"{name} is not Hermitian")
    return (A + A.conj().T) / 2


def determinantal(As: Sequence, B, psd_tol: float = 1e-10, imag_tol: float = 1e-10) -> RealPoly:
    """``det(sum_j Z_j A_j + B)`` for PSD Hermitian ``A_j`` and Hermitian ``B``.

    The polynomial is real stable or identically zero; a zero result is
    returned (and flagged by ``is_zero()``) rather than raised.
    """
    if len(As) == 0:
        raise ValueError("need at least one matrix A_j")
    mats = [_check_hermitian(A, f"A_{j + 1}") for j, A in enumerate(As)]
    Bh = _check_hermitian(B, "B")
    m = Bh.shape[0]
    for j, A in enumerate(mats):
        if A.shape != (m, m):
            raise ValueError("all matrices must have the same size")
        lo = np.linalg.eigvalsh(A)[0]
        if lo < -psd_tol * max(np.linalg.norm(A, 2), 1.0):
            raise NotPSD(f"A_{j + 1} has eigenvalue {lo:.3g} < 0")
    det = det_of_forms(_pencil_forms(mats, Bh)).real_part(imag_tol)
    # cancellation leaves roundoff-sized terms; drop them relative to the largest one
    big = max((abs(c) for _, c in det.items()), default=0.0)
    return RealPoly(len(mats), {e: c for e, c in det.items() if abs(c) > 1e-14 * big})


def lax_pencil(A, B, tol: float = 1e-12) -> HomPoly:
    """``det(x I + y A + z B)`` as a homogeneous polynomial in ``(x, y, z)``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    for name, M in (("A", A), ("B", B)):
        if M.ndim != 2 or M.shape[0] != M.shape[1] or not np.allclose(M, M.T, atol=tol * max(1.0, np.abs(M).max(initial=0))):
            raise NotSymmetric(f"{name} must be real symmetric")
    if A.shape != B.shape:
        raise ValueError("A and B must have the same size")
    d = A.shape[0]
    det = det_of_forms(_pencil_forms([np.eye(d), (A + A.T) / 2, (B + B.T) / 2], None))
    return HomPoly(3, d, {e: float(np.real(c)) for e, c in det.items()})


def lorentzian(n: int) -> HomPoly:
    """``X_1^2 - X_2^2 - ... - X_n^2``, hyperbolic with respect to ``e_1``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    terms = {}
    for i in range(n):
        e = [0] * n
        e[i] = 2
        terms[tuple(e)] = 1.0 if i == 0 else -1.0
    return HomPoly(n, 2, terms)


def gk_forms(k: int, d: int) -> np.ndarray:
    """Rows are the affine forms ``mu_I(Y) = (1/k) sum_{i in I} Y_i`` over k-subsets ``I``."""
    if not 1 <= k <= d:
        raise BadK(f"k={k} outside 1..{d}")
    subsets = list(combinations(range(d), k))
    W = np.zeros((len(subsets), d))
    for r, I in enumerate(subsets):
        W[r, list(I)] = 1.0 / k
    return W


def gk_compose(k: int, d: int) -> HomPoly:
    """``g_k(Y) = prod_{|I| = k} sum_{i in I} Y_i``, of degree ``C(d, k)``."""
    if not 1 <= k <= d:
        raise BadK(f"k={k} outside 1..{d}")
    acc = SparsePoly(d, {(0,) * d: 1.0})
    for I in combinations(range(d), k):
        acc = acc * linear_form([1.0 if i in I else 0.0 for i in range(d)])
    return HomPoly(d, comb(d, k), acc.terms)


def compose_char(forms, lam) -> np.ndarray:
    """Evaluate every affine form at ``lam`` and sort non-increasingly.

    ``forms`` is ``(F, d)`` (linear) or ``(F, d+1)`` with a trailing constant column.
    """
    W = np.asarray(forms, dtype=float)
    lam = np.asarray(lam, dtype=float)
    d = lam.shape[-1]
    vals = lam @ W[:, :d].T
    if W.shape[1] == d + 1:
        vals = vals + W[:, d]
    return -np.sort(-vals, axis=-1)


def additive_compound(M, k: int) -> np.ndarray:
    """k-th additive compound: the action of ``M`` as a derivation on ``Lambda^k``.

    Its eigenvalues are the sums ``sum_{i in I} lam_i`` over k-subsets.
    """
    M = np.asarray(M)
    d = M.shape[0]
    if not 1 <= k <= d:
        raise BadK(f"k={k} outside 1..{d}")
    subsets = list(combinations(range(d), k))
    index = {I: r for r, I in enumerate(subsets)}
    out = np.zeros((len(subsets), len(subsets)), dtype=M.dtype)
    for c, J in enumerate(subsets):
        # M acting on e_J = e_{j1} ^ ... ^ e_{jk}: replace one factor at a time
        for pos, j in enumerate(J):
            for i in range(d):
                if M[i, j] == 0:
                    continue
                new = list(J)
                new[pos] = i
                if len(set(new)) < k:
                    continue
                order = np.argsort(new)
                sign = _perm_sign(order)
                out[index[tuple(np.array(new)[order])], c] += sign * M[i, j]
    return out


def _perm_sign(order) -> int:
    order = list(order)
    sign = 1
    seen = [False] * len(order)
    for i in range(len(order)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def compound_pencil(k: int, A, B) -> HomPoly:
    """``(g_k o lam)`` for the Lax pencil of ``(A, B)``, as ``det(k x I + y C_k(A) + z C_k(B))``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    CA, CB = additive_compound(A, k), additive_compound(B, k)
    size = CA.shape[0]
    det = det_of_forms(_pencil_forms([k * np.eye(size), CA, CB], None))
    return HomPoly(3, size, {e: float(np.real(c)) for e, c in det.items()})


def herm_dim(d: int) -> int:
    return d * d


def _upper_pairs(d: int):
    return [(a, b) for a in range(d) for b in range(a + 1, d)]


def herm_coords(A) -> np.ndarray:
    """Real coordinates of a Hermitian matrix in the documented order."""
    A = np.asarray(A)
    d = A.shape[0]
    pairs = _upper_pairs(d)
    diag = np.real(np.diag(A))
    re = np.array([np.real(A[a, b]) for a, b in pairs])
    im = np.array([np.imag(A[a, b]) for a, b in pairs])
    return np.concatenate([diag, re, im]).astype(float)


def herm_from_coords(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (d * d,):
        raise ValueError(f"expected {d * d} coordinates")
    pairs = _upper_pairs(d)
    q = len(pairs)
    A = np.diag(x[:d]).astype(complex)
    for r, (a, b) in enumerate(pairs):
        A[a, b] = x[d + r] + 1j * x[d + q + r]
        A[b, a] = x[d + r] - 1j * x[d + q + r]
    return A


def herm_det(d: int) -> HomPoly:
    """Determinant on Herm(d) as a degree-d polynomial in the ``d^2`` real coordinates."""
    if d < 1:
        raise ValueError("d must be >= 1")
    n = d * d
    pairs = _upper_pairs(d)
    q = len(pairs)
    zero = SparsePoly(n)
    M = [[zero] * d for _ in range(d)]
    for a in range(d):
        w = [0.0] * n
        w[a] = 1.0
        M[a][a] = linear_form(w)
    for r, (a, b) in enumerate(pairs):
        w_up = [0j] * n
        w_up[d + r] = 1.0
        w_up[d + q + r] = 1j
        w_lo = [0j] * n
        w_lo[d + r] = 1.0
        w_lo[d + q + r] = -1j
        M[a][b] = linear_form(w_up)
        M[b][a] = linear_form(w_lo)
    det = det_of_forms(M).real_part(1e-12)
    return HomPoly(n, d, det.terms)


def identity_coords(d: int) -> np.ndarray:
    return herm_coords(np.eye(d))


def random_psd(rng, m: int, rank: int | None = None, complex_: bool = True) -> np.ndarray:
    rank = m if rank is None else rank
    G = rng.standard_normal((m, rank))
    if complex_:
        G = G + 1j * rng.standard_normal((m, rank))
    return G @ G.conj().T


def random_hermitian(rng, m: int, complex_: bool = True) -> np.ndarray:
    G = rng.standard_normal((m, m))
    if complex_:
        G = G + 1j * rng.standard_normal((m, m))
    return (G + G.conj().T) / 2


def random_symmetric(rng, m: int) -> np.ndarray:
    G = rng.standard_normal((m, m))
    return (G + G.T) / 2


def random_determinantal(seed: int, m: int = 3, n: int = 2) -> RealPoly:
    """Seeded ``det(sum Z_j A_j + B)`` with random full-rank PSD ``A_j`` and Hermitian ``B``."""
    rng = np.random.default_rng(seed)
    As = [random_psd(rng, m) for _ in range(n)]
    B = random_hermitian(rng, m)
    return determinantal(As, B)
