"""Hermitian eigenvalues, singular values and their tracking along curves.

Eigenvalues come from LAPACK's QR-based Hermitian solver (``heev``); the
singular values of ``A`` are read off the top half of the spectrum of the
Hermitian extension ``[[0, A~], [A~^*, 0]]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import BadK, NoConvergence, NotHermitian, RankDeficient
from .generators import herm_coords
from .hyperpoly import CharRoots
from .tracking import (
    BranchSystem,
    PairOptions,
    RegularityReport,
    SampledCurve,
    contact_windows,
    pair_branches,
    regularity_report,
)

HERM_TOL = 1e-12
RANK_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class HermMatrix:
    """Hermitian ``d x d`` matrix; the stored entries are exactly Hermitian.

    Inputs within ``tol * ||A||`` of Hermitian are symmetrized and the
    original defect is kept in ``defect``.
    """

    entries: np.ndarray
    defect: float = 0.0

    @classmethod
    def from_array(cls, A, tol: float = HERM_TOL) -> "HermMatrix":
        A = np.asarray(A, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise NotHermitian(f"expected a square matrix, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise NotHermitian("matrix entries must be finite")
        defect = float(np.abs(A - A.conj().T).max(initial=0.0))
        nrm = float(np.abs(A).max(initial=0.0))
        if defect > tol * max(nrm, 1e-300) and defect > 0:
            raise NotHermitian(f"conjugate-symmetry defect {defect:.3g} exceeds {tol:g} * |A|")
        H = (A + A.conj().T) / 2
        H.setflags(write=False)
        return cls(H, defect)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def coords(self) -> np.ndarray:
        return herm_coords(self.entries)


@dataclass(frozen=True, eq=False)
class SingularTriple:
    m: int
    n: int
    sigma: np.ndarray


def _as_herm(A) -> HermMatrix:
    return A if isinstance(A, HermMatrix) else HermMatrix.from_array(A)


def _eigvalsh(H: np.ndarray) -> np.ndarray:
    try:
        w = scipy.linalg.eigvalsh(H, driver="ev", check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NoConvergence(f"Hermitian eigensolver failed: {exc}") from exc
    return w[::-1].copy()


def eig_desc(A) -> CharRoots:
    """Eigenvalues in non-increasing order; ``point`` holds the Herm(d) coordinates."""
    H = _as_herm(A)
    return CharRoots(_eigvalsh(H.entries), H.coords())


def _check_curve_hermitian(M: np.ndarray, tol: float) -> np.ndarray:
    if M.ndim != 3 or M.shape[1] != M.shape[2]:
        raise NotHermitian("a Hermitian curve needs square matrix samples")
    defect = np.abs(M - np.conj(np.swapaxes(M, 1, 2))).max(axis=(1, 2))
    nrm = np.abs(M).max(axis=(1, 2))
    bad = np.flatnonzero((defect > tol * nrm) & (defect > 0))
    if bad.size:
        raise NotHermitian(f"sample {bad[0]} is not Hermitian (defect {defect[bad[0]]:.3g})")
    return (M + np.conj(np.swapaxes(M, 1, 2))) / 2


def _spectra(M: np.ndarray) -> np.ndarray:
    return np.array([_eigvalsh(H) for H in M])


def sorted_eigs(curve: SampledCurve, tol: float = HERM_TOL) -> SampledCurve:
    """Non-increasing eigenvalues at every sample of a Hermitian matrix curve."""
    M = _check_curve_hermitian(np.asarray(curve.values, dtype=complex), tol)
    return SampledCurve(curve.t0, curve.t1, _spectra(M))


def eig_track(
    curve: SampledCurve,
    opts: Optional[PairOptions] = None,
    refinements: Sequence[int] = (),
    tol: float = HERM_TOL,
) -> Tuple[BranchSystem, RegularityReport]:
    """Sorted eigenvalues along a Hermitian curve, paired into branches, with their report."""
    bs = pair_branches(sorted_eigs(curve, tol), opts)
    return bs, regularity_report(bs, refinements)


def hermitian_extension(A) -> HermMatrix:
    """``[[0, A~], [A~^*, 0]]`` with ``A`` zero-padded to the square ``A~`` of size max(m, n)."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    m, n = A.shape
    s = max(m, n)
    At = np.zeros((s, s), dtype=complex)
    At[:m, :n] = A
    Z = np.zeros((s, s), dtype=complex)
    E = np.block([[Z, At], [At.conj().T, Z]])
    E.setflags(write=False)
    return HermMatrix(E, 0.0)


def _sigma_from_extension(w: np.ndarray, ell: int) -> np.ndarray:
    # the top half of a +/- paired spectrum is >= 0 up to roundoff
    return np.maximum(w[:ell], 0.0)


def singular_desc(A) -> SingularTriple:
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    m, n = A.shape
    ell = min(m, n)
    w = _eigvalsh(hermitian_extension(A).entries)
    return SingularTriple(m, n, _sigma_from_extension(w, ell))


def ky_fan(A, k: int) -> float:
    """Sum of the ``k`` largest singular values."""
    A = np.atleast_2d(np.asarray(A))
    ell = min(A.shape)
    if not 1 <= k <= ell:
        raise BadK(f"k={k} outside 1..{ell}")
    return float(singular_desc(A).sigma[:k].sum())


def sorted_singular(curve: SampledCurve, rank_tol: float = RANK_TOL, kappa: float = PairOptions.kappa) -> Tuple[SampledCurve, float]:
    """Top ``l = min(m, n)`` extension eigenvalues along a matrix curve, after the rank checks.

    The rank condition is checked twice: ``sigma_l > rank_tol * sup_t ||A(t)||``
    at every sample, and ``sigma_l`` must stay out of a contact window with
    its mirror ``-sigma_l`` (which is how a sign change between grid points
    shows up).  Either failure raises RankDeficient at the offending sample.
    Returns the singular-value curve and the absolute rank threshold used.
    """
    M = np.asarray(curve.values, dtype=complex)
    if M.ndim == 2:
        M = M[:, :, None]
    if M.ndim != 3:
        raise ValueError("expected a curve of m x n matrices")
    ell = min(M.shape[1:])
    W = np.array([_eigvalsh(hermitian_extension(A).entries) for A in M])
    thresh = rank_tol * float(W[:, 0].max(initial=0.0))
    sig = np.maximum(W[:, :ell], 0.0)
    smin = sig[:, -1]
    low = np.flatnonzero(smin <= thresh)
    if low.size:
        i = int(low[np.argmin(smin[low])])
        raise RankDeficient(i, float(smin[i]), float(curve.t[i]))
    L = float(np.max(np.abs(np.diff(sig, axis=0)), initial=0.0) / curve.dt)
    runs = contact_windows(np.c_[smin, -smin], curve.dt, kappa, L)
    if runs:
        _, lo, hi = runs[0]
        i = lo + int(np.argmin(smin[lo : hi + 1]))
        raise RankDeficient(i, float(smin[i]), float(curve.t[i]))
    return SampledCurve(curve.t0, curve.t1, sig), thresh


def sv_track(
    curve: SampledCurve,
    opts: Optional[PairOptions] = None,
    refinements: Sequence[int] = (),
    rank_tol: float = RANK_TOL,
) -> Tuple[BranchSystem, RegularityReport]:
    """Track the ``l = min(m, n)`` singular values of a matrix curve.

    Only the top ``l`` eigenvalues of the Hermitian extension are paired, the
    bottom ``l`` being their mirrors.  See ``sorted_singular`` for the rank checks.
    """
    opts = opts or PairOptions()
    sig, thresh = sorted_singular(curve, rank_tol, opts.kappa)
    bs = pair_branches(sig, opts)
    bs.meta.update(rank_tol=thresh, sigma_min=float(sig.values[:, -1].min()))
    return bs, regularity_report(bs, refinements)


__all__ = [
    "HermMatrix",
    "SingularTriple",
    "eig_desc",
    "eig_track",
    "sorted_eigs",
    "sorted_singular",
    "hermitian_extension",
    "singular_desc",
    "ky_fan",
    "sv_track",
]
