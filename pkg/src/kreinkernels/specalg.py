"""Spectral primitives for complex hermitian matrices.

Everything downstream (Gram operators, induced spaces, Choi splittings,
the H2 operator of a holomorphic kernel) reduces to the handful of
functions here: a deterministic ``eigh``, the Jordan split ``A = A+ - A-``,
``|A|``, square roots and PSD certification.

Inner products are linear in the first argument: ``<u, v> = v^H u``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import EigenError, NotHermitianError, NotPSDError

HERMITIAN_TOL = 1e-10


def max_abs(a: np.ndarray) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def default_rank_tol(a: np.ndarray) -> float:
    """Scale-aware zero threshold ``dim * ||A||_max * 1e-12``."""
    a = np.asarray(a)
    return a.shape[0] * max_abs(a) * 1e-12


def hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``a`` as hermitian and return its exact symmetrization ``(A + A^H) / 2``."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {a.shape}", np.inf)
    dev = max_abs(a - a.conj().T)
    if dev > tol:
        raise NotHermitianError(f"matrix is not hermitian (max deviation {dev:.3e} > {tol:.1e})", dev)
    return (a + a.conj().T) / 2


class Signature(NamedTuple):
    plus: int
    minus: int
    zero: int


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in descending order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    rank_tol: float

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def signature(self) -> Signature:
        lam = self.eigenvalues
        plus = int(np.sum(lam > self.rank_tol))
        minus = int(np.sum(lam < -self.rank_tol))
        return Signature(plus, minus, self.dim - plus - minus)

    def nonzero(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenpairs with ``|lambda| > rank_tol``, order preserved."""
        keep = np.abs(self.eigenvalues) > self.rank_tol
        return self.eigenvalues[keep], self.eigenvectors[:, keep]

    def positive(self) -> tuple[np.ndarray, np.ndarray]:
        keep = self.eigenvalues > self.rank_tol
        return self.eigenvalues[keep], self.eigenvectors[:, keep]

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.conj().T


def _fix_phases(q: np.ndarray) -> np.ndarray:
    # first component with modulus above 1e-12 becomes real positive
    q = q.copy()
    for j in range(q.shape[1]):
        col = q[:, j]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        if idx.size:
            z = col[idx[0]]
            q[:, j] = col * (abs(z) / z)
    return q


def eig_hermitian(a, rank_tol: float | None = None) -> SpectralDecomposition:
    """Deterministic hermitian eigendecomposition, eigenvalues descending.

    Raises :class:`EigenError` when LAPACK fails or the reconstruction
    residual exceeds ``1e-9 * max(1, ||A||_max)``.
    """
    a = hermitian(a)
    n = a.shape[0]
    if rank_tol is None:
        rank_tol = default_rank_tol(a)
    if n == 0:
        return SpectralDecomposition(np.zeros(0), np.zeros((0, 0), dtype=complex), rank_tol)
    try:
        lam, q = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenError(f"eigh did not converge: {exc}", np.inf) from exc
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    q = _fix_phases(q[:, order])
    dec = SpectralDecomposition(lam, q, float(rank_tol))
    resid = max_abs(dec.reconstruct() - a)
    if not resid <= 1e-9 * max(1.0, max_abs(a)):
        raise EigenError(f"eigendecomposition residual {resid:.3e} too large", resid)
    return dec


def signature(a, rank_tol: float | None = None) -> Signature:
    return eig_hermitian(a, rank_tol).signature


def jordan_parts(a) -> tuple[np.ndarray, np.ndarray]:
    """Split ``A = A+ - A-`` with ``A+, A- >= 0`` and ``A+ A- = 0``."""
    dec = eig_hermitian(a)
    q, lam = dec.eigenvectors, dec.eigenvalues
    pos = np.where(lam > 0, lam, 0.0)
    neg = np.where(lam < 0, -lam, 0.0)
    qh = q.conj().T
    return (q * pos) @ qh, (q * neg) @ qh


def abs_op(a) -> np.ndarray:
    """Operator absolute value ``|A| = A+ + A-``."""
    dec = eig_hermitian(a)
    q = dec.eigenvectors
    return (q * np.abs(dec.eigenvalues)) @ q.conj().T


class PSDVerdict(NamedTuple):
    verdict: bool
    min_eigenvalue: float


def psd_check(a, tol: float = 1e-10) -> PSDVerdict:
    a = hermitian(a)
    if a.shape[0] == 0:
        return PSDVerdict(True, 0.0)
    lam_min = float(np.linalg.eigvalsh(a)[0])
    return PSDVerdict(lam_min >= -tol, lam_min)


def _require_psd(a, tol: float | None) -> SpectralDecomposition:
    dec = eig_hermitian(a)
    if tol is None:
        tol = max(dec.rank_tol, 1e-12 * max(1.0, max_abs(a)))
    if dec.dim and dec.eigenvalues[-1] < -tol:
        raise NotPSDError(
            f"matrix is not PSD: eigenvalue {dec.eigenvalues[-1]:.3e} < -{tol:.1e}",
            float(dec.eigenvalues[-1]),
            dec.eigenvectors[:, -1],
        )
    return dec


def sqrt_psd(a, tol: float | None = None) -> np.ndarray:
    """Principal square root of a PSD matrix (tiny negative eigenvalues clipped)."""
    dec = _require_psd(a, tol)
    q = dec.eigenvectors
    return (q * np.sqrt(np.clip(dec.eigenvalues, 0.0, None))) @ q.conj().T


def pinv_sqrt(a, rank_tol: float | None = None, tol: float | None = None) -> np.ndarray:
    """Moore-Penrose inverse of ``sqrt(A)`` built from eigenvalues above ``rank_tol``."""
    dec = _require_psd(a, tol)
    if rank_tol is None:
        rank_tol = dec.rank_tol
    keep = dec.eigenvalues > rank_tol
    q = dec.eigenvectors[:, keep]
    return (q / np.sqrt(dec.eigenvalues[keep])) @ q.conj().T


def range_basis(a: np.ndarray, rank_tol: float | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of the column space of an arbitrary matrix, via SVD."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if rank_tol is None:
        rank_tol = max(a.shape) * (s[0] if s.size else 0.0) * 1e-12
    return u[:, s > rank_tol]
