"""Hermitian maps on matrix algebras and their dilations.

A linear map ``T: M_n -> M_h`` is stored through its Choi matrix, the
``(n h) x (n h)`` block matrix whose ``(i, j)`` block is ``T(E_ij)``. ``T`` is
hermitian iff the Choi matrix is, and completely positive iff it is PSD.

Stinespring dilations use ``pi(a) = a ⊗ I_k`` on ``C^n ⊗ C^k`` with the
fundamental symmetry ``J = I_n ⊗ diag(s)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import NotHermitianError, ShapeMismatchError
from .kernel import FiniteKernel, check_compatible
from .kolmogorov import decompose
from .specalg import HERMITIAN_TOL, abs_op, default_rank_tol, eig_hermitian, jordan_parts, max_abs, psd_check, range_basis

PSD_TOL = 1e-10


def matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


@dataclass(frozen=True, eq=False)
class HermitianLinearMap:
    n: int
    h: int
    choi: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.choi, dtype=complex)
        if c.shape != (self.n * self.h, self.n * self.h):
            raise ShapeMismatchError(f"Choi matrix has shape {c.shape}, expected {(self.n * self.h,) * 2}")
        object.__setattr__(self, "choi", c)

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], n: int, h: int | None = None) -> "HermitianLinearMap":
        blocks = [[np.asarray(fn(matrix_unit(n, i, j)), dtype=complex) for j in range(n)] for i in range(n)]
        if h is None:
            h = blocks[0][0].shape[0]
        return cls(n, h, np.block(blocks))

    @classmethod
    def identity(cls, n: int) -> "HermitianLinearMap":
        return cls.from_function(lambda a: a, n)

    @classmethod
    def transpose(cls, n: int) -> "HermitianLinearMap":
        return cls.from_function(lambda a: a.T, n)

    def block(self, i: int, j: int) -> np.ndarray:
        h = self.h
        return self.choi[i * h:(i + 1) * h, j * h:(j + 1) * h]

    def __call__(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        if a.shape != (self.n, self.n):
            raise ShapeMismatchError(f"argument has shape {a.shape}, expected {(self.n, self.n)}")
        blocks = self.choi.reshape(self.n, self.h, self.n, self.h)
        return np.einsum("ij,iajb->ab", a, blocks)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return max_abs(self.choi - self.choi.conj().T) <= tol

    def require_hermitian(self, tol: float = HERMITIAN_TOL) -> "HermitianLinearMap":
        dev = max_abs(self.choi - self.choi.conj().T)
        if dev > tol:
            raise NotHermitianError(f"map is not hermitian (Choi deviation {dev:.3e})", dev)
        return self

    def is_completely_positive(self, tol: float = PSD_TOL) -> bool:
        return psd_check(self.choi, tol * max(1.0, max_abs(self.choi))).verdict

    def with_choi(self, c: np.ndarray) -> "HermitianLinearMap":
        return HermitianLinearMap(self.n, self.h, c)

    def __add__(self, other: "HermitianLinearMap") -> "HermitianLinearMap":
        return self.with_choi(self.choi + other.choi)

    def __sub__(self, other: "HermitianLinearMap") -> "HermitianLinearMap":
        return self.with_choi(self.choi - other.choi)

    def __mul__(self, c) -> "HermitianLinearMap":
        return self.with_choi(c * self.choi)

    __rmul__ = __mul__


def wittstock_split(t: HermitianLinearMap) -> tuple[HermitianLinearMap, HermitianLinearMap]:
    """``T = T+ - T-`` with completely positive parts of orthogonal Choi ranges."""
    t.require_hermitian()
    plus, minus = jordan_parts(t.choi)
    return t.with_choi(plus), t.with_choi(minus)


def paulsen_S(t: HermitianLinearMap) -> HermitianLinearMap:
    """Completely positive ``S = T+ + T-`` (Choi ``|C_T|``) with ``-S <= T <= S``."""
    t.require_hermitian()
    return t.with_choi(abs_op(t.choi))


def off_diagonal_map_choi(t: HermitianLinearMap, phi1: HermitianLinearMap, phi2: HermitianLinearMap) -> np.ndarray:
    """Choi matrix of ``F([[a, b], [c, d]]) = [[phi1(a), T(b)], [T(c^*)^*, phi2(d)]]`` on ``M_2n``."""
    n, h = t.n, t.h
    for m in (phi1, phi2):
        if (m.n, m.h) != (n, h):
            raise ShapeMismatchError("off-diagonal check needs maps with identical (n, h)")
    out = np.zeros((2 * n * 2 * h, 2 * n * 2 * h), dtype=complex)
    hh = 2 * h
    for big_i in range(2 * n):
        for big_j in range(2 * n):
            blk = np.zeros((hh, hh), dtype=complex)
            i, j = big_i % n, big_j % n
            if big_i < n and big_j < n:
                blk[:h, :h] = phi1.block(i, j)
            elif big_i < n:
                blk[:h, h:] = t.block(i, j)
            elif big_j < n:
                # c = E_ij, T(c^*)^* = T(E_ji)^H
                blk[h:, :h] = t.block(j, i).conj().T
            else:
                blk[h:, h:] = phi2.block(i, j)
            out[big_i * hh:(big_i + 1) * hh, big_j * hh:(big_j + 1) * hh] = blk
    return out


class OffDiagonalReport(NamedTuple):
    verdict: bool
    min_eigenvalue: float
    tol: float


def off_diagonal_check(t: HermitianLinearMap, phi1: HermitianLinearMap, phi2: HermitianLinearMap, tol: float = PSD_TOL) -> OffDiagonalReport:
    c = off_diagonal_map_choi(t, phi1, phi2)
    tol = tol * max(1.0, max_abs(c))
    v = psd_check((c + c.conj().T) / 2, tol)
    return OffDiagonalReport(v.verdict, v.min_eigenvalue, tol)


@dataclass(frozen=True, eq=False)
class StinespringDilation:
    """``T(a) = B^H J (a ⊗ I_k) B`` with ``J = I_n ⊗ diag(s)``."""

    n: int
    h: int
    B: np.ndarray = field(repr=False)  # (n*k, h)
    s: np.ndarray

    @property
    def k(self) -> int:
        return len(self.s)

    @property
    def J(self) -> np.ndarray:
        return np.tile(self.s, self.n)

    def pi(self, a) -> np.ndarray:
        return np.kron(np.asarray(a, dtype=complex), np.eye(self.k))

    def apply(self, a) -> np.ndarray:
        return self.B.conj().T @ (self.J[:, None] * (self.pi(a) @ self.B))

    def signature(self) -> tuple[int, int]:
        return int(np.sum(self.s > 0)), int(np.sum(self.s < 0))

    def reconstruction_residual(self, t: HermitianLinearMap) -> float:
        worst = 0.0
        for i in range(self.n):
            for j in range(self.n):
                worst = max(worst, max_abs(self.apply(matrix_unit(self.n, i, j)) - t.block(i, j)))
        return worst

    def selfadjoint_residual(self, a) -> float:
        """``J pi(a)^H J - pi(a^*)``; zero by construction."""
        j = self.J
        p = self.pi(a)
        return max_abs(j[:, None] * p.conj().T * j[None, :] - self.pi(np.asarray(a).conj().T))

    def minimality_rank(self, rank_tol: float | None = None) -> int:
        """Dimension of ``span{pi(E_ij) B xi}``; minimal iff it equals ``n k``."""
        if self.k == 0:
            return 0
        cols = [self.pi(matrix_unit(self.n, i, j)) @ self.B for i in range(self.n) for j in range(self.n)]
        return range_basis(np.concatenate(cols, axis=1), rank_tol).shape[1]


def stinespring(t: HermitianLinearMap, rank_tol: float | None = None) -> StinespringDilation:
    """Minimal Stinespring dilation from the eigendecomposition of the Choi matrix.

    With ``C_T = sum_l lam_l v_l v_l^H`` the row ``(p, l)`` of ``B`` is
    ``sqrt|lam_l| conj(v_l[p-th block])`` and ``s_l = sign(lam_l)``.
    """
    t.require_hermitian()
    n, h = t.n, t.h
    dec = eig_hermitian(t.choi, rank_tol)
    lam, q = dec.nonzero()
    k = len(lam)
    # v_l[p, b] = q[p*h + b, l]
    v = q.T.reshape(k, n, h)
    b = (np.sqrt(np.abs(lam))[:, None, None] * v.conj()).transpose(1, 0, 2).reshape(n * k, h)
    return StinespringDilation(n, h, b, np.sign(lam).astype(int))


class StinespringKolmogorovReport(NamedTuple):
    passed: bool
    kernel_residual: float
    invariance_residual: float
    intertwining_residual: float
    tol: float


def stinespring_to_kolmogorov(
    dil: StinespringDilation,
    t: HermitianLinearMap,
    sample: Sequence[np.ndarray],
    actions: Sequence[np.ndarray] | None = None,
    tol: float = 1e-9,
) -> StinespringKolmogorovReport:
    """Check ``V(x) = pi(x^*) J B`` decomposes ``K_T(x, y) = T(x y^*)`` on a sample.

    Also checks ``K_T(x, phi(a, y)) = T(x a y^*) = K_T(phi(a^*, x), y)`` with
    ``phi(a, x) = x a^*`` and the intertwining ``pi(a) V(x) = V(x a^*)``.
    """
    sample = [np.asarray(x, dtype=complex) for x in sample]
    actions = sample if actions is None else [np.asarray(a, dtype=complex) for a in actions]
    j = dil.J

    def vmap(x):
        return dil.pi(x.conj().T) @ (j[:, None] * dil.B)

    def kt(x, y):
        return t(x @ y.conj().T)

    def phi(a, x):
        return x @ a.conj().T

    kres = inv = inter = 0.0
    for x in sample:
        vx = vmap(x)
        for y in sample:
            vy = vmap(y)
            kres = max(kres, max_abs(vx.conj().T @ (j[:, None] * vy) - kt(x, y)))
            for a in actions:
                lhs = kt(x, phi(a, y))
                inv = max(inv, max_abs(lhs - t(x @ a @ y.conj().T)), max_abs(lhs - kt(phi(a.conj().T, x), y)))
        for a in actions:
            inter = max(inter, max_abs(dil.pi(a) @ vx - vmap(phi(a, x))))
    scale = max(1.0, max_abs(t.choi))
    ok = max(kres, inv, inter) <= tol * scale
    return StinespringKolmogorovReport(bool(ok), kres, inv, inter, tol)


class DecomposableReport(NamedTuple):
    verdict: bool
    min_eigenvalue: float
    tol: float


def block_kernel_gram(k: FiniteKernel, l1: FiniteKernel, l2: FiniteKernel) -> np.ndarray:
    """Gram matrix of the ``L(C^h ⊕ C^h)``-valued kernel ``[[L1, K], [K^*, L2]]``, labels interleaved."""
    check_compatible(k, l1)
    check_compatible(k, l2)
    n, h = k.n, k.h
    kstar = k.adjoint().blocks
    blocks = np.zeros((n, n, 2 * h, 2 * h), dtype=complex)
    blocks[:, :, :h, :h] = l1.blocks
    blocks[:, :, :h, h:] = k.blocks
    blocks[:, :, h:, :h] = kstar
    blocks[:, :, h:, h:] = l2.blocks
    return blocks.transpose(0, 2, 1, 3).reshape(2 * n * h, 2 * n * h)


def decomposable_check(k: FiniteKernel, l1: FiniteKernel, l2: FiniteKernel, tol: float = PSD_TOL) -> DecomposableReport:
    g = block_kernel_gram(k, l1, l2)
    tol = tol * max(1.0, max_abs(g))
    v = psd_check((g + g.conj().T) / 2, tol)
    return DecomposableReport(v.verdict, v.min_eigenvalue, tol)


@dataclass(frozen=True, eq=False)
class DecomposableDilation:
    """``K(x, y) = V(x)^H U V(y)`` with ``||U|| <= 1`` and total ``{V(x) H}``."""

    labels: tuple[str, ...]
    h: int
    V: np.ndarray = field(repr=False)  # (n, k, h)
    U: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return self.U.shape[0]

    def kernel_blocks(self) -> np.ndarray:
        uv = np.einsum("kl,ylb->ykb", self.U, self.V)
        return np.einsum("xka,ykb->xyab", self.V.conj(), uv)

    def to_kernel(self) -> FiniteKernel:
        return FiniteKernel(self.labels, self.h, self.kernel_blocks())

    def norm(self) -> float:
        return float(np.linalg.norm(self.U, 2)) if self.k else 0.0

    def residual(self, k: FiniteKernel) -> float:
        return max_abs(self.kernel_blocks() - k.blocks) if k.n else 0.0

    def rank(self) -> int:
        w = self.V.transpose(1, 0, 2).reshape(self.k, -1)
        return range_basis(w).shape[1] if self.k else 0

    def with_U(self, u: np.ndarray) -> "DecomposableDilation":
        return DecomposableDilation(self.labels, self.h, self.V, u)


def real_imag_parts(k: FiniteKernel) -> tuple[FiniteKernel, FiniteKernel]:
    """``K1 = (K + K^*) / 2`` and ``K2 = (K - K^*) / 2i``, both hermitian, ``K = K1 + i K2``."""
    ks = k.adjoint()
    return (k + ks) * 0.5, (k - ks) * (1 / 2j)


def stack_and_compress(w1: np.ndarray, j1: np.ndarray, w2: np.ndarray, j2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Compress ``diag(J1, i J2)`` to the column span of ``[W1; W2]``.

    Returns ``(Q^H W', Q^H diag(J1, i J2) Q)``; ``Q`` is the identity when the
    stacked columns already span the whole sum space.
    """
    w = np.concatenate([w1, w2], axis=0)
    diag = np.concatenate([np.asarray(j1, dtype=complex), 1j * np.asarray(j2, dtype=complex)])
    total = w.shape[0]
    q = range_basis(w) if total else np.zeros((0, 0), dtype=complex)
    if q.shape[1] == total:
        q = np.eye(total, dtype=complex)
    u = q.conj().T @ (diag[:, None] * q)
    return q.conj().T @ w, u


def contraction_dilate(k: FiniteKernel, rank_tol: float | None = None) -> DecomposableDilation:
    """Contractive dilation of an arbitrary kernel via its real and imaginary parts."""
    k1, k2 = real_imag_parts(k)
    # a part at roundoff level relative to K (e.g. K2 of a hermitian K) is exactly zero
    floor = default_rank_tol(k.gram_matrix()) if rank_tol is None else rank_tol
    k1, k2 = (p if max_abs(p.blocks) > floor else p * 0.0 for p in (k1, k2))
    d1, d2 = decompose(k1, rank_tol), decompose(k2, rank_tol)
    n, h = k.n, k.h
    w, u = stack_and_compress(d1.stack(), d1.J, d2.stack(), d2.J)
    kk = u.shape[0]
    v = w.reshape(kk, n, h).transpose(1, 0, 2) if n else np.zeros((0, kk, h), dtype=complex)
    return DecomposableDilation(k.labels, h, np.ascontiguousarray(v), u)


class BlockReport(NamedTuple):
    verdict: bool
    min_eigenvalue: float
    factorization_residual: float
    tol: float


def dilation_to_block(d: DecomposableDilation, tol: float = 1e-9) -> tuple[FiniteKernel, FiniteKernel, BlockReport]:
    """``L1 = L2 = V(x)^H V(y)`` and a PSD certificate for ``[[L1, K], [K^*, L2]]``.

    The block Gram is assembled directly and also through the factorization
    ``(⊕ V(x_i)^H ⊕ V(x_i)^H) ([[I, U], [U^H, I]] ⊗ ones) (⊕ V(x_j) ⊕ V(x_j))``
    in the label-interleaved order; the report carries their difference.
    """
    n, h, kk = len(d.labels), d.h, d.k
    l = FiniteKernel(d.labels, h, np.einsum("xka,ykb->xyab", d.V.conj(), d.V))
    kd = d.to_kernel()
    g = block_kernel_gram(kd, l, l)
    if n:
        core = np.block([[np.eye(kk), d.U], [d.U.conj().T, np.eye(kk)]])
        # row (x, s, a) of the stacked map picks V(x) in slot s of C^k ⊕ C^k
        fac = np.zeros((2 * kk, n * 2 * h), dtype=complex)
        for i in range(n):
            fac[:kk, i * 2 * h:i * 2 * h + h] = d.V[i]
            fac[kk:, i * 2 * h + h:(i + 1) * 2 * h] = d.V[i]
        g_fac = fac.conj().T @ core @ fac
        fres = max_abs(g_fac - g)
    else:
        fres = 0.0
    tol_abs = tol * max(1.0, max_abs(g))
    v = psd_check((g + g.conj().T) / 2, tol_abs) if g.size else None
    lam = v.min_eigenvalue if v else 0.0
    return l, l, BlockReport(lam >= -tol_abs, lam, fres, tol_abs)
