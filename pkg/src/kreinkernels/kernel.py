"""Finite operator-valued kernels and their Gram forms.

A kernel on a finite label set ``X = (x_1, ..., x_n)`` with values in
``L(C^h)`` is stored as an ``(n, n, h, h)`` array of blocks. Its Gram matrix
``G`` has block ``(x, y)`` equal to ``K(x, y)``, so that for finitely
supported ``f, g: X -> C^h``

    [f, g]_K = sum_{x,y} <K(x,y) f(y), g(x)> = g^H G f.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    InconsistencyError,
    NotHermitianError,
    NotPSDError,
    SchwartzViolation,
    ShapeMismatchError,
    ValidationError,
)
from .specalg import (
    HERMITIAN_TOL,
    abs_op,
    default_rank_tol,
    eig_hermitian,
    max_abs,
)

PSD_TOL = 1e-10


def _psd_tol(a: np.ndarray) -> float:
    return PSD_TOL * max(1.0, max_abs(a))


@dataclass(frozen=True, eq=False)
class FiniteKernel:
    labels: tuple[str, ...]
    h: int
    blocks: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if len(set(labels)) != len(labels):
            raise ValidationError("kernel labels must be distinct")
        blocks = np.asarray(self.blocks, dtype=complex)
        n = len(labels)
        if blocks.shape != (n, n, self.h, self.h):
            raise ShapeMismatchError(f"blocks have shape {blocks.shape}, expected {(n, n, self.h, self.h)}")
        if self.h < 1:
            raise ValidationError("h must be positive")
        blocks = blocks.copy()
        blocks.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_gram(cls, g, labels: Sequence[str] | None = None, h: int = 1) -> "FiniteKernel":
        g = np.asarray(g, dtype=complex)
        n = g.shape[0] // h
        if labels is None:
            labels = [f"x{i + 1}" for i in range(n)]
        blocks = g.reshape(n, h, n, h).transpose(0, 2, 1, 3)
        return cls(tuple(labels), h, blocks)

    @classmethod
    def identity(cls, labels: Sequence[str], h: int = 1) -> "FiniteKernel":
        return cls.from_gram(np.eye(len(labels) * h), labels, h)

    @classmethod
    def zeros(cls, labels: Sequence[str], h: int = 1) -> "FiniteKernel":
        n = len(labels)
        return cls(tuple(labels), h, np.zeros((n, n, h, h)))

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def __call__(self, x: str, y: str) -> np.ndarray:
        return self.blocks[self.index(x), self.index(y)]

    def gram_matrix(self) -> np.ndarray:
        n, h = self.n, self.h
        return self.blocks.transpose(0, 2, 1, 3).reshape(n * h, n * h)

    def adjoint(self) -> "FiniteKernel":
        """``K*(x, y) = K(y, x)^H``."""
        return FiniteKernel(self.labels, self.h, self.blocks.transpose(1, 0, 3, 2).conj())

    def hermitian_deviation(self) -> float:
        return max_abs(self.blocks - self.adjoint().blocks)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermitian_deviation() <= tol

    def require_hermitian(self, tol: float = HERMITIAN_TOL) -> "FiniteKernel":
        dev = self.hermitian_deviation()
        if dev > tol:
            raise NotHermitianError(f"kernel is not hermitian (deviation {dev:.3e})", dev)
        return self

    def __add__(self, other: "FiniteKernel") -> "FiniteKernel":
        check_compatible(self, other)
        return FiniteKernel(self.labels, self.h, self.blocks + other.blocks)

    def __sub__(self, other: "FiniteKernel") -> "FiniteKernel":
        check_compatible(self, other)
        return FiniteKernel(self.labels, self.h, self.blocks - other.blocks)

    def __neg__(self) -> "FiniteKernel":
        return FiniteKernel(self.labels, self.h, -self.blocks)

    def __mul__(self, c) -> "FiniteKernel":
        return FiniteKernel(self.labels, self.h, c * self.blocks)

    __rmul__ = __mul__


def check_compatible(a: FiniteKernel, b: FiniteKernel) -> None:
    if a.labels != b.labels or a.h != b.h:
        raise ShapeMismatchError(
            f"kernels differ in shape: labels {a.labels} / {b.labels}, h {a.h} / {b.h}"
        )


@dataclass(frozen=True)
class GramMatrix:
    matrix: np.ndarray
    labels: tuple[str, ...]
    h: int

    def block_slice(self, label: str) -> slice:
        i = self.labels.index(label)
        return slice(i * self.h, (i + 1) * self.h)

    def to_array(self, f: Mapping[str, Sequence[complex]]) -> np.ndarray:
        """Flatten a finitely supported coordinate vector ``label -> C^h``."""
        out = np.zeros(len(self.labels) * self.h, dtype=complex)
        for label, v in f.items():
            if label not in self.labels:
                raise ValidationError(f"label {label!r} not in kernel support")
            out[self.block_slice(label)] = v
        return out

    def form(self, f, g) -> complex:
        """``[f, g]_K = g^H G f``; ``f``, ``g`` may be dicts or flat arrays."""
        if isinstance(f, Mapping):
            f = self.to_array(f)
        if isinstance(g, Mapping):
            g = self.to_array(g)
        return complex(np.vdot(g, self.matrix @ f))


def gram(k: FiniteKernel) -> GramMatrix:
    return GramMatrix(k.gram_matrix(), k.labels, k.h)


def delta(k: FiniteKernel, label: str, xi) -> np.ndarray:
    """The element ``xi_x = delta_x xi`` as a flat coordinate array."""
    return gram(k).to_array({label: xi})


def leq(a: FiniteKernel, b: FiniteKernel, tol: float | None = None) -> bool:
    """``A <= B``: ``gram(B) - gram(A)`` is PSD."""
    check_compatible(a, b)
    a.require_hermitian()
    b.require_hermitian()
    d = b.gram_matrix() - a.gram_matrix()
    if tol is None:
        tol = _psd_tol(d)
    if d.size == 0:
        return True
    return bool(np.linalg.eigvalsh((d + d.conj().T) / 2)[0] >= -tol)


class SchwartzReport(NamedTuple):
    verdict: bool
    min_eig_upper: float  # of gram(L - K)
    min_eig_lower: float  # of gram(L + K)
    tol: float


def _min_eigpair(a: np.ndarray) -> tuple[float, np.ndarray]:
    if a.shape[0] == 0:
        return 0.0, np.zeros(0, dtype=complex)
    lam, q = np.linalg.eigh((a + a.conj().T) / 2)
    return float(lam[0]), q[:, 0]


def schwartz_check(k: FiniteKernel, l: FiniteKernel, tol: float | None = None) -> SchwartzReport:
    """Certify ``-L <= K <= L`` by the minimal eigenvalues of ``L -+ K``."""
    check_compatible(k, l)
    k.require_hermitian()
    l.require_hermitian()
    gk, gl = k.gram_matrix(), l.gram_matrix()
    if tol is None:
        tol = PSD_TOL * max(1.0, max_abs(gk), max_abs(gl))
    up, _ = _min_eigpair(gl - gk)
    lo, _ = _min_eigpair(gl + gk)
    return SchwartzReport(up >= -tol and lo >= -tol, up, lo, tol)


def schwartz_minimal(k: FiniteKernel) -> FiniteKernel:
    """The witness ``L`` with ``gram(L) = |gram(K)|``."""
    k.require_hermitian()
    if k.n == 0:
        return k
    return FiniteKernel.from_gram(abs_op(k.gram_matrix()), k.labels, k.h)


@dataclass(frozen=True)
class SchwartzWitness:
    """Gram operator ``A_L`` of ``K`` relative to the witness ``L``.

    ``H_L`` is modelled as ``C^r`` via the eigenpairs ``(W, D)`` of ``gram(L)``
    with eigenvalues above ``rank_tol``; a coordinate vector ``f`` has class
    ``D^{1/2} W^H f`` in it.
    """

    kernel: FiniteKernel
    witness: FiniteKernel
    A: np.ndarray
    W: np.ndarray
    D: np.ndarray
    rank_tol: float

    @property
    def r(self) -> int:
        return len(self.D)

    def embed(self, f) -> np.ndarray:
        """Class ``[f]`` of a coordinate vector in the ``C^r`` model of ``H_L``."""
        if isinstance(f, Mapping):
            f = gram(self.kernel).to_array(f)
        return np.sqrt(self.D) * (self.W.conj().T @ np.asarray(f, dtype=complex))

    def form_K(self, f, g) -> complex:
        """``[A_L f, g]_L`` evaluated in the model."""
        fe, ge = self.embed(f), self.embed(g)
        return complex(np.vdot(ge, self.A @ fe))

    def norm(self) -> float:
        return float(np.linalg.norm(self.A, 2)) if self.r else 0.0


def _schwartz_witness_vector(k: FiniteKernel, a: np.ndarray) -> dict[str, np.ndarray]:
    _, v = _min_eigpair(a)
    return {x: v[i * k.h:(i + 1) * k.h] for i, x in enumerate(k.labels)}


def gram_operator(
    k: FiniteKernel,
    l: FiniteKernel,
    rank_tol: float | None = None,
    check: bool = True,
) -> SchwartzWitness:
    """Build ``A_L = D^{-1/2} W^H G_K W D^{-1/2}`` with ``[f,g]_K = [A_L f, g]_L``.

    With ``check=False`` the Schwartz inequality is not enforced, only the
    null-space inclusion ``N_L ⊆ N_K`` needed for ``A_L`` to exist; this is
    what lets callers compare ``||A_L|| <= 1`` against :func:`schwartz_check`.
    """
    check_compatible(k, l)
    k.require_hermitian()
    l.require_hermitian()
    gk, gl = k.gram_matrix(), l.gram_matrix()
    if check:
        rep = schwartz_check(k, l)
        if not rep.verdict:
            side, lam, mat = (
                ("upper", rep.min_eig_upper, gl - gk)
                if rep.min_eig_upper < rep.min_eig_lower
                else ("lower", rep.min_eig_lower, gl + gk)
            )
            what = "K <= L" if side == "upper" else "-L <= K"
            raise SchwartzViolation(
                f"Schwartz condition fails on side {what}: min eigenvalue {lam:.3e}",
                side,
                lam,
                _schwartz_witness_vector(k, mat),
            )
    if k.n == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return SchwartzWitness(k, l, empty, empty, np.zeros(0), 0.0)
    dec = eig_hermitian(gl, rank_tol)
    keep = dec.eigenvalues > dec.rank_tol
    w, d = dec.eigenvectors[:, keep], dec.eigenvalues[keep]
    null = dec.eigenvectors[:, ~keep]
    if null.shape[1]:
        resid = max_abs(gk @ null)
        limit = gk.shape[0] * max_abs(gk) * 1e-9
        if resid > limit:
            raise InconsistencyError(
                f"null space of L is not contained in that of K (residual {resid:.3e} > {limit:.3e})",
                resid,
            )
    s = 1.0 / np.sqrt(d)
    a = (s[:, None] * (w.conj().T @ gk @ w)) * s[None, :]
    a = (a + a.conj().T) / 2
    return SchwartzWitness(k, l, a, w, d, dec.rank_tol)


@dataclass(frozen=True)
class InducedSpace:
    """``C^k`` with fundamental symmetry ``diag(J)`` and ``[Pi xi, Pi eta] = <A xi, eta>``."""

    Pi: np.ndarray
    J: np.ndarray
    rank_tol: float

    @property
    def k(self) -> int:
        return len(self.J)

    def form(self, u, v) -> complex:
        """Indefinite product ``[u, v] = v^H J u`` on the model space."""
        return complex(np.vdot(v, self.J * u))


def induced_space(a, rank_tol: float | None = None) -> InducedSpace:
    dec = eig_hermitian(a, rank_tol)
    lam, q = dec.nonzero()
    pi = np.sqrt(np.abs(lam))[:, None] * q.conj().T
    return InducedSpace(pi, np.sign(lam).astype(int), dec.rank_tol)


class GapReport(NamedTuple):
    epsilon: float
    side: str  # "both" | "plus" | "minus" | "none"


def spectral_gap(a: np.ndarray, rank_tol: float | None = None) -> GapReport:
    """Smallest ``|lambda|`` above ``rank_tol``; ``inf`` for the zero operator."""
    if a.shape[0] == 0:
        return GapReport(float("inf"), "both")
    dec = eig_hermitian(a, rank_tol)
    lam, _ = dec.nonzero()
    if lam.size == 0:
        return GapReport(float("inf"), "both")
    eps = float(np.min(np.abs(lam)))
    return GapReport(eps, "both" if eps > 0 else "none")


def uniqueness_gap(k: FiniteKernel, l: FiniteKernel, rank_tol: float | None = None) -> GapReport:
    """Gap ``epsilon`` with ``(-epsilon, 0) ∪ (0, epsilon)`` in the resolvent set of ``A_L``.

    In finite dimension both one-sided intervals are spectral gaps as soon as
    ``epsilon > 0``, so ``side`` is ``"both"``.
    """
    wit = gram_operator(k, l)
    return spectral_gap(wit.A, gap_rank_tol(wit.A) if rank_tol is None else rank_tol)


def gap_rank_tol(a: np.ndarray) -> float:
    """Zero threshold for eigenvalues of a Gram operator (entries are O(1))."""
    return max(default_rank_tol(a), 1e-12)


def require_positive(l: FiniteKernel) -> FiniteKernel:
    """Raise :class:`NotPSDError` unless ``l`` is a positive definite kernel."""
    l.require_hermitian()
    g = l.gram_matrix()
    lam, v = _min_eigpair(g)
    if lam < -_psd_tol(g):
        raise NotPSDError(f"kernel is not positive definite (eigenvalue {lam:.3e})", lam, v)
    return l
