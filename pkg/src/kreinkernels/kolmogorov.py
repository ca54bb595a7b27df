"""Kolmogorov decompositions ``K(x, y) = V(x)^H J V(y)`` of finite hermitian kernels.

The Krein space is modelled as ``C^k`` with a diagonal ``+-1`` fundamental
symmetry ``J``; ``V`` is stored as an ``(n, k, h)`` array indexed like the
kernel labels. Two constructions are provided and cross-checked:

* ``method="gram_operator"``: minimal Schwartz witness ``L = |K|``, Gram
  operator ``A_L`` and an induced space of ``A_L``; ``V(x) xi = Pi [xi_x]``.
* ``method="direct"``: spectral factorization of ``gram(K)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    InconsistencyError,
    InvarianceError,
    KreinKernelError,
    ValidationError,
)
from .kernel import (
    FiniteKernel,
    gram_operator,
    induced_space,
    require_positive,
    schwartz_minimal,
)
from .specalg import default_rank_tol, eig_hermitian, max_abs

KD_TOL = 1e-9


def sharp(t: np.ndarray, j_dom: np.ndarray, j_cod: np.ndarray | None = None) -> np.ndarray:
    """Krein adjoint ``T^# = J_dom T^H J_cod`` for diagonal symmetries given as vectors."""
    if j_cod is None:
        j_cod = j_dom
    return (np.asarray(j_dom)[:, None] * t.conj().T) * np.asarray(j_cod)[None, :]


@dataclass(frozen=True, eq=False)
class KolmogorovDecomposition:
    labels: tuple[str, ...]
    h: int
    V: np.ndarray = field(repr=False)  # (n, k, h)
    J: np.ndarray

    @property
    def k(self) -> int:
        return len(self.J)

    @property
    def n(self) -> int:
        return len(self.labels)

    def __call__(self, label: str) -> np.ndarray:
        return self.V[self.labels.index(label)]

    def stack(self) -> np.ndarray:
        """Horizontal stack ``[V(x_1) ... V(x_n)]`` of shape ``(k, n*h)``."""
        return self.V.transpose(1, 0, 2).reshape(self.k, self.n * self.h)

    def kernel_blocks(self) -> np.ndarray:
        jv = self.J[None, :, None] * self.V
        return np.einsum("xka,ykb->xyab", self.V.conj(), jv)

    def to_kernel(self) -> FiniteKernel:
        return FiniteKernel(self.labels, self.h, self.kernel_blocks())

    def rank(self, rank_tol: float | None = None) -> int:
        w = self.stack()
        if w.size == 0:
            return 0
        s = np.linalg.svd(w, compute_uv=False)
        if rank_tol is None:
            rank_tol = max(w.shape) * s[0] * 1e-12
        return int(np.sum(s > rank_tol))

    def is_minimal(self, rank_tol: float | None = None) -> bool:
        return self.rank(rank_tol) == self.k

    def signature(self) -> tuple[int, int]:
        return int(np.sum(self.J > 0)), int(np.sum(self.J < 0))

    def jordan_kernels(self) -> tuple[FiniteKernel, FiniteKernel]:
        """``K+- (x,y) = V(x)^H J+- V(y)``; their Gram matrices have orthogonal ranges."""
        out = []
        for mask in (self.J > 0, self.J < 0):
            v = self.V[:, mask, :]
            out.append(FiniteKernel(self.labels, self.h, np.einsum("xka,ykb->xyab", v.conj(), v)))
        return out[0], out[1]


def decompose(k: FiniteKernel, rank_tol: float | None = None, method: str = "gram_operator") -> KolmogorovDecomposition:
    """Minimal Kolmogorov decomposition of a hermitian kernel; ``k = rank gram(K)``."""
    k.require_hermitian()
    n, h = k.n, k.h
    if method == "direct":
        dec = eig_hermitian(k.gram_matrix(), rank_tol)
        lam, q = dec.nonzero()
        w = np.sqrt(np.abs(lam))[:, None] * q.conj().T
        j = np.sign(lam).astype(int)
    elif method == "gram_operator":
        l = schwartz_minimal(k)
        wit = gram_operator(k, l, rank_tol)
        ind = induced_space(wit.A, max(default_rank_tol(wit.A), 1e-12))
        # V(x) xi = Pi [xi_x], with [f] = D^{1/2} W^H f in the C^r model of H_L
        w = ind.Pi @ (np.sqrt(wit.D)[:, None] * wit.W.conj().T)
        j = ind.J
    else:
        raise ValueError(f"unknown method {method!r}")
    kk = len(j)
    if n == 0:
        w = np.zeros((0, 0), dtype=complex)
    v = np.asarray(w, dtype=complex).reshape(kk, n, h).transpose(1, 0, 2)
    return KolmogorovDecomposition(k.labels, h, np.ascontiguousarray(v), np.asarray(j, dtype=int))


class VerifyReport(NamedTuple):
    passed: bool
    max_residual: float
    tol: float
    minimal: bool


def verify(d: KolmogorovDecomposition, k: FiniteKernel, tol: float = KD_TOL) -> VerifyReport:
    """Check KD2 blockwise; ``passed`` requires the max residual ``<= tol``."""
    if d.labels != k.labels or d.h != k.h:
        raise ValidationError("decomposition and kernel have different labels or h")
    if k.n == 0:
        return VerifyReport(True, 0.0, tol, True)
    resid = max_abs(d.kernel_blocks() - k.blocks)
    return VerifyReport(bool(resid <= tol), resid, tol, d.is_minimal())


class EquivalenceResult(NamedTuple):
    success: bool
    Phi: np.ndarray
    residual: float
    unitarity_residual: float


def unitary_equivalence(d1: KolmogorovDecomposition, d2: KolmogorovDecomposition, tol: float = 1e-8) -> EquivalenceResult:
    """Find a ``(J1, J2)``-unitary ``Phi`` with ``V2(x) = Phi V1(x)`` for all ``x``."""
    if d1.labels != d2.labels or d1.h != d2.h:
        raise ValidationError("decompositions live over different label sets")
    for d in (d1, d2):
        if not d.is_minimal():
            raise KreinKernelError("unitary equivalence needs minimal decompositions (KD3)")
    w1, w2 = d1.stack(), d2.stack()
    if d1.k != d2.k:
        return EquivalenceResult(False, np.zeros((d2.k, d1.k), dtype=complex), np.inf, np.inf)
    if d1.k == 0:
        return EquivalenceResult(True, np.zeros((0, 0), dtype=complex), 0.0, 0.0)
    phi = w2 @ np.linalg.pinv(w1)
    resid = max_abs(phi @ w1 - w2)
    ph = sharp(phi, d1.J, d2.J)
    eye = np.eye(d1.k)
    unit = max(max_abs(ph @ phi - eye), max_abs(phi @ ph - eye))
    scale = max(1.0, max_abs(w2))
    return EquivalenceResult(bool(resid <= tol * scale and unit <= tol), phi, resid, unit)


def solve_intertwiner(d: KolmogorovDecomposition, pairs: Iterable[tuple[str, str]], tol: float = KD_TOL) -> np.ndarray:
    """Least-squares ``U`` with ``U V(x) = V(y)`` for every ``(x, y)`` in ``pairs``.

    ``U`` is zero on the orthogonal complement of ``span{V(x) H}``. Raises
    :class:`InconsistencyError` if the system has no solution.
    """
    pairs = list(pairs)
    if d.k == 0:
        return np.zeros((0, 0), dtype=complex)
    if not pairs:
        return np.zeros((d.k, d.k), dtype=complex)
    src = np.concatenate([d(x) for x, _ in pairs], axis=1)
    dst = np.concatenate([d(y) for _, y in pairs], axis=1)
    u = dst @ np.linalg.pinv(src, rcond=1e-12)
    resid = max_abs(u @ src - dst)
    if resid > tol * max(1.0, max_abs(dst)):
        raise InconsistencyError(f"intertwining system is inconsistent (residual {resid:.3e})", resid)
    return u


@dataclass(frozen=True)
class SemigroupAction:
    """Finitely generated action; ``maps[a][x] = phi(a, x)``, ``involution[a] = I(a)``.

    A word ``a_1 ... a_m`` acts by composition, ``phi(a_1 a_2, x) = phi(a_1, phi(a_2, x))``.
    """

    maps: Mapping[str, Mapping[str, str]]
    involution: Mapping[str, str]

    def __post_init__(self):
        names = set(self.maps)
        if set(self.involution) != names:
            raise ValidationError("involution must be given for exactly the generator names")
        for a, b in self.involution.items():
            if b not in names or self.involution[b] != a:
                raise ValidationError(f"involution is not an involution at {a!r}")

    @property
    def generators(self) -> list[str]:
        return list(self.maps)

    def validate(self, labels: Sequence[str]) -> None:
        lab = set(labels)
        for a, m in self.maps.items():
            if set(m) != lab:
                raise ValidationError(f"map of generator {a!r} is not total on the labels")
            bad = [y for y in m.values() if y not in lab]
            if bad:
                raise ValidationError(f"generator {a!r} maps outside the label set: {bad}")

    def act(self, word: Sequence[str], x: str) -> str:
        for a in reversed(list(word)):
            x = self.maps[a][x]
        return x

    @classmethod
    def trivial(cls, labels: Sequence[str], name: str = "e") -> "SemigroupAction":
        return cls({name: {x: x for x in labels}}, {name: name})


def invariance_residual(k: FiniteKernel, act: SemigroupAction) -> tuple[float, tuple[str, str, str] | None]:
    """Max of ``||K(x, phi(a,y)) - K(phi(I(a), x), y)||`` and its worst ``(a, x, y)``."""
    worst, where = 0.0, None
    for a in act.generators:
        ia = act.involution[a]
        for x in k.labels:
            for y in k.labels:
                r = max_abs(k(x, act.maps[a][y]) - k(act.maps[ia][x], y))
                if r > worst:
                    worst, where = r, (a, x, y)
    return worst, where


@dataclass(frozen=True)
class InvariantDecomposition:
    base: KolmogorovDecomposition
    U: dict

    def check(self, act: SemigroupAction) -> dict:
        """Residuals of ``U(a)V(x) = V(phi(a,x))`` and ``U(I(a)) = U(a)^#``."""
        d = self.base
        rel, adj = 0.0, 0.0
        for a in act.generators:
            u = self.U[a]
            for x in d.labels:
                rel = max(rel, max_abs(u @ d(x) - d(act.maps[a][x])))
            adj = max(adj, max_abs(self.U[act.involution[a]] - sharp(u, d.J)))
        return {"relation": rel, "adjoint": adj}


def check_invariance(k: FiniteKernel, act: SemigroupAction, tol: float = KD_TOL) -> None:
    act.validate(k.labels)
    resid, where = invariance_residual(k, act)
    if resid > tol * max(1.0, max_abs(k.blocks)):
        a, x, y = where
        raise InvarianceError(
            f"kernel is not invariant: K(x, phi(a, y)) != K(phi(I(a), x), y) at a={a!r}, x={x!r}, y={y!r} "
            f"(residual {resid:.3e})",
            a, x, y, resid,
        )


def invariant_decompose(k: FiniteKernel, act: SemigroupAction, rank_tol: float | None = None) -> InvariantDecomposition:
    """Kolmogorov decomposition with a representation ``U`` linearizing the action."""
    check_invariance(k, act)
    d = decompose(k, rank_tol)
    us = {a: solve_intertwiner(d, ((x, act.maps[a][x]) for x in d.labels)) for a in act.generators}
    return InvariantDecomposition(d, us)


def psi_bounded_check(l: FiniteKernel, act: SemigroupAction, rank_tol: float | None = None) -> dict[str, float]:
    """Seminorm bound of ``psi_a: xi_x -> xi_{phi(a,x)}`` w.r.t. ``[.,.]_L^{1/2}``.

    Computed as ``||D^{1/2} W^H P_a W D^{-1/2}||`` in the ``C^r`` model of
    ``H_L``, where ``P_a`` is the block permutation-like matrix of ``psi_a``.
    The operator is well defined on the quotient only when ``psi_a`` maps
    ``N_L`` into ``N_L``; otherwise the bound is ``inf``.
    """
    require_positive(l)
    act.validate(l.labels)
    g = l.gram_matrix()
    dec = eig_hermitian(g, rank_tol)
    keep = dec.eigenvalues > dec.rank_tol
    w, dd, null = dec.eigenvectors[:, keep], dec.eigenvalues[keep], dec.eigenvectors[:, ~keep]
    n, h = l.n, l.h
    out = {}
    for a in act.generators:
        p = np.zeros((n * h, n * h))
        for i, x in enumerate(l.labels):
            j = l.index(act.maps[a][x])
            p[j * h:(j + 1) * h, i * h:(i + 1) * h] = np.eye(h)
        if null.shape[1] and max_abs(g @ p @ null) > n * h * max_abs(g) * 1e-9:
            out[a] = float("inf")
            continue
        if not len(dd):
            out[a] = 0.0
            continue
        c = (np.sqrt(dd)[:, None] * (w.conj().T @ p @ w)) / np.sqrt(dd)[None, :]
        out[a] = float(np.linalg.norm(c, 2))
    return out


@dataclass(frozen=True)
class ReproducingSpace:
    """Functions ``g_{y,xi}(x) = K(x, y) xi`` with ``[g_{y,xi}, g_{y',xi'}] = <K(y', y) xi, xi'>``.

    Generators are indexed by ``(y, j)`` with ``xi = e_j``. ``coords`` holds
    ``Phi^{-1} g_{y, e_j} = V(y) e_j`` so transport through the Kolmogorov
    model is explicit.
    """

    kernel: FiniteKernel
    decomposition: KolmogorovDecomposition

    def generator_table(self, y: str, xi) -> np.ndarray:
        """Value table ``x -> K(x, y) xi`` as an ``(n, h)`` array."""
        return self.kernel.blocks[:, self.kernel.index(y)] @ np.asarray(xi, dtype=complex)

    def function_of(self, f: np.ndarray) -> np.ndarray:
        """``g_f(x) = V(x)^# f = V(x)^H J f`` for ``f`` in the model space."""
        d = self.decomposition
        return np.einsum("xka,k->xa", d.V.conj(), d.J * f)

    def inner(self, f1: np.ndarray, f2: np.ndarray) -> complex:
        """``[g_{f1}, g_{f2}]_R = [f1, f2]_K = f2^H J f1``."""
        return complex(np.vdot(f2, self.decomposition.J * f1))

    def generator_inner(self, y: str, xi, y2: str, xi2) -> complex:
        """Kernel-only form ``<K(y2, y) xi, xi2>``."""
        return complex(np.vdot(xi2, self.kernel(y2, y) @ np.asarray(xi, dtype=complex)))

    def generator_vector(self, y: str, xi) -> np.ndarray:
        return self.decomposition(y) @ np.asarray(xi, dtype=complex)


def to_reproducing(d: KolmogorovDecomposition, k: FiniteKernel, tol: float = KD_TOL) -> ReproducingSpace:
    rep = verify(d, k, tol)
    if not rep.passed:
        raise InconsistencyError(f"decomposition does not reproduce the kernel (residual {rep.max_residual:.3e})", rep.max_residual)
    return ReproducingSpace(k, d)


def reproducing_property_residual(r: ReproducingSpace) -> float:
    """Max over generators ``f = g_{y, e_b}`` and ``(x, e_a)`` of ``|<f(x), e_a> - [f, g_{x, e_a}]_R|``.

    Also compares the model inner product with the kernel-only formula.
    """
    k = r.kernel
    eye = np.eye(k.h)
    worst = 0.0
    for y in k.labels:
        for b in range(k.h):
            fy = r.generator_vector(y, eye[b])
            table = r.function_of(fy)
            worst = max(worst, max_abs(table - r.generator_table(y, eye[b])))
            for i, x in enumerate(k.labels):
                for a in range(k.h):
                    lhs = np.vdot(eye[a], table[i])
                    rhs = r.inner(fy, r.generator_vector(x, eye[a]))
                    worst = max(worst, abs(lhs - rhs), abs(rhs - r.generator_inner(y, eye[b], x, eye[a])))
    return worst


def reproducing_invariance_check(r: ReproducingSpace, inv: InvariantDecomposition, act: SemigroupAction) -> dict[str, float]:
    """Residual of ``(Ubar(a) f)(x) = f(phi(I(a), x))`` per generator, over generator functions.

    ``Ubar(a) g_f = g_{U(a) f}`` by transport through ``Phi``.
    """
    d = r.decomposition
    if d.k != inv.base.k or d.labels != inv.base.labels:
        raise ValidationError("invariant decomposition is not built over the same kernel model")
    eye = np.eye(d.h)
    out = {}
    for a in act.generators:
        ia = act.involution[a]
        perm = [d.labels.index(act.maps[ia][x]) for x in d.labels]
        worst = 0.0
        for y in d.labels:
            for b in range(d.h):
                f = r.generator_vector(y, eye[b])
                moved = r.function_of(inv.U[a] @ f)
                worst = max(worst, max_abs(moved - r.function_of(f)[perm]))
        out[a] = worst
    return out
