"""Hankel kernels on the free semigroup and the truncated moment problem.

Words over generators ``g_1 .. g_N`` are tuples of letters in ``1..N``; the
empty tuple is the unit. Everything is truncated: kernel labels are the words
of length ``<= d`` and moments are needed up to length ``2d``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from . import _accel
from .errors import DomainError, InconsistencyError, ValidationError
from .kernel import (
    FiniteKernel,
    GapReport,
    SchwartzReport,
    schwartz_check,
    schwartz_minimal,
    uniqueness_gap,
)
from .kolmogorov import KD_TOL, KolmogorovDecomposition, decompose, sharp
from .specalg import max_abs, range_basis

Word = tuple[int, ...]


def involution(w: Sequence[int]) -> Word:
    """``I(g_1 ... g_k) = g_k ... g_1``."""
    return tuple(reversed(tuple(w)))


def word_label(w: Sequence[int]) -> str:
    return "e" if len(w) == 0 else "".join(f"g{i}" for i in w)


def parse_word_label(label: str) -> Word:
    if label == "e":
        return ()
    parts = label.split("g")
    if parts[0] != "" or any(not p.isdigit() for p in parts[1:]):
        raise ValidationError(f"not a word label: {label!r}")
    return tuple(int(p) for p in parts[1:])


def iter_words(n_gen: int, d: int) -> Iterator[Word]:
    for length in range(d + 1):
        yield from itertools.product(range(1, n_gen + 1), repeat=length)


def enumerate_words(n_gen: int, d: int) -> list[Word]:
    """All words of length ``<= d``, by length then lexicographically."""
    if n_gen < 1 or d < 0:
        raise ValidationError("need N >= 1 and d >= 0")
    return list(iter_words(n_gen, d))


def word_count(n_gen: int, d: int) -> int:
    return d + 1 if n_gen == 1 else (n_gen ** (d + 1) - 1) // (n_gen - 1)


@dataclass(frozen=True, eq=False)
class MomentSequence:
    """Moments ``s_w`` for all words of length ``<= 2d``, hermitian under reversal."""

    N: int
    d: int
    values: Mapping[Word, complex] = field(repr=False)
    tol: float = 1e-10

    def __post_init__(self):
        if self.N < 1 or self.d < 0:
            raise ValidationError("need N >= 1 and d >= 0")
        vals = {tuple(int(i) for i in w): complex(v) for w, v in self.values.items()}
        for w in vals:
            if len(w) > 2 * self.d or any(not 1 <= i <= self.N for i in w):
                raise ValidationError(f"moment word {list(w)} outside the truncation (N={self.N}, 2d={2 * self.d})")
        for w in iter_words(self.N, 2 * self.d):
            if w not in vals:
                raise ValidationError(f"missing moment for word {list(w)}")
            dev = abs(vals[involution(w)] - np.conj(vals[w]))
            if dev > self.tol:
                raise ValidationError(
                    f"moments are not hermitian: s_{list(involution(w))} != conj(s_{list(w)}) (deviation {dev:.3e})"
                )
        object.__setattr__(self, "values", vals)

    def __getitem__(self, w: Sequence[int]) -> complex:
        return self.values[tuple(w)]

    def dense(self) -> np.ndarray:
        """Values in length-then-lex order, indexable by ``_accel.word_code``."""
        return np.array([self.values[w] for w in iter_words(self.N, 2 * self.d)], dtype=complex)

    @classmethod
    def from_function(cls, n_gen: int, d: int, fn) -> "MomentSequence":
        return cls(n_gen, d, {w: fn(w) for w in iter_words(n_gen, 2 * d)})

    @classmethod
    def from_representation(cls, mats: Sequence[np.ndarray], v: np.ndarray, d: int, J: np.ndarray | None = None) -> "MomentSequence":
        """``s_w = [W(w) v, v]_J`` with ``W(g_{j1} ... g_{jl}) = W_{j1} ... W_{jl}``."""
        mats = [np.asarray(m, dtype=complex) for m in mats]
        v = np.asarray(v, dtype=complex)
        jv = v if J is None else np.asarray(J) * v
        cache: dict[Word, np.ndarray] = {(): v}
        for w in iter_words(len(mats), 2 * d):
            if w:
                cache[w] = mats[w[0] - 1] @ cache[w[1:]]
        return cls(len(mats), d, {w: complex(np.vdot(jv, u)) for w, u in cache.items()})

    @classmethod
    def classical(cls, moments: Sequence[complex], d: int) -> "MomentSequence":
        """``N = 1`` sequence ``s_m = moments[m]`` for ``m <= 2d``."""
        if len(moments) < 2 * d + 1:
            raise ValidationError(f"need {2 * d + 1} moments for d={d}")
        return cls(1, d, {(1,) * m: moments[m] for m in range(2 * d + 1)})


def hankel_kernel(sigma: MomentSequence) -> FiniteKernel:
    """``K(s, t) = s_{I(s) t}`` on words of length ``<= d`` (scalar valued)."""
    words = enumerate_words(sigma.N, sigma.d)
    letters = np.zeros((len(words), max(sigma.d, 1)), dtype=np.int64)
    lengths = np.array([len(w) for w in words], dtype=np.int64)
    for i, w in enumerate(words):
        letters[i, : len(w)] = w
    g = _accel.hankel_fill(letters, lengths, sigma.dense(), sigma.N)
    return FiniteKernel.from_gram(g, [word_label(w) for w in words], 1)


class HankelReport(NamedTuple):
    passed: bool
    checked: int
    violations: list


def verify_hankel(k: FiniteKernel, n_gen: int, depth: int | None = None, tol: float = 0.0) -> HankelReport:
    """Check ``K(s, b t) = K(I(b) s, t)`` for every triple whose words stay in the labels."""
    words = [parse_word_label(x) for x in k.labels]
    if depth is None:
        depth = max((len(w) for w in words), default=0)
    index = {w: i for i, w in enumerate(words)}
    g = k.gram_matrix()
    checked, bad = 0, []
    for beta in iter_words(n_gen, depth):
        rb = involution(beta)
        for s in words:
            left_row = index.get(rb + s)
            if left_row is None:
                continue
            for t in words:
                col = index.get(beta + t)
                if col is None:
                    continue
                checked += 1
                dev = abs(g[index[s], col] - g[left_row, index[t]])
                if dev > tol:
                    bad.append((beta, s, t, float(dev)))
    return HankelReport(not bad, checked, bad)


class FeasibilityReport(NamedTuple):
    feasible: bool
    truncated: bool
    witness: FiniteKernel
    certificate: SchwartzReport


def hamburger_feasible(sigma: MomentSequence) -> FeasibilityReport:
    """Truncated feasibility: ``L = |K_Sigma|`` always certifies ``-L <= K <= L``.

    Only the truncated Hankel block is examined, hence ``truncated=True``.
    Invalid (non-hermitian) input never reaches here: it is rejected when the
    :class:`MomentSequence` is built.
    """
    k = hankel_kernel(sigma)
    l = schwartz_minimal(k)
    cert = schwartz_check(k, l)
    return FeasibilityReport(cert.verdict, True, l, cert)


@dataclass(frozen=True, eq=False)
class TruncatedGNS:
    decomposition: KolmogorovDecomposition
    omega: np.ndarray
    pi: dict  # generator index -> (k, k) matrix
    N: int
    depth: int

    @property
    def k(self) -> int:
        return self.decomposition.k

    def vector(self, w: Sequence[int]) -> np.ndarray:
        return self.decomposition(word_label(w))[:, 0]

    def apply(self, w: Sequence[int], u: np.ndarray) -> np.ndarray:
        """``pi(Y_w) u = pi(Y_{j1}) ... pi(Y_{jl}) u``."""
        for letter in reversed(tuple(w)):
            u = self.pi[letter] @ u
        return u

    def form(self, u: np.ndarray, v: np.ndarray) -> complex:
        return complex(np.vdot(v, self.decomposition.J * u))

    def shift_residual(self) -> float:
        """Max of ``||pi(Y_k) V(t) - V(g_k t)||`` over ``|t| <= d - 1``."""
        worst = 0.0
        for w in iter_words(self.N, self.depth - 1):
            for g in range(1, self.N + 1):
                worst = max(worst, max_abs(self.pi[g] @ self.vector(w) - self.vector((g,) + w)))
        return worst

    def adjoint_residual(self) -> float:
        """Max of ``[pi u, v] - [u, pi v]`` over the domain ``span{V(t): |t| <= d - 1}``."""
        if self.depth < 1 or self.k == 0:
            return 0.0
        dom = np.stack([self.vector(w) for w in iter_words(self.N, self.depth - 1)], axis=1)
        jd = self.decomposition.J
        worst = 0.0
        for g, p in self.pi.items():
            diff = sharp(p, jd) - p
            worst = max(worst, max_abs(dom.conj().T @ (jd[:, None] * diff) @ dom))
        return worst


def _compressed_shift(d: KolmogorovDecomposition, src: np.ndarray, dst: np.ndarray, tol: float) -> np.ndarray:
    """J-selfadjoint ``C`` with ``C src = dst``, zero on ``range(src)^perp``.

    Writing ``H = J C`` (hermitian) in the basis ``[Q, Q_perp]`` with ``Q``
    an orthonormal basis of ``range(src)``, the blocks touching ``Q`` are
    forced by ``H src = J dst`` and the ``Q_perp`` block is set to zero.
    """
    k = d.k
    jd = d.J
    q = range_basis(src)
    if q.shape[1] == 0:
        return np.zeros((k, k), dtype=complex)
    coeff = q.conj().T @ src
    hq = (jd[:, None] * dst) @ np.linalg.pinv(coeff, rcond=1e-12)
    full = np.linalg.svd(q, full_matrices=True)[0] if q.shape[1] < k else q
    q_perp = full[:, q.shape[1]:] if q.shape[1] < k else np.zeros((k, 0), dtype=complex)
    x = q.conj().T @ hq
    y_h = q_perp.conj().T @ hq
    herm_dev = max_abs(x - x.conj().T)
    h = q @ ((x + x.conj().T) / 2) @ q.conj().T + q_perp @ y_h @ q.conj().T + q @ y_h.conj().T @ q_perp.conj().T
    c = jd[:, None] * h
    resid = max_abs(c @ src - dst)
    scale = max(1.0, max_abs(dst))
    if resid > tol * scale or herm_dev > tol * scale:
        raise InconsistencyError(
            f"shift system has no J-selfadjoint solution (residual {resid:.3e}, asymmetry {herm_dev:.3e})",
            max(resid, herm_dev),
        )
    return c


def gns_build(sigma: MomentSequence, rank_tol: float | None = None, tol: float = KD_TOL) -> TruncatedGNS:
    """Truncated GNS data ``(pi, K, Omega)`` from a Kolmogorov decomposition of ``K_Sigma``."""
    k = hankel_kernel(sigma)
    d = decompose(k, rank_tol)
    omega = d(word_label(()))[:, 0]
    pi = {}
    dom_words = list(iter_words(sigma.N, sigma.d - 1)) if sigma.d >= 1 else []
    for g in range(1, sigma.N + 1):
        if d.k == 0 or not dom_words:
            pi[g] = np.zeros((d.k, d.k), dtype=complex)
            continue
        src = np.stack([d(word_label(w))[:, 0] for w in dom_words], axis=1)
        dst = np.stack([d(word_label((g,) + w))[:, 0] for w in dom_words], axis=1)
        pi[g] = _compressed_shift(d, src, dst, tol)
    return TruncatedGNS(d, omega, pi, sigma.N, sigma.d)


def moment_recover(gns: TruncatedGNS, w: Sequence[int]) -> complex:
    """``[pi(Y_w) Omega, Omega]_K``; equals ``s_w`` for ``|w| <= d``."""
    w = tuple(w)
    if len(w) > gns.depth:
        raise DomainError(f"word of length {len(w)} exceeds the GNS domain depth {gns.depth}")
    if any(not 1 <= i <= gns.N for i in w):
        raise DomainError(f"word {list(w)} uses letters outside 1..{gns.N}")
    return gns.form(gns.apply(w, gns.omega), gns.omega)


def uniqueness_certificate(sigma: MomentSequence, l: FiniteKernel | None = None, rank_tol: float | None = None) -> GapReport:
    k = hankel_kernel(sigma)
    if l is None:
        l = schwartz_minimal(k)
    return uniqueness_gap(k, l, rank_tol)


def shift_action_pairs(n_gen: int, d: int, g: int) -> list[tuple[str, str]]:
    """Label pairs ``(t, g t)`` with ``|t| <= d - 1``: the truncated left shift by ``g``."""
    return [(word_label(w), word_label((g,) + w)) for w in iter_words(n_gen, d - 1)] if d >= 1 else []
