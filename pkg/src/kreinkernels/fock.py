"""Truncated symmetric Fock space, the Szego kernel and polynomial hermitian kernels.

Convention: ``<u, v> = sum_i u_i conj(v_i)``, so the Szego kernel is
``S(xi, eta) = 1 / (1 - <eta, xi>)`` and it is holomorphic in ``eta``.

The occupation-number coordinates of ``xi^{⊗n}`` are

    c_alpha(xi) = sqrt(|alpha|! / alpha!) * xi^alpha,        |alpha| = n,

and the same weights ``w_alpha = sqrt(|alpha|!/alpha!)`` make the scaled
monomials ``w_alpha eta^alpha`` an orthonormal basis of ``H^2``: in that basis
``a_xi = S(xi, .)`` has coordinates ``conj(c(xi))``.

A polynomial kernel ``K(xi, eta) = sum c_{alpha,beta} conj(xi^alpha) eta^beta``
is then ``c(xi)^H G c(eta)`` with ``G[alpha, beta] = c_{alpha,beta} / (w_alpha w_beta)``,
and the ``H^2`` operator with ``K(xi, eta) = <P a_xi, a_eta>`` is ``P = G^T``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from . import _accel
from .errors import DomainError, ValidationError
from .specalg import eig_hermitian, max_abs

MultiIndex = tuple[int, ...]


def multi_indices(d: int, degree: int) -> list[MultiIndex]:
    """Multi-indices of total degree exactly ``degree``, lexicographically descending."""
    out = [a for a in itertools.product(range(degree, -1, -1), repeat=d) if sum(a) == degree]
    return out


def weight(alpha: Sequence[int]) -> float:
    """``sqrt(|alpha|! / alpha!)``."""
    return math.sqrt(math.factorial(sum(alpha)) / math.prod(math.factorial(a) for a in alpha))


def _as_point(xi, d: int | None = None) -> np.ndarray:
    xi = np.atleast_1d(np.asarray(xi, dtype=complex))
    if xi.ndim != 1 or (d is not None and xi.shape[0] != d):
        raise DomainError(f"point has shape {xi.shape}, expected ({d},)")
    return xi


def _check_ball(xi: np.ndarray, radius: float = 1.0) -> None:
    if np.linalg.norm(xi) >= radius:
        raise DomainError(f"point of norm {np.linalg.norm(xi):.6g} is outside the open ball of radius {radius}")


def szego(xi, eta) -> complex:
    """``S(xi, eta) = 1 / (1 - <eta, xi>)`` on the open unit ball."""
    xi, eta = _as_point(xi), _as_point(eta)
    if xi.shape != eta.shape:
        raise DomainError("points have different dimensions")
    _check_ball(xi)
    _check_ball(eta)
    return 1.0 / (1.0 - np.vdot(xi, eta))


@dataclass(frozen=True)
class TruncatedFock:
    """Occupation-number model of ``⊕_{n <= M} (C^d)^{⊗n}_sym``."""

    d: int
    M: int

    def __post_init__(self):
        if self.d < 1 or self.M < 0:
            raise ValidationError("need d >= 1 and M >= 0")

    @cached_property
    def basis(self) -> list[MultiIndex]:
        return [a for n in range(self.M + 1) for a in multi_indices(self.d, n)]

    @cached_property
    def exponents(self) -> np.ndarray:
        return np.array(self.basis, dtype=np.int64).reshape(-1, self.d)

    @cached_property
    def degrees(self) -> np.ndarray:
        return self.exponents.sum(axis=1)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([weight(a) for a in self.basis])

    @cached_property
    def position(self) -> dict[MultiIndex, int]:
        return {a: i for i, a in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def degree_slice(self, n: int) -> np.ndarray:
        return np.flatnonzero(self.degrees == n)

    def coords(self, points) -> np.ndarray:
        """``c_alpha(xi)`` for a batch of points ``(m, d)``; no domain check."""
        pts = np.asarray(points, dtype=complex).reshape(-1, self.d)
        return _accel.monomials(pts, self.exponents) * self.weights[None, :]

    def embed(self, xi) -> np.ndarray:
        xi = _as_point(xi, self.d)
        _check_ball(xi)
        return self.coords(xi[None, :])[0]


def fock_embed(f: TruncatedFock, xi) -> np.ndarray:
    """Truncated ``V_S(xi) = ⊕_{n <= M} xi^{⊗n}`` in occupation coordinates."""
    return f.embed(xi)


def expected_dim(d: int, M: int) -> int:
    return sum(math.comb(n + d - 1, d - 1) for n in range(M + 1))


class SzegoTruncation(NamedTuple):
    value: complex
    exact: complex
    error: float
    error_bound: float
    within_bound: bool


def szego_truncation_check(f: TruncatedFock, xi, eta) -> SzegoTruncation:
    """Compare ``<V(eta), V(xi)>`` with ``S(xi, eta)``; tail bound ``r^{2(M+1)} / (1 - r^2)``."""
    exact = szego(xi, eta)
    value = complex(np.vdot(f.embed(xi), f.embed(eta)))
    r = max(np.linalg.norm(_as_point(xi)), np.linalg.norm(_as_point(eta)))
    bound = r ** (2 * (f.M + 1)) / (1 - r**2)
    err = abs(value - exact)
    # rounding slack of a few ulps on top of the analytic bound
    return SzegoTruncation(value, exact, err, bound, err <= bound + 1e-15 * max(1.0, abs(exact)))


class SymmetrizerReport(NamedTuple):
    passed: bool
    rank: int
    expected_rank: int
    idempotent_residual: float
    selfadjoint_residual: float
    model_residual: float


def _permutation_operator(perm: Sequence[int], d: int) -> np.ndarray:
    """``pi_hat(x_1 ⊗ ... ⊗ x_n) = x_{pi^-1(1)} ⊗ ... ⊗ x_{pi^-1(n)}`` on ``(C^d)^{⊗n}``."""
    n = len(perm)
    eye = np.eye(d**n).reshape((d,) * n + (d**n,))
    inv = np.argsort(perm)
    return np.moveaxis(eye, list(range(n)), list(inv)).reshape(d**n, d**n)


def _tensor_power(xi: np.ndarray, n: int) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for _ in range(n):
        out = np.kron(out, xi)
    return out


def symmetrizer_check(n: int, d: int, rng: np.random.Generator | None = None, max_dim: int = 4096, tol: float = 1e-12) -> SymmetrizerReport:
    """Build ``P_n = (n!)^{-1} sum pi_hat`` explicitly and compare with the occupation model.

    The model check maps each occupation basis vector ``e_alpha`` to its
    normalized symmetric tensor ``s_alpha`` and verifies ``<xi^{⊗n}, s_alpha> = c_alpha(xi)``
    and ``<P_n xi^{⊗n}, P_n eta^{⊗n}> = <xi, eta>^n`` at random points.
    """
    if d**n > max_dim:
        raise ValidationError(f"full tensor space of dimension {d**n} exceeds the size guard {max_dim}")
    if rng is None:
        rng = np.random.default_rng(0)
    perms = list(itertools.permutations(range(n)))
    p = sum(_permutation_operator(pm, d) for pm in perms) / math.factorial(n) if n else np.ones((1, 1))
    idem = max_abs(p @ p - p)
    sa = max_abs(p - p.conj().T)
    rank = int(round(np.trace(p).real))
    expected = math.comb(n + d - 1, d - 1)
    basis = multi_indices(d, n)
    sym = np.zeros((d**n, len(basis)))
    for col, alpha in enumerate(basis):
        letters = [i for i, a in enumerate(alpha) for _ in range(a)]
        for arrangement in set(itertools.permutations(letters)):
            sym[np.ravel_multi_index(arrangement, (d,) * n) if n else 0, col] += 1.0
        sym[:, col] /= np.linalg.norm(sym[:, col])
    model = max_abs(p @ sym - sym) if n else 0.0
    fock = TruncatedFock(d, n)
    sl = fock.degree_slice(n)
    for _ in range(5):
        xi = rng.normal(size=d) + 1j * rng.normal(size=d)
        eta = rng.normal(size=d) + 1j * rng.normal(size=d)
        txi, teta = p @ _tensor_power(xi, n), p @ _tensor_power(eta, n)
        cxi = fock.coords(xi[None, :])[0, sl]
        ceta = fock.coords(eta[None, :])[0, sl]
        scale = max(1.0, np.linalg.norm(xi) ** n * np.linalg.norm(eta) ** n)
        model = max(
            model,
            max_abs(sym.T @ _tensor_power(xi, n) - cxi) / max(1.0, np.linalg.norm(xi) ** n),
            abs(np.vdot(teta, txi) - np.vdot(eta, xi) ** n) / scale,
            abs(np.vdot(ceta, cxi) - np.vdot(eta, xi) ** n) / scale,
        )
    ok = idem <= tol and sa <= tol and rank == expected and model <= tol
    return SymmetrizerReport(ok, rank, expected, idem, sa, model)


class TotalityReport(NamedTuple):
    passed: bool
    residual: float


def totality_derivative_check(f: TruncatedFock, xi, n: int) -> TotalityReport:
    """``d^n/dt^n V(t xi)|_{t=0} = n! xi^{⊗n}``, by exact polynomial arithmetic in ``t``.

    Each coordinate of ``V(t xi)`` is built as a polynomial in ``t`` by
    multiplying the linear factors ``xi_i t``, then differentiated ``n`` times.
    """
    if not 0 <= n <= f.M:
        raise ValidationError(f"derivative order {n} outside 0..{f.M}")
    xi = _as_point(xi, f.d)
    P = np.polynomial.Polynomial
    deriv = np.zeros(f.dim, dtype=complex)
    for idx, alpha in enumerate(f.basis):
        poly = P([f.weights[idx]])
        for i, a in enumerate(alpha):
            for _ in range(a):
                poly = poly * P([0.0, xi[i]])
        deriv[idx] = poly.deriv(n)(0.0) if n else poly(0.0)
    target = np.zeros(f.dim, dtype=complex)
    sl = f.degree_slice(n)
    target[sl] = math.factorial(n) * f.coords(xi[None, :])[0, sl]
    resid = max_abs(deriv - target)
    return TotalityReport(resid <= 1e-12 * max(1.0, max_abs(target)), resid)


@dataclass(frozen=True, eq=False)
class PolynomialKernel:
    """``K(xi, eta) = sum c[(alpha, beta)] conj(xi^alpha) eta^beta`` (finite support)."""

    d: int
    coeffs: Mapping[tuple[MultiIndex, MultiIndex], complex] = field(repr=False)

    def __post_init__(self):
        clean = {}
        for (a, b), v in self.coeffs.items():
            a, b = tuple(int(i) for i in a), tuple(int(i) for i in b)
            if len(a) != self.d or len(b) != self.d or min(a + b, default=0) < 0:
                raise ValidationError(f"bad multi-index pair {a}, {b} for d={self.d}")
            v = complex(v)
            if v != 0:
                clean[(a, b)] = clean.get((a, b), 0) + v
        object.__setattr__(self, "coeffs", clean)

    @property
    def degree(self) -> int:
        """Largest ``max(|alpha|, |beta|)`` over the support."""
        return max((max(sum(a), sum(b)) for a, b in self.coeffs), default=0)

    def __call__(self, xi, eta) -> complex:
        xi, eta = _as_point(xi, self.d), _as_point(eta, self.d)
        return complex(sum(v * np.conj(np.prod(xi ** np.array(a))) * np.prod(eta ** np.array(b)) for (a, b), v in self.coeffs.items()))

    def adjoint(self) -> "PolynomialKernel":
        """``K^*(xi, eta) = conj(K(eta, xi))``: coefficient ``conj(c[(beta, alpha)])``."""
        return PolynomialKernel(self.d, {(b, a): np.conj(v) for (a, b), v in self.coeffs.items()})

    def hermitian_deviation(self) -> float:
        adj = self.adjoint().coeffs
        keys = set(self.coeffs) | set(adj)
        return max((abs(self.coeffs.get(k, 0) - adj.get(k, 0)) for k in keys), default=0.0)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return self.hermitian_deviation() <= tol

    def __add__(self, other: "PolynomialKernel") -> "PolynomialKernel":
        out = dict(self.coeffs)
        for key, v in other.coeffs.items():
            out[key] = out.get(key, 0) + v
        return PolynomialKernel(self.d, out)

    def scale(self, c) -> "PolynomialKernel":
        return PolynomialKernel(self.d, {key: c * v for key, v in self.coeffs.items()})

    def real_part(self) -> "PolynomialKernel":
        return (self + self.adjoint()).scale(0.5)

    def imag_part(self) -> "PolynomialKernel":
        return (self + self.adjoint().scale(-1)).scale(1 / 2j)

    def rescale(self, t: float) -> "PolynomialKernel":
        """``K_t(xi, eta) = K(t xi, t eta)``: coefficients times ``t^{|alpha| + |beta|}``."""
        return PolynomialKernel(self.d, {(a, b): v * t ** (sum(a) + sum(b)) for (a, b), v in self.coeffs.items()})

    def holomorphic_part(self, xi, eta) -> complex:
        """``f(xi, eta) = K(xi^*, eta) = sum c xi^alpha eta^beta``."""
        xi, eta = _as_point(xi, self.d), _as_point(eta, self.d)
        return complex(sum(v * np.prod(xi ** np.array(a)) * np.prod(eta ** np.array(b)) for (a, b), v in self.coeffs.items()))

    @classmethod
    def szego_partial(cls, d: int, M: int, start: int = 0) -> "PolynomialKernel":
        """``sum_{start <= n <= M} <eta, xi>^n``, i.e. ``c[(alpha, alpha)] = |alpha|!/alpha!``."""
        return cls(d, {(a, a): weight(a) ** 2 for n in range(start, M + 1) for a in multi_indices(d, n)})


def homogeneous_parts(k: PolynomialKernel) -> dict[int, dict]:
    """Group the support by ``m = |alpha| + |beta|``; ``sum_m p_m`` reassembles ``K``."""
    parts: dict[int, dict] = {}
    for (a, b), v in sorted(k.coeffs.items()):
        parts.setdefault(sum(a) + sum(b), {})[(a, b)] = v
    return dict(sorted(parts.items()))


def _unit_sphere_samples(d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(count, d)) + 1j * rng.normal(size=(count, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


class CauchyReport(NamedTuple):
    sampled: bool
    C: float
    rho: float
    sampled_sup: float
    part_norms: dict
    violations: list
    summed_norm_sq: float
    summed_bound: float
    summed_ok: bool


def cauchy_bound_check(k: PolynomialKernel, C: float, rho: float, samples: int = 400, seed: int = 0) -> CauchyReport:
    """Sampled check of ``||p_m|| <= C / rho^m`` and ``sum ||p_m||^2 <= C^2 / (1 - rho^-2)``.

    ``||p_m||`` is the max of ``|p_m(xi, eta)|`` over sampled pairs on the
    product of unit spheres (a lower estimate of the sup norm), and
    ``sampled_sup`` estimates ``sup |K|`` on the bidisc of radius ``rho`` from
    the same directions. Everything here is a sampled bound, not a proof.
    """
    rng = np.random.default_rng(seed)
    xs = _unit_sphere_samples(k.d, samples, rng)
    ys = _unit_sphere_samples(k.d, samples, rng)
    parts = homogeneous_parts(k)
    norms = {}
    for m, part in parts.items():
        pk = PolynomialKernel(k.d, part)
        norms[m] = max(abs(pk.holomorphic_part(x, y)) for x, y in zip(xs, ys))
    radii = rho * rng.uniform(0.0, 1.0, size=(samples, 2)) ** (1.0 / (2 * k.d))
    sup = max((abs(k.holomorphic_part(r1 * x, r2 * y)) for (r1, r2), x, y in zip(radii, xs, ys)), default=0.0)
    slack = 1e-12 * max(1.0, C)
    violations = [(m, v, C / rho**m) for m, v in norms.items() if v > C / rho**m + slack]
    total = float(sum(v * v for v in norms.values()))
    bound = C * C / (1.0 - rho**-2) if rho > 1 else float("inf")
    return CauchyReport(True, C, rho, float(sup), norms, violations, total, bound, total <= bound + slack)


@dataclass(frozen=True, eq=False)
class H2Model:
    """Operator ``P`` on the truncated ``H^2`` with ``K(xi, eta) = <P a_xi, a_eta>``."""

    fock: TruncatedFock
    P: np.ndarray = field(repr=False)

    @property
    def gram(self) -> np.ndarray:
        """``G = P^T`` so that ``K(xi, eta) = c(xi)^H G c(eta)``."""
        return self.P.T

    def a(self, xi) -> np.ndarray:
        """Coordinates of ``a_xi = S(xi, .)`` truncated to degree ``M``."""
        return np.conj(self.fock.embed(xi))

    def reproduce(self, xi, eta) -> complex:
        return complex(np.vdot(self.a(eta), self.P @ self.a(xi)))


def assemble_P(k: PolynomialKernel, M: int | None = None) -> H2Model:
    if not k.is_hermitian():
        raise ValidationError(f"kernel is not hermitian (coefficient deviation {k.hermitian_deviation():.3e})")
    if M is None:
        M = k.degree
    if k.degree > M:
        raise ValidationError(f"kernel has degree {k.degree} > truncation M={M}")
    f = TruncatedFock(k.d, M)
    g = np.zeros((f.dim, f.dim), dtype=complex)
    for (a, b), v in k.coeffs.items():
        i, j = f.position[a], f.position[b]
        g[i, j] = v / (f.weights[i] * f.weights[j])
    g = (g + g.conj().T) / 2
    return H2Model(f, g.T)


def check_reproducing(model: H2Model, k: PolynomialKernel, points: Sequence) -> float:
    """Max ``|<P a_xi, a_eta> - K(xi, eta)|`` over all pairs of ``points``."""
    return max((abs(model.reproduce(x, y) - k(x, y)) for x in points for y in points), default=0.0)


@dataclass(frozen=True, eq=False)
class HolomorphicDecomposition:
    """``V(xi) = sum_alpha coeffs[:, alpha] xi^alpha`` (polynomial, hence holomorphic)."""

    fock: TruncatedFock
    coeffs: np.ndarray = field(repr=False)  # (k, dim): monomial coefficients
    J: np.ndarray

    @property
    def k(self) -> int:
        return self.coeffs.shape[0]

    @property
    def table(self) -> dict[MultiIndex, np.ndarray]:
        return {a: self.coeffs[:, i] for i, a in enumerate(self.fock.basis)}

    def __call__(self, xi) -> np.ndarray:
        xi = _as_point(xi, self.fock.d)
        return self.coeffs @ _accel.monomials(xi[None, :], self.fock.exponents)[0]

    def kernel(self, xi, eta) -> complex:
        return complex(np.vdot(self(xi), self.J * self(eta)))


def _decompose_hermitian_matrix(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dec = eig_hermitian(g, max(1e-12, g.shape[0] * max_abs(g) * 1e-12))
    lam, q = dec.nonzero()
    return np.sqrt(np.abs(lam))[:, None] * q.conj().T, np.sign(lam).astype(int)


def holomorphic_linearize(k: PolynomialKernel, M: int | None = None) -> HolomorphicDecomposition:
    """Kolmogorov decomposition with polynomial ``V``, from the Jordan split of ``P``."""
    model = assemble_P(k, M)
    factor, j = _decompose_hermitian_matrix(model.gram)
    coeffs = factor * model.fock.weights[None, :]
    return HolomorphicDecomposition(model.fock, coeffs, j)


@dataclass(frozen=True, eq=False)
class HolomorphicDilation:
    """``K(xi, eta) = V(xi)^H U V(eta)`` with ``||U|| <= 1`` and polynomial ``V``."""

    fock: TruncatedFock
    coeffs: np.ndarray = field(repr=False)
    U: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return self.U.shape[0]

    def __call__(self, xi) -> np.ndarray:
        xi = _as_point(xi, self.fock.d)
        return self.coeffs @ _accel.monomials(xi[None, :], self.fock.exponents)[0]

    def kernel(self, xi, eta) -> complex:
        return complex(np.vdot(self(xi), self.U @ self(eta)))

    def norm(self) -> float:
        return float(np.linalg.norm(self.U, 2)) if self.k else 0.0


def holomorphic_contraction_dilate(k: PolynomialKernel, M: int | None = None) -> HolomorphicDilation:
    """Contractive holomorphic dilation of a (possibly non-hermitian) polynomial kernel."""
    from .dilation import stack_and_compress

    if M is None:
        M = k.degree
    d1 = holomorphic_linearize(k.real_part(), M)
    d2 = holomorphic_linearize(k.imag_part(), M)
    w, u = stack_and_compress(d1.coeffs, d1.J, d2.coeffs, d2.J)
    return HolomorphicDilation(d1.fock, w, u)


def ball_grid(d: int, radius: float, per_axis: int = 5, rng: np.random.Generator | None = None) -> list[np.ndarray]:
    """Sample points inside the ball of ``radius``: a ``per_axis`` radial grid over fixed directions."""
    if rng is None:
        rng = np.random.default_rng(0)
    dirs = _unit_sphere_samples(d, per_axis, rng)
    radii = np.linspace(0.0, radius, per_axis + 1)[1:] * (1 - 1e-9)
    radii[0] = 0.0
    return [r * u for r in radii for u in dirs]
