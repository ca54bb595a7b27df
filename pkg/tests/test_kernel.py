import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randgen import hermitian_kernel, low_rank_kernel, psd_kernel

from kreinkernels.errors import InconsistencyError, NotPSDError, SchwartzViolation, ShapeMismatchError
from kreinkernels.kernel import (
    FiniteKernel,
    delta,
    gram,
    gram_operator,
    induced_space,
    leq,
    require_positive,
    schwartz_check,
    schwartz_minimal,
    spectral_gap,
    uniqueness_gap,
)

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_gram_placement():
    assert gram(FiniteKernel.from_gram([[2.0]])).matrix.tolist() == [[2.0]]
    k = FiniteKernel(("x1", "x2"), 1, np.zeros((2, 2, 1, 1)))
    blocks = k.blocks.copy()
    blocks[0, 1, 0, 0] = blocks[1, 0, 0, 0] = 1
    assert np.array_equal(gram(FiniteKernel(k.labels, 1, blocks)).matrix, SWAP)


def test_gram_form_matches_double_sum(rng):
    k = hermitian_kernel(rng, 3, 2)
    g = gram(k)
    f = {x: rng.normal(size=2) + 1j * rng.normal(size=2) for x in k.labels}
    h = {x: rng.normal(size=2) + 1j * rng.normal(size=2) for x in k.labels}
    direct = sum(np.vdot(h[y], k(y, x) @ f[x]) for x in k.labels for y in k.labels)
    assert g.form(f, h) == pytest.approx(direct, abs=1e-12)
    # delta vectors pick out single blocks
    xi, eta = np.array([1, 2j]), np.array([0.5, -1])
    assert g.form(delta(k, "x1", xi), delta(k, "x3", eta)) == pytest.approx(np.vdot(eta, k("x3", "x1") @ xi))


def test_kernel_validation():
    with pytest.raises(ShapeMismatchError):
        FiniteKernel(("a", "b"), 1, np.zeros((2, 2, 2, 2)))
    k = FiniteKernel.from_gram([[0, 1], [0, 0]])
    assert not k.is_hermitian() and k.hermitian_deviation() == 1
    assert k.adjoint()("x2", "x1")[0, 0] == 1
    assert k.blocks.flags.writeable is False


def test_leq_examples():
    i2 = FiniteKernel.identity(["a", "b"])
    assert leq(i2, i2)
    assert not leq(FiniteKernel.zeros(["a", "b"]), FiniteKernel.from_gram(SWAP, ["a", "b"]))
    assert leq(-i2, i2)


def test_schwartz_examples():
    z = FiniteKernel.zeros(["a", "b"])
    assert schwartz_check(z, z).verdict
    assert schwartz_check(FiniteKernel.from_gram(SWAP, ["a", "b"]), FiniteKernel.identity(["a", "b"])).verdict
    assert not schwartz_check(FiniteKernel.identity(["a", "b"]), z).verdict


def test_schwartz_minimal_examples(rng):
    p = psd_kernel(rng, 3, 1)
    np.testing.assert_allclose(schwartz_minimal(p).blocks, p.blocks, atol=1e-12)
    np.testing.assert_allclose(schwartz_minimal(FiniteKernel.from_gram(np.diag([1.0, -1]))).gram_matrix(), np.eye(2))
    np.testing.assert_allclose(schwartz_minimal(FiniteKernel.from_gram(SWAP)).gram_matrix(), np.eye(2), atol=1e-15)


def test_gram_operator_examples(rng):
    k = FiniteKernel.from_gram(np.diag([1.0, -1]))
    w = gram_operator(k, schwartz_minimal(k))
    np.testing.assert_allclose(w.A, np.diag([1, -1]))
    z = FiniteKernel.zeros(["a", "b"])
    assert not gram_operator(z, FiniteKernel.identity(["a", "b"])).A.any()
    p = psd_kernel(rng, 3, 1, rank=2)
    w = gram_operator(p, p)
    np.testing.assert_allclose(w.A, np.eye(w.r), atol=1e-10)
    assert w.r == 2


def test_gram_operator_violation_names_side():
    k = FiniteKernel.identity(["a", "b"])
    with pytest.raises(SchwartzViolation) as info:
        gram_operator(k, k * 0.5)
    assert info.value.side == "upper"
    with pytest.raises(SchwartzViolation) as info:
        gram_operator(-k, k * 0.5)
    assert info.value.side == "lower"


def test_gram_operator_null_space_inconsistency():
    k = FiniteKernel.from_gram(np.diag([1.0, 0.0]))
    l = FiniteKernel.from_gram(np.diag([0.0, 1.0]))
    with pytest.raises(InconsistencyError):
        gram_operator(k, l, check=False)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 2))
def test_gram_operator_represents_form(seed, n, h):
    rng = np.random.default_rng(seed)
    k = low_rank_kernel(rng, n, h, max(1, n * h - 1))
    l = schwartz_minimal(k) + psd_kernel(rng, n, h, rank=1)
    w = gram_operator(k, l)
    assert w.norm() <= 1 + 1e-10
    f, g = (rng.normal(size=n * h) + 1j * rng.normal(size=n * h) for _ in range(2))
    lhs = np.vdot(w.embed(g), w.A @ w.embed(f))
    assert lhs == pytest.approx(w.form_K(f, g), abs=1e-9 * max(1, abs(lhs)))


def test_induced_space_examples():
    s = induced_space(np.eye(2))
    np.testing.assert_allclose(s.Pi, np.eye(2))
    assert s.J.tolist() == [1, 1]
    s = induced_space(np.diag([4.0, -1]))
    np.testing.assert_allclose(s.Pi, np.diag([2, 1]))
    assert s.J.tolist() == [1, -1]
    assert induced_space(np.zeros((2, 2))).k == 0


def test_spectral_gap_examples():
    assert spectral_gap(np.diag([1.0, -1])) == (1.0, "both")
    assert spectral_gap(np.diag([1.0, 1e-15]), rank_tol=1e-12).epsilon == 1.0
    z = FiniteKernel.zeros(["a"])
    assert uniqueness_gap(z, FiniteKernel.identity(["a"])).epsilon == np.inf


def test_require_positive():
    with pytest.raises(NotPSDError):
        require_positive(FiniteKernel.from_gram(SWAP))
