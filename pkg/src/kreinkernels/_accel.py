"""Loop kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports and ``KREINKERNELS_DISABLE_NUMBA``
is unset (or ``0``). Both implementations stay importable as
``*_numpy`` / ``*_numba`` so tests and the benchmark can compare them.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

DISABLED = os.environ.get("KREINKERNELS_DISABLE_NUMBA", "0") not in ("", "0")
HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not DISABLED


def monomials_numpy(points: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """``out[m, p] = prod_i points[m, i] ** exponents[p, i]``."""
    points = np.asarray(points, dtype=np.complex128)
    exponents = np.asarray(exponents, dtype=np.int64)
    if exponents.shape[0] == 0:
        return np.ones((points.shape[0], 0), dtype=np.complex128)
    # integer powers by repeated products; agrees with the numba loop to roundoff
    out = np.ones((points.shape[0], exponents.shape[0]), dtype=np.complex128)
    for i in range(exponents.shape[1]):
        top = int(exponents[:, i].max()) if exponents.size else 0
        powers = np.ones((points.shape[0], top + 1), dtype=np.complex128)
        for e in range(1, top + 1):
            powers[:, e] = powers[:, e - 1] * points[:, i]
        out *= powers[:, exponents[:, i]]
    return out


def hankel_fill_numpy(letters: np.ndarray, lengths: np.ndarray, values: np.ndarray, n_gen: int) -> np.ndarray:
    """``K[i, j] = values[code(reverse(w_i) + w_j)]`` for padded words ``w``.

    ``code`` is the position of a word in the length-then-lexicographic
    enumeration of all words over ``n_gen`` letters.
    """
    letters = np.asarray(letters, dtype=np.int64)
    lengths = np.asarray(lengths, dtype=np.int64)
    total = lengths[:, None] + lengths[None, :]
    if n_gen == 1:
        return np.asarray(values)[total]
    width = letters.shape[1]
    pos = np.arange(width)
    mask = pos[None, :] < lengths[:, None]
    digits = np.where(mask, letters - 1, 0)
    # rank of w: sum digit_t * N^(len-1-t); rank of reversed w: sum digit_t * N^t
    fwd_pow = np.where(mask, n_gen ** np.clip(lengths[:, None] - 1 - pos[None, :], 0, None), 0)
    rev_pow = np.where(mask, n_gen ** pos[None, :], 0)
    rank = (digits * fwd_pow).sum(axis=1)
    rank_rev = (digits * rev_pow).sum(axis=1)
    code = (n_gen**total - 1) // (n_gen - 1) + rank_rev[:, None] * n_gen ** lengths[None, :] + rank[None, :]
    return np.asarray(values)[code]


def word_code(word, n_gen: int) -> int:
    """Index of ``word`` (letters in ``1..n_gen``) in length-then-lex order."""
    length = len(word)
    if n_gen == 1:
        return length
    rank = 0
    for letter in word:
        rank = rank * n_gen + int(letter) - 1
    return (n_gen**length - 1) // (n_gen - 1) + rank


if HAVE_NUMBA:

    @numba.njit(cache=True)
    def monomials_numba(points, exponents):
        m, d = points.shape
        p = exponents.shape[0]
        out = np.ones((m, p), dtype=np.complex128)
        for a in range(m):
            for b in range(p):
                acc = 1.0 + 0.0j
                for i in range(d):
                    z = points[a, i]
                    for _ in range(exponents[b, i]):
                        acc *= z
                out[a, b] = acc
        return out

    @numba.njit(cache=True)
    def _word_code_nb(buf, length, n_gen):
        if n_gen == 1:
            return length
        offset = (n_gen**length - 1) // (n_gen - 1)
        rank = 0
        for t in range(length):
            rank = rank * n_gen + buf[t] - 1
        return offset + rank

    @numba.njit(cache=True)
    def hankel_fill_numba(letters, lengths, values, n_gen):
        n = letters.shape[0]
        out = np.empty((n, n), dtype=np.complex128)
        buf = np.empty(2 * letters.shape[1] + 1, dtype=np.int64)
        for i in range(n):
            li = lengths[i]
            for t in range(li):
                buf[t] = letters[i, li - 1 - t]
            for j in range(n):
                lj = lengths[j]
                for t in range(lj):
                    buf[li + t] = letters[j, t]
                out[i, j] = values[_word_code_nb(buf, li + lj, n_gen)]
        return out

else:  # pragma: no cover
    monomials_numba = None
    hankel_fill_numba = None


def monomials(points, exponents) -> np.ndarray:
    points = np.ascontiguousarray(np.atleast_2d(points), dtype=np.complex128)
    exponents = np.ascontiguousarray(np.asarray(exponents, dtype=np.int64).reshape(-1, points.shape[1]))
    if USE_NUMBA:
        return monomials_numba(points, exponents)
    return monomials_numpy(points, exponents)


def hankel_fill(letters, lengths, values, n_gen: int) -> np.ndarray:
    letters = np.ascontiguousarray(letters, dtype=np.int64)
    lengths = np.ascontiguousarray(lengths, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.complex128)
    if USE_NUMBA:
        return hankel_fill_numba(letters, lengths, values, int(n_gen))
    return hankel_fill_numpy(letters, lengths, values, int(n_gen))
