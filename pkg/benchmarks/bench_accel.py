"""Time the numba and numpy paths of the loop kernels.

    python3 benchmarks/bench_accel.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from kreinkernels import _accel
from kreinkernels.fock import TruncatedFock
from kreinkernels.hankel import enumerate_words


def cases(rng):
    f = TruncatedFock(3, 8)
    pts = (rng.normal(size=(400, 3)) + 1j * rng.normal(size=(400, 3))) * 0.3
    yield "monomials d=3 M=8 x400", "monomials", (pts, np.asarray(f.exponents))

    n_gen, depth = 2, 5
    words = enumerate_words(n_gen, depth)
    letters = np.zeros((len(words), depth), dtype=np.int64)
    for i, w in enumerate(words):
        letters[i, : len(w)] = w
    lengths = np.array([len(w) for w in words], dtype=np.int64)
    total = len(enumerate_words(n_gen, 2 * depth))
    values = rng.normal(size=total) + 1j * rng.normal(size=total)
    yield f"hankel_fill N={n_gen} depth={depth}", "hankel_fill", (letters, lengths, values, n_gen)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"numba available: {_accel.HAVE_NUMBA}")
    for title, name, call_args in cases(rng):
        ref = getattr(_accel, f"{name}_numpy")
        row = [title, f"numpy {min(timeit.repeat(lambda: ref(*call_args), number=1, repeat=args.repeat)) * 1e3:8.2f} ms"]
        fast = getattr(_accel, f"{name}_numba")
        if fast is not None:
            fast(*call_args)  # compile
            t = min(timeit.repeat(lambda: fast(*call_args), number=1, repeat=args.repeat))
            same = np.allclose(fast(*call_args), ref(*call_args), rtol=1e-13, atol=0)
            row.append(f"numba {t * 1e3:8.2f} ms  agree={same}")
        print("  ".join(row))


if __name__ == "__main__":
    main()
