"""Compare the compiled and numpy row-reduction kernels over F_p.

    python3 benchmarks/bench_rref.py [--sizes 50 100 200] [--repeat 3]
"""

import argparse
import time

import numpy as np

from klrloc import linalg
from klrloc.linalg import DEFAULT_LARGE_PRIME, rref_modp_numpy

P = DEFAULT_LARGE_PRIME


def sample(n: int, rng: np.random.Generator) -> np.ndarray:
    r = max(1, (3 * n) // 4)
    A = (rng.integers(0, P, size=(n, r)) @ rng.integers(0, 1 << 6, size=(r, n))) % P
    return np.ascontiguousarray(A.astype(np.int64))


def best_of(fn, A: np.ndarray, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        B = A.copy()
        t0 = time.perf_counter()
        fn(B)
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    ck = linalg._ck
    print(f"{'n':>6} {'numpy [s]':>12} {'cython [s]':>12} {'speedup':>9}")
    for n in args.sizes:
        A = sample(n, rng)
        t_np = best_of(lambda B: rref_modp_numpy(B, P), A, args.repeat)
        if ck is None:
            print(f"{n:>6} {t_np:>12.4f} {'n/a':>12} {'':>9}")
            continue
        B1, B2 = A.copy(), A.copy()
        assert rref_modp_numpy(B1, P) == list(ck.rref_modp(B2, P)) and np.array_equal(B1, B2)
        t_cy = best_of(lambda B: ck.rref_modp(B, P), A, args.repeat)
        print(f"{n:>6} {t_np:>12.4f} {t_cy:>12.4f} {t_np / t_cy:>8.1f}x")


if __name__ == "__main__":
    main()
