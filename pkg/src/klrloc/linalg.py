"""Exact dense linear algebra over a prime field or the rationals.

Matrices are numpy arrays: int64 residues for F_p and object arrays of
``Fraction`` for Q.  Every routine is exact; nothing here uses floating point.
The row-reduction kernel for F_p is taken from the compiled extension
``klrloc._kernel`` when it is importable and from a numpy implementation
otherwise (see ``KERNEL``).
"""

from __future__ import annotations

import os
from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

import numpy as np

try:  # pragma: no cover - exercised only when the extension is built
    if os.environ.get("KLRLOC_PURE_PYTHON"):
        raise ImportError
    from klrloc import _kernel as _ck
    KERNEL = "cython"
except ImportError:  # pragma: no cover
    _ck = None
    KERNEL = "numpy"

# Residues stay below 2**24 so that a dot product of length < 2**15 fits in int64.
DEFAULT_LARGE_PRIME = 16777213
_CHUNK = 1 << 14


def rref_modp_numpy(A: np.ndarray, p: int) -> List[int]:
    """In-place reduced row echelon form of A over F_p; returns pivot columns.

    Rows beyond the rank are left zero."""
    rows, cols = A.shape
    r = 0
    pivots: List[int] = []
    for c in range(cols):
        if r == rows:
            break
        col = A[r:, c]
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            A[[r, k], c:] = A[[k, r], c:]
        inv = pow(int(A[r, c]), p - 2, p)
        if inv != 1:
            A[r, c:] = (A[r, c:] * inv) % p
        colv = A[:, c].copy()
        colv[r] = 0
        nzr = np.flatnonzero(colv)
        if nzr.size:
            A[np.ix_(nzr, np.arange(c, cols))] = (
                A[np.ix_(nzr, np.arange(c, cols))] - np.outer(colv[nzr], A[r, c:])
            ) % p
        pivots.append(c)
        r += 1
    return pivots


def _rref_modp(A: np.ndarray, p: int) -> List[int]:
    if _ck is not None:
        return list(_ck.rref_modp(A, p))
    return rref_modp_numpy(A, p)


class Field:
    """Common interface; concrete fields are PrimeField and RationalField."""

    name: str
    dtype: object

    # -- construction ------------------------------------------------------
    def zeros(self, shape) -> np.ndarray:
        raise NotImplementedError

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for k in range(n):
            out[k, k] = self.one
        return out

    def array(self, data) -> np.ndarray:
        raise NotImplementedError

    def scalar(self, x):
        raise NotImplementedError

    # -- arithmetic ---------------------------------------------------------
    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        raise NotImplementedError

    def scale(self, c, a):
        raise NotImplementedError

    def kron(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.kron(a, b)

    def neg(self, a):
        return self.scale(self.scalar(-1), a)

    def inv_scalar(self, x):
        raise NotImplementedError

    def is_zero(self, a) -> bool:
        return not np.any(a != 0)

    # -- elimination -------------------------------------------------------
    def rref(self, a: np.ndarray) -> Tuple[np.ndarray, List[int]]:
        raise NotImplementedError

    def rank(self, a: np.ndarray) -> int:
        if a.size == 0:
            return 0
        return len(self.rref(a)[1])

    def nullspace(self, a: np.ndarray) -> np.ndarray:
        """Columns spanning {v : a v = 0}."""
        rows, cols = a.shape
        if rows == 0:
            return self.eye(cols)
        R, piv = self.rref(a)
        free = [c for c in range(cols) if c not in set(piv)]
        N = self.zeros((cols, len(free)))
        for t, f in enumerate(free):
            N[f, t] = self.one
            for r, pc in enumerate(piv):
                if R[r, f] != 0:
                    N[pc, t] = self.neg(R[r, f])
        return N

    def colspace(self, a: np.ndarray) -> Tuple[np.ndarray, List[int]]:
        """Basis V of the column space with V[pivots, :] = identity."""
        R, piv = self.rref(np.ascontiguousarray(a.T))
        return np.ascontiguousarray(R[: len(piv)].T), piv

    def solve(self, a: np.ndarray, b: np.ndarray) -> Optional[np.ndarray]:
        """One solution x of a x = b (b a matrix), or None."""
        rows, cols = a.shape
        aug = np.concatenate([a, b], axis=1)
        R, piv = self.rref(aug)
        if any(p >= cols for p in piv):
            return None
        x = self.zeros((cols, b.shape[1]))
        for r, pc in enumerate(piv):
            x[pc, :] = R[r, cols:]
        return x

    def inverse(self, a: np.ndarray) -> np.ndarray:
        n = a.shape[0]
        x = self.solve(a, self.eye(n))
        if x is None or self.rank(a) != n:
            raise ZeroDivisionError("singular matrix")
        return x

    def coords(self, V: np.ndarray, piv: Sequence[int], y: np.ndarray) -> np.ndarray:
        """Coordinates of y in the column basis V returned by colspace."""
        return y[list(piv), ...]

    def random(self, shape, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def to_exact(self, x) -> Fraction:
        raise NotImplementedError

    def format(self, x) -> str:
        f = self.to_exact(x)
        return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"

    def parse(self, s) -> object:
        return self.scalar(Fraction(s))


class PrimeField(Field):
    def __init__(self, p: int = DEFAULT_LARGE_PRIME):
        if p >= (1 << 31):
            raise ValueError("prime too large for the int64 kernels")
        self.p = int(p)
        self.name = f"F_{p}"
        self.dtype = np.int64
        self.one = 1
        self.zero = 0

    def __repr__(self) -> str:
        return f"PrimeField({self.p})"

    # scalar arithmetic on residues
    def sadd(self, a, b):
        return (a + b) % self.p

    def ssub(self, a, b):
        return (a - b) % self.p

    def smul(self, a, b):
        return (a * b) % self.p

    def sneg(self, a):
        return (-a) % self.p

    def sinv(self, a):
        return self.inv_scalar(a)

    def spow(self, a, k):
        return pow(int(a), k, self.p)

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("F", self.p))

    def zeros(self, shape) -> np.ndarray:
        return np.zeros(shape, dtype=np.int64)

    def scalar(self, x) -> int:
        if isinstance(x, Fraction):
            return (x.numerator % self.p) * pow(x.denominator % self.p, self.p - 2, self.p) % self.p
        return int(x) % self.p

    def array(self, data) -> np.ndarray:
        arr = np.asarray(data, dtype=object)
        out = np.zeros(arr.shape, dtype=np.int64)
        it = np.nditer(arr, flags=["refs_ok", "multi_index"])
        for v in it:
            out[it.multi_index] = self.scalar(v.item())
        return out

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        k = a.shape[1]
        if self.p < (1 << 25) and k < (1 << 16) and a.shape[0] * k * b.shape[1] > 20000:
            # exact in float64: split b into 12-bit halves so every partial sum stays below 2^53
            af = a.astype(np.float64)
            lo = (b & 0xFFF).astype(np.float64)
            hi = (b >> 12).astype(np.float64)
            rlo = (af @ lo).astype(np.int64) % self.p
            rhi = (af @ hi).astype(np.int64) % self.p
            return (rhi * 4096 + rlo) % self.p
        if k <= _CHUNK:
            return (a @ b) % self.p
        out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
        for s in range(0, k, _CHUNK):
            out = (out + a[:, s:s + _CHUNK] @ b[s:s + _CHUNK]) % self.p
        return out

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def scale(self, c, a):
        return (a * (int(c) % self.p)) % self.p

    def kron(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        # entries of a (x) b reach p^2; reduce before any further product
        return np.kron(a, b) % self.p

    def inv_scalar(self, x) -> int:
        x = int(x) % self.p
        if x == 0:
            raise ZeroDivisionError
        return pow(x, self.p - 2, self.p)

    def rref(self, a: np.ndarray) -> Tuple[np.ndarray, List[int]]:
        A = np.array(a, dtype=np.int64, copy=True, order="C") % self.p
        piv = _rref_modp(A, self.p)
        return A[: len(piv)], piv

    def random(self, shape, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.p, size=shape, dtype=np.int64)

    def to_exact(self, x) -> Fraction:
        """Symmetric representative, or a small rational reconstruction."""
        x = int(x) % self.p
        return _rational_reconstruct(x, self.p)


def _rational_reconstruct(x: int, p: int) -> Fraction:
    bound = int((p // 2) ** 0.5)
    r0, r1 = p, x
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return Fraction(x if x <= p // 2 else x - p)
    return Fraction(r1, s1)


def _integerize(a: np.ndarray):
    """Object array of Fractions -> (object array of ints, common denominator)."""
    den = 1
    for x in a.flat:
        d = x.denominator
        if d != 1:
            den = den * d // gcd(den, d)
    if den == 1:
        return np.frompyfunc(lambda x: x.numerator, 1, 1)(a), 1
    return np.frompyfunc(lambda x: x.numerator * (den // x.denominator), 1, 1)(a), den


def _maxabs(a: np.ndarray) -> int:
    return max((abs(int(x)) for x in a.flat), default=0)


def _to_fractions(a: np.ndarray, den: int) -> np.ndarray:
    if den == 1:
        return np.frompyfunc(Fraction, 1, 1)(a)
    return np.frompyfunc(lambda x: Fraction(x, den), 1, 1)(a)


class RationalField(Field):
    def __init__(self) -> None:
        self.name = "Q"
        self.dtype = object
        self.one = Fraction(1)
        self.zero = Fraction(0)

    def __repr__(self) -> str:
        return "RationalField()"

    def sadd(self, a, b):
        return Fraction(a) + b

    def ssub(self, a, b):
        return Fraction(a) - b

    def smul(self, a, b):
        return Fraction(a) * b

    def sneg(self, a):
        return -Fraction(a)

    def sinv(self, a):
        return 1 / Fraction(a)

    def spow(self, a, k):
        return Fraction(a) ** k

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalField)

    def __hash__(self) -> int:
        return hash("Q")

    def zeros(self, shape) -> np.ndarray:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out

    def scalar(self, x) -> Fraction:
        return Fraction(x)

    def array(self, data) -> np.ndarray:
        arr = np.asarray(data, dtype=object)
        out = np.empty(arr.shape, dtype=object)
        it = np.nditer(arr, flags=["refs_ok", "multi_index"])
        for v in it:
            out[it.multi_index] = Fraction(v.item())
        return out

    def matmul(self, a, b):
        if a.shape[1] == 0 or a.shape[0] == 0 or b.shape[1] == 0:
            return self.zeros((a.shape[0], b.shape[1]))
        ia, da = _integerize(a)
        ib, db = _integerize(b)
        bound = _maxabs(ia) * _maxabs(ib) * a.shape[1]
        if bound < (1 << 62):
            prod = ia.astype(np.int64) @ ib.astype(np.int64)
            prod = prod.astype(object)
        else:
            prod = np.dot(ia, ib)
        den = da * db
        return _to_fractions(prod, den)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def scale(self, c, a):
        return a * Fraction(c)

    def inv_scalar(self, x):
        return 1 / Fraction(x)

    def rref(self, a):
        A = np.array(a, dtype=object, copy=True)
        rows, cols = A.shape
        r = 0
        piv: List[int] = []
        for c in range(cols):
            if r == rows:
                break
            nz = [k for k in range(r, rows) if A[k, c] != 0]
            if not nz:
                continue
            k = nz[0]
            if k != r:
                A[[r, k]] = A[[k, r]]
            A[r, c:] = A[r, c:] / A[r, c]
            for k2 in range(rows):
                if k2 != r and A[k2, c] != 0:
                    A[k2, c:] = A[k2, c:] - A[k2, c] * A[r, c:]
            piv.append(c)
            r += 1
        return A[: len(piv)], piv

    def random(self, shape, rng):
        return self.array(rng.integers(-5, 6, size=shape))

    def to_exact(self, x) -> Fraction:
        return Fraction(x)


def make_field(spec: str = "Q", p: Optional[int] = None) -> Field:
    """Field from a config string: "Q", "F_p" (with p) or "F_<prime>"."""
    s = spec.strip()
    if s in ("Q", "QQ", "rationals"):
        return RationalField()
    if s.startswith("F"):
        rest = s[1:].lstrip("_")
        prime = int(rest) if rest else (p if p is not None else 101)
        return PrimeField(prime)
    raise ValueError(f"unknown field {spec!r}")


def intersect_nullspace(F: Field, N: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Columns of N restricted to those combinations killed by E."""
    if N.shape[1] == 0:
        return N
    EN = F.matmul(E, N)
    if F.is_zero(EN):
        return N
    K = F.nullspace(EN)
    return F.matmul(N, K)
