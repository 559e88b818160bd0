# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled row reduction over F_p for int64 matrices (residues < 2**31)."""

cimport cython
from libc.stdint cimport int64_t


cdef inline int64_t _inv(int64_t a, int64_t p):
    # extended Euclid
    cdef int64_t t = 0, nt = 1, r = p, nr = a % p, q, tmp
    while nr != 0:
        q = r // nr
        tmp = t - q * nt
        t = nt
        nt = tmp
        tmp = r - q * nr
        r = nr
        nr = tmp
    if t < 0:
        t += p
    return t


def rref_modp(int64_t[:, ::1] A, int64_t p):
    """In-place reduced row echelon form; returns the list of pivot columns."""
    cdef Py_ssize_t rows = A.shape[0], cols = A.shape[1]
    cdef Py_ssize_t r = 0, c, k, j, i
    cdef int64_t inv, f, v
    pivots = []
    for c in range(cols):
        if r == rows:
            break
        k = -1
        for i in range(r, rows):
            if A[i, c] != 0:
                k = i
                break
        if k < 0:
            continue
        if k != r:
            for j in range(c, cols):
                v = A[r, j]
                A[r, j] = A[k, j]
                A[k, j] = v
        inv = _inv(A[r, c], p)
        if inv != 1:
            for j in range(c, cols):
                A[r, j] = (A[r, j] * inv) % p
        for i in range(rows):
            if i == r:
                continue
            f = A[i, c]
            if f == 0:
                continue
            for j in range(c, cols):
                if A[r, j] != 0:
                    v = (A[i, j] - f * A[r, j]) % p
                    if v < 0:
                        v += p
                    A[i, j] = v
        pivots.append(c)
        r += 1
    return pivots
