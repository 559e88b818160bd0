"""Multivariate polynomials over an exact field and the resultant semiring.

A ``Poly`` is a finite map from exponent vectors to nonzero field scalars,
over a tuple of named variables.  Variables carry degrees only when a caller
asks about homogeneity, so the same polynomial can be read with different
gradings.  Resultants are Sylvester determinants evaluated with fraction-free
(Bareiss) elimination over the polynomial ring in the remaining variables.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .linalg import Field, RationalField

Exps = Tuple[int, ...]


class PolyError(ValueError):
    pass


class Poly:
    __slots__ = ("F", "vars", "terms")

    def __init__(self, F: Field, vars: Sequence[str], terms: Mapping[Exps, object] = ()):
        self.F = F
        self.vars = tuple(vars)
        clean: Dict[Exps, object] = {}
        for e, c in dict(terms).items():
            c = F.scalar(c) if not _is_scalar(F, c) else c
            if c != 0:
                e = tuple(int(x) for x in e)
                if len(e) != len(self.vars):
                    raise PolyError("exponent length does not match variables")
                clean[e] = c
        self.terms = clean

    # ---- constructors ------------------------------------------------
    @classmethod
    def const(cls, F: Field, c, vars: Sequence[str] = ()) -> "Poly":
        return cls(F, vars, {tuple(0 for _ in vars): F.scalar(c)})

    @classmethod
    def var(cls, F: Field, name: str) -> "Poly":
        return cls(F, (name,), {(1,): F.one})

    @classmethod
    def from_dict(cls, F: Field, vars: Sequence[str], d: Mapping[Exps, object]) -> "Poly":
        return cls(F, vars, {e: F.scalar(c) for e, c in d.items()})

    # ---- variable handling ---------------------------------------------
    def with_vars(self, vars: Sequence[str]) -> "Poly":
        vars = tuple(vars)
        if vars == self.vars:
            return self
        idx = []
        for v in self.vars:
            if v not in vars:
                if any(e[self.vars.index(v)] for e in self.terms):
                    raise PolyError(f"variable {v} still occurs")
                idx.append(None)
            else:
                idx.append(vars.index(v))
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(vars)
            for k, x in enumerate(e):
                if idx[k] is not None:
                    ne[idx[k]] = x
            out[tuple(ne)] = c
        return Poly(self.F, vars, out)

    def used_vars(self) -> Tuple[str, ...]:
        return tuple(v for k, v in enumerate(self.vars) if any(e[k] for e in self.terms))

    def trim(self) -> "Poly":
        return self.with_vars(self.used_vars())

    def rename(self, mapping: Mapping[str, str]) -> "Poly":
        nv = tuple(mapping.get(v, v) for v in self.vars)
        if len(set(nv)) != len(nv):
            # merging two variables: substitute instead
            out = Poly.const(self.F, 0)
            for e, c in self.terms.items():
                m = Poly.const(self.F, c)
                for v, x in zip(nv, e):
                    if x:
                        m = m * Poly.var(self.F, v) ** x
                out = out + m
            return out
        return Poly(self.F, nv, self.terms)

    def _align(self, other: "Poly") -> Tuple["Poly", "Poly"]:
        if self.vars == other.vars:
            return self, other
        vs = tuple(sorted(set(self.vars) | set(other.vars)))
        return self.with_vars(vs), other.with_vars(vs)

    # ---- arithmetic --------------------------------------------------
    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        a, b = self._align(other)
        F = self.F
        out = dict(a.terms)
        for e, c in b.terms.items():
            out[e] = F.sadd(out.get(e, 0), c)
        return Poly(F, a.vars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        F = self.F
        return Poly(F, self.vars, {e: F.sneg(c) for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        other = self._coerce(other)
        a, b = self._align(other)
        F = self.F
        out: Dict[Exps, object] = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = F.sadd(out.get(e, 0), F.smul(c1, c2))
        return Poly(F, a.vars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        out = Poly.const(self.F, 1, self.vars)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.F != self.F:
                raise PolyError("field mismatch")
            return other
        return Poly.const(self.F, other, self.vars)

    def scale(self, c) -> "Poly":
        F = self.F
        c = F.scalar(c) if not _is_scalar(F, c) else c
        return Poly(F, self.vars, {e: F.smul(c, x) for e, x in self.terms.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            other = self._coerce(other)
        a, b = self._align(other)
        return a.terms == b.terms

    def __hash__(self) -> int:
        t = self.trim()
        return hash((t.vars, tuple(sorted(t.terms.items()))))

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return all(not any(e) for e in self.terms)

    def const_value(self):
        return self.terms.get(tuple(0 for _ in self.vars), 0)

    # ---- structure ----------------------------------------------------
    def degree(self, v: str) -> int:
        if v not in self.vars:
            return 0 if self.terms else -1
        k = self.vars.index(v)
        return max((e[k] for e in self.terms), default=-1)

    def coeffs_in(self, v: str) -> List["Poly"]:
        """Coefficients c_0, ..., c_d with self = sum c_k v^k (c_k free of v)."""
        if v not in self.vars:
            return [self]
        k = self.vars.index(v)
        rest = self.vars[:k] + self.vars[k + 1:]
        d = self.degree(v)
        out: List[Dict[Exps, object]] = [dict() for _ in range(max(d, 0) + 1)]
        for e, c in self.terms.items():
            out[e[k]][e[:k] + e[k + 1:]] = c
        return [Poly(self.F, rest, t) for t in out]

    def is_quasi_monic(self, v: str) -> bool:
        cs = self.coeffs_in(v)
        return bool(self.terms) and cs[-1].is_const() and not cs[-1].is_zero()

    def is_homogeneous(self, vdeg: Mapping[str, int]) -> bool:
        return len({self._tdeg(e, vdeg) for e in self.terms}) <= 1

    def _tdeg(self, e: Exps, vdeg: Mapping[str, int]) -> int:
        return sum(x * vdeg[v] for v, x in zip(self.vars, e))

    def hdegree(self, vdeg: Mapping[str, int]) -> Optional[int]:
        degs = {self._tdeg(e, vdeg) for e in self.terms}
        if len(degs) > 1:
            raise PolyError("not homogeneous")
        return degs.pop() if degs else None

    def leading(self) -> Tuple[Exps, object]:
        e = max(self.terms)
        return e, self.terms[e]

    def monic(self) -> "Poly":
        """Representative modulo scalars: lex-largest coefficient equal to 1."""
        if not self.terms:
            return self
        t = self.trim()
        _, c = t.leading()
        return t.scale(self.F.sinv(c))

    def equiv(self, other: "Poly") -> bool:
        """Equality modulo nonzero scalars."""
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        return self.monic() == other.monic()

    def subs(self, v: str, value: "Poly") -> "Poly":
        """Substitute a polynomial for a variable."""
        if v not in self.vars:
            return self
        cs = self.coeffs_in(v)
        out = Poly.const(self.F, 0)
        for c in reversed(cs):
            out = out * value + c
        return out

    def evaluate(self, values: Mapping[str, object]):
        F = self.F
        tot = 0
        for e, c in self.terms.items():
            t = c
            for v, x in zip(self.vars, e):
                if x:
                    t = F.smul(t, F.spow(F.scalar(values[v]), x))
            tot = F.sadd(tot, t)
        return tot

    def divmod_exact(self, d: "Poly") -> "Poly":
        """Exact quotient self / d (raises if d does not divide self)."""
        if d.is_zero():
            raise ZeroDivisionError
        a, b = self._align(d)
        F = self.F
        q: Dict[Exps, object] = {}
        r = dict(a.terms)
        le, lc = b.leading()
        inv = F.sinv(lc)
        while r:
            e = max(r)
            c = r[e]
            if any(x < y for x, y in zip(e, le)):
                raise PolyError("inexact division")
            qe = tuple(x - y for x, y in zip(e, le))
            qc = F.smul(c, inv)
            q[qe] = F.sadd(q.get(qe, 0), qc)
            for e2, c2 in b.terms.items():
                te = tuple(x + y for x, y in zip(qe, e2))
                nv = F.ssub(r.get(te, 0), F.smul(qc, c2))
                if nv == 0:
                    r.pop(te, None)
                else:
                    r[te] = nv
        return Poly(F, a.vars, q)

    def __repr__(self) -> str:
        return f"Poly({render(self)})"

    def __str__(self) -> str:
        return render(self)


def _is_scalar(F: Field, c) -> bool:
    if isinstance(F, RationalField):
        return isinstance(c, Fraction)
    return isinstance(c, int) and 0 <= c < F.p


def render(f: Poly) -> str:
    """Canonical text: terms by decreasing lex order of exponents."""
    if not f.terms:
        return "0"
    F = f.F
    parts = []
    for e in sorted(f.terms, reverse=True):
        c = F.to_exact(f.terms[e])
        mono = "*".join(v if x == 1 else f"{v}^{x}" for v, x in zip(f.vars, e) if x)
        if not mono:
            s = str(c)
        elif c == 1:
            s = mono
        elif c == -1:
            s = "-" + mono
        else:
            s = f"{c}*{mono}"
        parts.append(s)
    out = parts[0]
    for s in parts[1:]:
        out += " - " + s[1:] if s.startswith("-") else " + " + s
    return out


# ---------------------------------------------------------------------------
# determinants and resultants


def det_bareiss(M: List[List[Poly]]) -> Poly:
    """Determinant of a square matrix of polynomials, fraction free."""
    n = len(M)
    if n == 0:
        raise PolyError("empty matrix")
    F = M[0][0].F
    A = [row[:] for row in M]
    sign = 1
    prev = Poly.const(F, 1)
    for k in range(n - 1):
        if A[k][k].is_zero():
            sw = next((r for r in range(k + 1, n) if not A[r][k].is_zero()), None)
            if sw is None:
                return Poly.const(F, 0)
            A[k], A[sw] = A[sw], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]).divmod_exact(prev)
        prev = A[k][k]
    out = A[n - 1][n - 1]
    return out if sign == 1 else -out


def sylvester(f: Poly, g: Poly, v: str) -> List[List[Poly]]:
    fc = f.coeffs_in(v)[::-1]  # leading first
    gc = g.coeffs_in(v)[::-1]
    m, n = len(fc) - 1, len(gc) - 1
    F = f.F
    zero = Poly.const(F, 0)
    size = m + n
    rows = []
    for r in range(n):
        rows.append([zero] * r + fc + [zero] * (size - r - m - 1))
    for r in range(m):
        rows.append([zero] * r + gc + [zero] * (size - r - n - 1))
    return rows


def resultant(f: Poly, g: Poly, v: str, check: bool = True) -> Poly:
    """f ⊛_v g = prod of g over the roots of f, modulo scalars.

    Both arguments must be quasi-monic in v (when `check`)."""
    if check:
        for h, nm in ((f, "f"), (g, "g")):
            if not h.is_quasi_monic(v):
                raise PolyError(f"{nm} is not quasi-monic in {v}")
    m, n = f.degree(v), g.degree(v)
    F = f.F
    if m == 0:
        return Poly.const(F, 1)
    if n == 0:
        # g does not involve v, so each of the m roots contributes g itself
        return (g ** m).monic()
    S = sylvester(f, g, v)
    return det_bareiss(S).monic()


def resultant_by_roots(roots: Iterable[Poly], g: Poly, v: str) -> Poly:
    """prod g(r) over the given roots; used to cross-check split cases."""
    out = None
    for r in roots:
        val = g.subs(v, r)
        out = val if out is None else out * val
    return (out if out is not None else Poly.const(g.F, 1)).monic()


def res_mul(f: Poly, g: Poly, z: str = "z", w: str = "w",
            fdeg: Optional[Mapping[str, int]] = None, gdeg: Optional[Mapping[str, int]] = None) -> Poly:
    """Product in M(z,w): h(z1,z3) = f(z1,z2) ⊛_{z2} g(z2,z3).

    `fdeg` and `gdeg` are the variable degrees of the two factors, compared when given."""
    if fdeg is not None and gdeg is not None and (fdeg.get(z), fdeg.get(w)) != (gdeg.get(z), gdeg.get(w)):
        raise PolyError("res_mul needs the same variable degrees on both factors")
    for h in (f, g):
        if not (h.is_quasi_monic(z) and h.is_quasi_monic(w)):
            raise PolyError("res_mul needs quasi-monic inputs in both variables")
    mid = "_mid"
    f1 = f.rename({w: mid})
    g1 = g.rename({z: mid})
    h = resultant(f1, g1, mid, check=False)
    return h.monic()


class RatFunc:
    """A ratio of polynomials modulo nonzero scalars (no cancellation needed)."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Optional[Poly] = None):
        self.num = num
        self.den = den if den is not None else Poly.const(num.F, 1)
        if self.den.is_zero():
            raise ZeroDivisionError

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        if isinstance(other, Poly):
            other = RatFunc(other)
        return RatFunc(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RatFunc") -> "RatFunc":
        if isinstance(other, Poly):
            other = RatFunc(other)
        return RatFunc(self.num * other.den, self.den * other.num)

    def equiv(self, other: "RatFunc") -> bool:
        if isinstance(other, Poly):
            other = RatFunc(other)
        return (self.num * other.den).equiv(other.num * self.den)

    def reduced(self) -> Optional[Poly]:
        """The polynomial num/den when den divides num, else None."""
        try:
            return self.num.divmod_exact(self.den).monic()
        except PolyError:
            return None

    def __repr__(self) -> str:
        return f"({render(self.num)}) / ({render(self.den)})"
