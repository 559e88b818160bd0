"""Finite Cartan data, Weyl group combinatorics and the parameters Q_{i,j}.

Indices are 1-based in the public API (matching the usual labelling of Dynkin
nodes) and stored as plain ints.  Weights are integer vectors in the basis of
fundamental weights; root-lattice vectors are integer vectors in the basis of
simple roots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

Weight = Tuple[int, ...]
RootVec = Tuple[int, ...]
Poly2 = Dict[Tuple[int, int], Fraction]
Poly3 = Dict[Tuple[int, int, int], Fraction]

SUPPORTED = ("A", "B", "C", "D", "E", "F", "G")


class CartanError(ValueError):
    pass


def _cartan_matrix(label: str, rank: int) -> Tuple[List[List[int]], List[int]]:
    """Return (C, d) with C[i][j] = <h_i, alpha_j> and symmetrizers d."""
    n = rank
    C = [[2 if i == j else 0 for j in range(n)] for i in range(n)]

    def link(i: int, j: int, cij: int = -1, cji: int = -1) -> None:
        C[i][j] = cij
        C[j][i] = cji

    if label == "A":
        if n < 1:
            raise CartanError("A_n needs n >= 1")
        for k in range(n - 1):
            link(k, k + 1)
        d = [1] * n
    elif label == "B":
        if n < 2:
            raise CartanError("B_n needs n >= 2")
        for k in range(n - 2):
            link(k, k + 1)
        # alpha_n short
        link(n - 2, n - 1, -1, -2)
        d = [2] * (n - 1) + [1]
    elif label == "C":
        if n < 2:
            raise CartanError("C_n needs n >= 2")
        for k in range(n - 2):
            link(k, k + 1)
        # alpha_n long; for n = 2 this is the diagram 1 <= 2
        link(n - 2, n - 1, -2, -1)
        d = [1] * (n - 1) + [2]
    elif label == "D":
        if n < 4:
            raise CartanError("D_n needs n >= 4")
        for k in range(n - 2):
            link(k, k + 1)
        link(n - 3, n - 1)
        d = [1] * n
    elif label == "E":
        if n not in (6, 7, 8):
            raise CartanError("E_n needs n in {6, 7, 8}")
        # Bourbaki labelling: 1-3-4-5-6(-7-8), 2 attached to 4
        link(0, 2)
        link(2, 3)
        link(1, 3)
        for k in range(3, n - 1):
            link(k, k + 1)
        d = [1] * n
    elif label == "F":
        if n != 4:
            raise CartanError("F_4 only")
        link(0, 1)
        link(1, 2, -1, -2)
        link(2, 3)
        d = [2, 2, 1, 1]
    elif label == "G":
        if n != 2:
            raise CartanError("G_2 only")
        link(0, 1, -3, -1)
        d = [1, 3]
    else:
        raise CartanError(f"unsupported Cartan type {label!r}; choose one of {SUPPORTED}")
    return C, d


@dataclass(frozen=True)
class QParams:
    """Coefficient tables t_{i,j;p,q}; Q_{i,j}(u,v) = sum t u^p v^q."""

    table: Mapping[Tuple[int, int], Mapping[Tuple[int, int], Fraction]]

    def poly(self, i: int, j: int) -> Poly2:
        if i == j:
            return {}
        if (i, j) in self.table:
            return dict(self.table[(i, j)])
        return {(q, p): c for (p, q), c in self.table[(j, i)].items()}


@dataclass(frozen=True, eq=False)
class CartanDatum:
    label: str
    rank: int
    qtable: Optional[Mapping[Tuple[int, int], Mapping[Tuple[int, int], Fraction]]] = None
    # cache for Q-bar polynomials and other derived data
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self) -> None:
        C, d = _cartan_matrix(self.label, self.rank)
        object.__setattr__(self, "_C", C)
        object.__setattr__(self, "_d", d)
        q = self.qtable if self.qtable is not None else default_qparams_table(C)
        qp = QParams({k: {kk: Fraction(vv) for kk, vv in v.items()} for k, v in q.items()})
        object.__setattr__(self, "_q", qp)
        self._validate()

    # ---- basic data -------------------------------------------------
    @property
    def name(self) -> str:
        return f"{self.label}{self.rank}"

    @property
    def index_set(self) -> Tuple[int, ...]:
        return tuple(range(1, self.rank + 1))

    def c(self, i: int, j: int) -> int:
        return self._C[i - 1][j - 1]

    def d(self, i: int) -> int:
        return self._d[i - 1]

    def form(self, i: int, j: int) -> int:
        """(alpha_i, alpha_j)."""
        return self._d[i - 1] * self._C[i - 1][j - 1]

    def lam(self, i: int, j: int) -> int:
        """Grading twist lambda(alpha_i, alpha_j) = -(alpha_i, alpha_j)."""
        return -self.form(i, j)

    @property
    def symmetric(self) -> bool:
        return all(x == 1 for x in self._d)

    @property
    def cartan_matrix(self) -> List[List[int]]:
        return [row[:] for row in self._C]

    @property
    def qparams(self) -> QParams:
        return self._q

    def _validate(self) -> None:
        n = self.rank
        for i in range(1, n + 1):
            if self.c(i, i) != 2:
                raise CartanError("diagonal entries must be 2")
            for j in range(1, n + 1):
                if i != j and self.c(i, j) > 0:
                    raise CartanError("off-diagonal entries must be <= 0")
                if self.d(i) * self.c(i, j) != self.d(j) * self.c(j, i):
                    raise CartanError("matrix is not symmetrizable by d")
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i == j:
                    continue
                Q = self.Q(i, j)
                target = -2 * self.form(i, j)
                for (p, q) in Q:
                    if p * self.form(i, i) + q * self.form(j, j) != target:
                        raise CartanError(f"Q_{i},{j} is not homogeneous of degree {target}")
                lead = Q.get((-self.c(i, j), 0), 0)
                if lead == 0:
                    raise CartanError(f"Q_{i},{j}: leading coefficient must be invertible")

    # ---- Q parameters -----------------------------------------------
    def Q(self, i: int, j: int) -> Poly2:
        return self._q.poly(i, j)

    def Qbar(self, i: int, j: int) -> Poly3:
        """(Q_{i,j}(u,v) - Q_{i,j}(w,v)) / (u - w) as a polynomial in (u, v, w)."""
        key = ("Qbar", i, j)
        if key not in self._cache:
            out: Poly3 = {}
            for (p, q), t in self.Q(i, j).items():
                for s in range(p):
                    m = (s, q, p - 1 - s)
                    out[m] = out.get(m, 0) + t
            self._cache[key] = {m: c for m, c in out.items() if c != 0}
        return self._cache[key]

    # ---- weights and roots ------------------------------------------
    def alpha(self, j: int) -> Weight:
        """Simple root alpha_j in fundamental-weight coordinates."""
        return tuple(self.c(i, j) for i in self.index_set)

    def fundamental(self, j: int) -> Weight:
        return tuple(1 if i == j else 0 for i in self.index_set)

    def root_to_weight(self, beta: Sequence[int]) -> Weight:
        out = [0] * self.rank
        for j, b in enumerate(beta, start=1):
            if b:
                for i in self.index_set:
                    out[i - 1] += b * self.c(i, j)
        return tuple(out)

    def weight_to_root(self, lam: Sequence[int]) -> RootVec:
        """Inverse of root_to_weight; raises if lam is not in the root lattice."""
        inv = self._cartan_inverse
        out = []
        for j in range(self.rank):
            # lam_i = sum_j c_ij beta_j  =>  beta = C^{-1} lam
            v = sum(inv[j][i] * lam[i] for i in range(self.rank))
            if v.denominator != 1:
                raise CartanError(f"weight {tuple(lam)} is not in the root lattice")
            out.append(int(v))
        return tuple(out)

    @cached_property
    def _cartan_inverse(self) -> List[List[Fraction]]:
        n = self.rank
        A = [[Fraction(self._C[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        for col in range(n):
            piv = next(r for r in range(col, n) if A[r][col] != 0)
            A[col], A[piv] = A[piv], A[col]
            f = A[col][col]
            A[col] = [x / f for x in A[col]]
            for r in range(n):
                if r != col and A[r][col] != 0:
                    g = A[r][col]
                    A[r] = [x - g * y for x, y in zip(A[r], A[col])]
        return [row[n:] for row in A]

    def pair_root(self, a: Sequence[int], b: Sequence[int]) -> int:
        """(a, b) for root-lattice vectors."""
        return sum(a[i - 1] * b[j - 1] * self.form(i, j)
                   for i in self.index_set for j in self.index_set if a[i - 1] and b[j - 1])

    def pair_weight_root(self, lam: Sequence[int], beta: Sequence[int]) -> int:
        """(lam, beta) with lam a weight and beta a root-lattice vector."""
        return sum(lam[j - 1] * self.d(j) * beta[j - 1] for j in self.index_set)

    def pair_weights(self, lam: Sequence[int], mu: Sequence[int]) -> Fraction:
        """(lam, mu) for arbitrary weights (rational in general)."""
        inv = self._cartan_inverse
        beta = [sum(inv[j][i] * mu[i] for i in range(self.rank)) for j in range(self.rank)]
        return sum(Fraction(lam[j]) * self.d(j + 1) * beta[j] for j in range(self.rank))

    def height(self, beta: Sequence[int]) -> int:
        return sum(beta)

    def unit_root(self, i: int) -> RootVec:
        return tuple(1 if k == i else 0 for k in self.index_set)

    # ---- Weyl group ---------------------------------------------------
    def reflect(self, i: int, lam: Sequence[int]) -> Weight:
        a = lam[i - 1]
        al = self.alpha(i)
        return tuple(x - a * y for x, y in zip(lam, al))

    def weyl_act(self, word: Iterable[int], lam: Sequence[int]) -> Weight:
        """Apply s_{w_1} s_{w_2} ... s_{w_r} to lam (rightmost letter first)."""
        out = tuple(lam)
        for i in reversed(list(word)):
            if i not in self.index_set:
                raise CartanError(f"letter {i} not in the index set")
            out = self.reflect(i, out)
        return out

    def reflect_root(self, i: int, beta: Sequence[int]) -> RootVec:
        k = sum(self.c(i, j) * beta[j - 1] for j in self.index_set)
        out = list(beta)
        out[i - 1] -= k
        return tuple(out)

    @property
    def rho(self) -> Weight:
        return tuple([1] * self.rank)

    def reduced_word(self, word: Sequence[int], first: Optional[int] = None) -> Tuple[int, ...]:
        """A reduced expression for the Weyl element given by `word`.

        Left descents are peeled off greedily (smallest index, or `first` when it
        is a descent at the first step)."""
        v = self.weyl_act(word, self.rho)
        out: List[int] = []
        pref = first
        while any(x < 0 for x in v):
            if pref is not None and v[pref - 1] < 0:
                j = pref
            else:
                j = next(k for k in self.index_set if v[k - 1] < 0)
            pref = None
            out.append(j)
            v = self.reflect(j, v)
        return tuple(out)

    def length(self, word: Sequence[int]) -> int:
        return len(self.reduced_word(word))

    @cached_property
    def w0(self) -> Tuple[int, ...]:
        v = self.rho
        word: List[int] = []
        while any(x > 0 for x in v):
            j = next(k for k in self.index_set if v[k - 1] > 0)
            word.append(j)
            v = self.reflect(j, v)
        return tuple(reversed(word))

    def w0_starting_with(self, i: int) -> Tuple[int, ...]:
        return self.reduced_word(self.w0, first=i)

    def star(self, i: int) -> int:
        """i* with w_0(alpha_i) = -alpha_{i*}."""
        img = self.weyl_act(self.w0, self.alpha(i))
        for j in self.index_set:
            if tuple(-x for x in self.alpha(j)) == img:
                return j
        raise CartanError("w0 does not permute the negative simple roots")  # pragma: no cover

    def bruhat_leq(self, v: Sequence[int], w: Sequence[int]) -> bool:
        """v <= w via the subword property of a reduced word of w."""
        target = self.weyl_act(v, self.rho)
        rw = self.reduced_word(w)
        seen = {self.rho}
        for letter in reversed(rw):
            seen |= {self.reflect(letter, x) for x in seen}
        return target in seen

    def is_dominant(self, lam: Sequence[int]) -> bool:
        return all(x >= 0 for x in lam)


def default_qparams_table(C: List[List[int]]) -> Dict[Tuple[int, int], Dict[Tuple[int, int], Fraction]]:
    """Q_{i,j}(u,v) = u^{-c_ij} - v^{-c_ji} for i < j; the constant 1 when c_ij = 0."""
    n = len(C)
    table: Dict[Tuple[int, int], Dict[Tuple[int, int], Fraction]] = {}
    for i in range(n):
        for j in range(i + 1, n):
            if C[i][j] == 0:
                table[(i + 1, j + 1)] = {(0, 0): Fraction(1)}
            else:
                table[(i + 1, j + 1)] = {(-C[i][j], 0): Fraction(1), (0, -C[j][i]): Fraction(-1)}
    return table


def build_cartan(label: str, rank: Optional[int] = None, qtable=None) -> CartanDatum:
    """Build a Cartan datum from a label such as "A3", or ("A", 3)."""
    label = label.strip()
    if rank is None:
        if len(label) < 2 or not label[1:].isdigit():
            raise CartanError(f"cannot parse Cartan type {label!r}")
        label, rank = label[0], int(label[1:])
    label = label.upper()
    if label not in SUPPORTED:
        raise CartanError(f"unsupported Cartan type {label!r}; choose one of {SUPPORTED}")
    return _build_cached(label, int(rank), _freeze_q(qtable))


def _freeze_q(qtable):
    if qtable is None:
        return None
    return tuple(sorted((k, tuple(sorted((kk, Fraction(vv)) for kk, vv in v.items()))) for k, v in qtable.items()))


_CARTAN_CACHE: Dict[tuple, CartanDatum] = {}


def _build_cached(label: str, rank: int, frozen_q) -> CartanDatum:
    key = (label, rank, frozen_q)
    if key not in _CARTAN_CACHE:
        q = None if frozen_q is None else {k: dict(v) for k, v in frozen_q}
        _CARTAN_CACHE[key] = CartanDatum(label, rank, q)
    return _CARTAN_CACHE[key]


def default_qparams(cd: CartanDatum) -> QParams:
    return QParams(default_qparams_table(cd.cartan_matrix))
