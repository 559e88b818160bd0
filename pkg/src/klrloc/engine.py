"""Normal forms in the quiver Hecke algebra R(β).

Every element is written in the basis tau_{red(w)} x^a e(nu) with the
idempotent on the right, where red(w) is a fixed reduced word of the
permutation w.  Positions and letters are 0-based: the letter l stands for
s_l, which swaps positions l and l+1, and x_k is the dot on strand k.

Permutations are tuples with w[k] = image of position k; a word
(l_1, ..., l_r) denotes s_{l_1} ... s_{l_r}, and tau_w e(nu) = e(w.nu) tau_w
with (w.nu)[w[k]] = nu[k].
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .cartan import CartanDatum

Perm = Tuple[int, ...]
Key = Tuple[Perm, Tuple[int, ...], Tuple[int, ...]]
Elem = Dict[Key, Fraction]
Move = Tuple[int, str]


# ---------------------------------------------------------------------------
# permutations


def identity(n: int) -> Perm:
    return tuple(range(n))


def compose(u: Perm, v: Perm) -> Perm:
    return tuple(u[v[k]] for k in range(len(v)))


def inverse(w: Perm) -> Perm:
    out = [0] * len(w)
    for k, x in enumerate(w):
        out[x] = k
    return tuple(out)


def transposition(n: int, l: int) -> Perm:
    t = list(range(n))
    t[l], t[l + 1] = t[l + 1], t[l]
    return tuple(t)


def left_mul_s(l: int, w: Perm) -> Perm:
    """s_l o w."""
    return tuple(l + 1 if x == l else l if x == l + 1 else x for x in w)


def perm_of_word(word: Sequence[int], n: int) -> Perm:
    w = identity(n)
    for l in reversed(word):
        w = left_mul_s(l, w)
    return w


def length(w: Perm) -> int:
    n = len(w)
    return sum(1 for a in range(n) for b in range(a + 1, n) if w[a] > w[b])


def is_left_descent(w: Perm, l: int) -> bool:
    inv = inverse(w)
    return inv[l] > inv[l + 1]


def act(w: Perm, nu: Sequence[int]) -> Tuple[int, ...]:
    out = [0] * len(nu)
    for k, c in enumerate(nu):
        out[w[k]] = c
    return tuple(out)


def act_word(word: Sequence[int], nu: Sequence[int]) -> Tuple[int, ...]:
    out = list(nu)
    for l in reversed(word):
        out[l], out[l + 1] = out[l + 1], out[l]
    return tuple(out)


def lex_reduced_word(w: Perm) -> Tuple[int, ...]:
    """Lexicographically smallest reduced word (smallest left descent first)."""
    out: List[int] = []
    n = len(w)
    while True:
        inv = inverse(w)
        l = next((l for l in range(n - 1) if inv[l] > inv[l + 1]), None)
        if l is None:
            return tuple(out)
        out.append(l)
        w = left_mul_s(l, w)


def shuffle_split(w: Perm, m: int) -> Tuple[Perm, Perm]:
    """w = d o u with u in S_m x S_n and d increasing on both blocks."""
    n = len(w)
    left = sorted(w[:m])
    right = sorted(w[m:])
    d = tuple(left + right)
    u = compose(inverse(d), w)
    return d, u


def parabolic_reduced_word(m: int) -> Callable[[Perm], Tuple[int, ...]]:
    """red(d) + red(u_1) + red(u_2) for the factorization w = d (u_1 x u_2)."""

    def red(w: Perm) -> Tuple[int, ...]:
        d, u = shuffle_split(w, m)
        u1 = u[:m]
        u2 = tuple(x - m for x in u[m:])
        return lex_reduced_word(d) + lex_reduced_word(u1) + tuple(l + m for l in lex_reduced_word(u2))

    return red


def shuffles(m: int, n: int) -> List[Perm]:
    """Minimal length coset representatives d of S_{m+n}/(S_m x S_n), by length."""
    from itertools import combinations

    out = []
    for pos in combinations(range(m + n), m):
        rest = [k for k in range(m + n) if k not in pos]
        out.append(tuple(pos) + tuple(rest))
    out.sort(key=lambda d: (length(d), d))
    return out


# ---------------------------------------------------------------------------
# word rewriting


class _Words:
    """Conversions between reduced words of one permutation via braid moves."""

    def __init__(self) -> None:
        self._start: Dict[Tuple[Tuple[int, ...], int], List[Move]] = {}
        self._to: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], List[Move]] = {}

    @staticmethod
    def apply(word: Tuple[int, ...], move: Move) -> Tuple[int, ...]:
        p, kind = move
        w = list(word)
        if kind == "c":
            w[p], w[p + 1] = w[p + 1], w[p]
        else:
            a, b = w[p], w[p + 1]
            w[p], w[p + 1], w[p + 2] = b, a, b
        return tuple(w)

    def start_with(self, U: Tuple[int, ...], a: int) -> List[Move]:
        key = (U, a)
        if key in self._start:
            return self._start[key]
        if not U:
            raise ValueError("letter is not a left descent")
        b = U[0]
        if b == a:
            moves: List[Move] = []
        elif abs(a - b) > 1:
            inner = [(p + 1, k) for p, k in self.start_with(U[1:], a)]
            moves = inner + [(0, "c")]
        else:
            m1 = [(p + 1, k) for p, k in self.start_with(U[1:], a)]
            U1 = U
            for mv in m1:
                U1 = self.apply(U1, mv)
            m2 = [(p + 2, k) for p, k in self.start_with(U1[2:], b)]
            moves = m1 + m2 + [(0, "b")]
        self._start[key] = moves
        return moves

    def moves_to(self, V: Tuple[int, ...], T: Tuple[int, ...]) -> List[Move]:
        key = (V, T)
        if key in self._to:
            return self._to[key]
        if V == T:
            out: List[Move] = []
        else:
            m1 = self.start_with(V, T[0])
            V1 = V
            for mv in m1:
                V1 = self.apply(V1, mv)
            out = m1 + [(p + 1, k) for p, k in self.moves_to(V1[1:], T[1:])]
        self._to[key] = out
        return out


def _add(out: Elem, other: Elem, c=1) -> None:
    for k, v in other.items():
        nv = out.get(k, 0) + c * v
        if nv == 0:
            out.pop(k, None)
        else:
            out[k] = nv


class KLREngine:
    """Left multiplication by generators on normal forms, memoized."""

    def __init__(self, cd: CartanDatum, n: int, red: Optional[Callable[[Perm], Tuple[int, ...]]] = None):
        self.cd = cd
        self.n = n
        self._red_fn = red or lex_reduced_word
        self._red: Dict[Perm, Tuple[int, ...]] = {}
        self._words = _Words()
        self._mx: Dict[Tuple[int, Key], Elem] = {}
        self._mt: Dict[Tuple[int, Key], Elem] = {}
        self._nfw: Dict[Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]], Elem] = {}

    def red(self, w: Perm) -> Tuple[int, ...]:
        r = self._red.get(w)
        if r is None:
            r = self._red_fn(w)
            self._red[w] = r
        return r

    # -- basic pieces ------------------------------------------------------
    def unit(self, nu: Sequence[int]) -> Elem:
        return {(identity(self.n), (0,) * self.n, tuple(nu)): Fraction(1)}

    def lmul_x(self, k: int, key: Key) -> Elem:
        mk = (k, key)
        if mk in self._mx:
            return self._mx[mk]
        w, a, nu = key
        W = self.red(w)
        r = len(W)
        mus = [None] * r
        cur = tuple(nu)
        for j in range(r - 1, -1, -1):
            mus[j] = cur
            l = W[j]
            cur = cur[:l] + (cur[l + 1], cur[l]) + cur[l + 2:]
        out: Elem = {}
        kk = k
        for j in range(r):
            l = W[j]
            mu = mus[j]
            if mu[l] == mu[l + 1]:
                coef = -((1 if kk == l else 0) - (1 if kk == l + 1 else 0))
                if coef:
                    sub = self.nf_word(W[j + 1:], a, nu)
                    sub = self.lmul_word_elem(W[:j], sub)
                    _add(out, sub, coef)
            if kk == l:
                kk = l + 1
            elif kk == l + 1:
                kk = l
        na = list(a)
        na[kk] += 1
        _add(out, {(w, tuple(na), nu): Fraction(1)})
        self._mx[mk] = out
        return out

    def lmul_tau(self, l: int, key: Key) -> Elem:
        mk = (l, key)
        if mk in self._mt:
            return self._mt[mk]
        w, a, nu = key
        out: Elem = {}
        if not is_left_descent(w, l):
            V = (l,) + self.red(w)
            w2 = left_mul_s(l, w)
            T = self.red(w2)
            _add(out, {(w2, a, nu): Fraction(1)})
            _add(out, self._move_corrections(V, T, a, nu))
        else:
            W = self.red(w)
            w2 = left_mul_s(l, w)
            W2 = (l,) + self.red(w2)
            corr = self._move_corrections(W2, W, a, nu)  # tau_{W2} = tau_W + corr
            mu = act(w2, nu)
            Q = self.cd.Q(mu[l], mu[l + 1])
            if Q:
                base = {(w2, a, nu): Fraction(1)}
                poly = {}
                for (p, q), c in Q.items():
                    e = [0] * self.n
                    e[l] += p
                    e[l + 1] += q
                    poly[tuple(e)] = c
                _add(out, self.lmul_poly(poly, base))
            _add(out, self.lmul_tau_elem(l, corr), -1)
        self._mt[mk] = out
        return out

    def _move_corrections(self, V: Tuple[int, ...], T: Tuple[int, ...], a, nu) -> Elem:
        """tau_V x^a e(nu) - tau_T x^a e(nu) as a normal form."""
        out: Elem = {}
        if V == T:
            return out
        U = V
        for mv in self._words.moves_to(V, T):
            p, kind = mv
            if kind == "b":
                tail = U[p + 3:]
                mu = act_word(tail, nu)
                x, y = U[p], U[p + 1]
                k = min(x, y)
                if mu[k] == mu[k + 2]:
                    sign = 1 if x > y else -1  # (k+1,k,k+1) -> (k,k+1,k) gains +Qbar
                    Qb = self.cd.Qbar(mu[k], mu[k + 1])
                    if Qb:
                        poly = {}
                        for (e0, e1, e2), c in Qb.items():
                            e = [0] * self.n
                            e[k] += e0
                            e[k + 1] += e1
                            e[k + 2] += e2
                            poly[tuple(e)] = c
                        sub = self.nf_word(tail, a, nu)
                        sub = self.lmul_poly(poly, sub)
                        sub = self.lmul_word_elem(U[:p], sub)
                        _add(out, sub, sign)
            U = self._words.apply(U, mv)
        return out

    # -- compound operations -------------------------------------------------
    def lmul_x_elem(self, k: int, elem: Elem) -> Elem:
        out: Elem = {}
        for key, c in elem.items():
            _add(out, self.lmul_x(k, key), c)
        return out

    def lmul_tau_elem(self, l: int, elem: Elem) -> Elem:
        out: Elem = {}
        for key, c in elem.items():
            _add(out, self.lmul_tau(l, key), c)
        return out

    def lmul_word_elem(self, word: Sequence[int], elem: Elem) -> Elem:
        for l in reversed(tuple(word)):
            elem = self.lmul_tau_elem(l, elem)
        return elem

    def lmul_poly(self, poly: Dict[Tuple[int, ...], Fraction], elem: Elem) -> Elem:
        out: Elem = {}
        for e, c in poly.items():
            cur = elem
            for k, p in enumerate(e):
                for _ in range(p):
                    cur = self.lmul_x_elem(k, cur)
            _add(out, cur, c)
        return out

    def nf_word(self, word: Tuple[int, ...], a: Tuple[int, ...], nu: Tuple[int, ...]) -> Elem:
        """Normal form of tau_{word} x^a e(nu) for an arbitrary word."""
        word = tuple(word)
        mk = (word, a, nu)
        if mk in self._nfw:
            return self._nfw[mk]
        if not word:
            out = {(identity(self.n), tuple(a), tuple(nu)): Fraction(1)}
        else:
            w = perm_of_word(word, self.n)
            if len(word) == length(w) and self.red(w) == word:
                out = {(w, tuple(a), tuple(nu)): Fraction(1)}
            else:
                out = self.lmul_tau_elem(word[0], self.nf_word(word[1:], a, nu))
        self._nfw[mk] = out
        return out

    def apply_generator(self, gen: Tuple[str, int], elem: Elem) -> Elem:
        kind, idx = gen
        if kind == "x":
            return self.lmul_x_elem(idx, elem)
        if kind == "t":
            return self.lmul_tau_elem(idx, elem)
        raise ValueError(f"unknown generator {gen}")

    def normal_form(self, word: Sequence[Tuple[str, int]], nu: Sequence[int]) -> Elem:
        """Normal form of g_1 g_2 ... g_r e(nu) (generators applied right to left)."""
        elem = self.unit(nu)
        for g in reversed(list(word)):
            elem = self.apply_generator(g, elem)
        return elem

    def degree(self, key: Key) -> int:
        w, a, nu = key
        d = sum(a[k] * self.cd.form(nu[k], nu[k]) for k in range(self.n))
        cur = tuple(nu)
        for l in reversed(self.red(w)):
            d += self.cd.lam(cur[l], cur[l + 1])
            cur = cur[:l] + (cur[l + 1], cur[l]) + cur[l + 2:]
        return d


_ENGINES: Dict[tuple, KLREngine] = {}


def engine_for(cd: CartanDatum, n: int, split: Optional[int] = None) -> KLREngine:
    """Shared engine; `split` selects the parabolic reduced words for S_m x S_{n-m}."""
    key = (id(cd), n, split)
    eng = _ENGINES.get(key)
    if eng is None:
        red = parabolic_reduced_word(split) if split is not None else lex_reduced_word
        eng = KLREngine(cd, n, red)
        _ENGINES[key] = eng
    return eng


def format_elem(elem: Elem, engine: KLREngine) -> str:
    parts = []
    for (w, a, nu), c in sorted(elem.items(), key=lambda t: (length(t[0][0]), t[0])):
        word = engine.red(w)
        s = "".join(f"τ{l + 1}" for l in word)
        s += "".join(f"x{k + 1}" + (f"^{p}" if p > 1 else "") for k, p in enumerate(a) if p)
        s += f"e{tuple(nu)}"
        parts.append(f"{c}*{s}" if c != 1 else s)
    return " + ".join(parts) if parts else "0"
