"""Determinantial modules, central objects and simples of the localized categories.

Weights are tuples in fundamental-weight coordinates.  For a fixed index i
with w = s_i w_0 the two families of central objects are

    C_Lam  = D(s_i w_0 Lam, Lam)      (plain side)
    C*_Lam = D(w_0 Lam, s_i Lam)      (star side)

and a simple object of the localization is stored as a pair (Lam, S) with S a
simple module: it stands for C_Lam o S on the plain side and S o C*_Lam on the
star side, Lam being any integral weight.

Display names follow the crystal: <a_1 ... a_n> is F~_{a_1} ... F~_{a_n} of the
trivial module, with runs written as powers, so <21^2 2> is F~_2 F~_1 F~_1 F~_2 (1).
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .cartan import CartanDatum
from .convolution import (
    DEFAULT_MAX_DIM,
    Crystal,
    divided_power_left,
    divided_power_right,
    eps,
    eps_star,
    head_of_product,
    lambda_simple,
)
from .klr import KLRModule, ModuleError, character_key

Weight = Tuple[int, ...]

PLAIN = "plain"
STAR = "star"


class Undetermined(ModuleError):
    """A computation whose hypotheses could not be certified (never reported as zero)."""


# ---------------------------------------------------------------------------
# weight helpers


def wadd(a: Sequence[int], b: Sequence[int]) -> Weight:
    return tuple(x + y for x, y in zip(a, b))


def wsub(a: Sequence[int], b: Sequence[int]) -> Weight:
    return tuple(x - y for x, y in zip(a, b))


def wscale(k: int, a: Sequence[int]) -> Weight:
    return tuple(k * x for x in a)


def module_weight(M: KLRModule) -> Weight:
    cd = M.cd
    return (0,) * cd.rank if M.n == 0 else M.weight()


# ---------------------------------------------------------------------------
# determinantial modules


def _check_reduced(cd: CartanDatum, word: Sequence[int]) -> None:
    if cd.length(word) != len(word):
        raise ModuleError(f"word {tuple(word)} is not reduced")


def determinantial_lower(cr: Crystal, Lam: Sequence[int], w_word: Sequence[int]) -> KLRModule:
    """D(w Lam, Lam) via D(s_j v Lam, Lam) = F~_j^{<h_j, v Lam>} D(v Lam, Lam)."""
    cd = cr.cd
    if not cd.is_dominant(Lam):
        raise ModuleError(f"{tuple(Lam)} is not dominant")
    _check_reduced(cd, w_word)
    M = cr.trivial
    lam = tuple(Lam)
    for j in reversed(list(w_word)):
        n = lam[j - 1]
        if n < 0:
            raise ModuleError("reduced word does not increase the length on Lam")
        M = cr.F_power(j, M, n)
        lam = cd.reflect(j, lam)
    return M


def determinantial(cr: Crystal, Lam: Sequence[int], w_word: Sequence[int], v_word: Sequence[int] = ()) -> KLRModule:
    """D(w Lam, v Lam) for v <= w.

    Built from D(w Lam, Lam) by stripping, for v = s_{k_1} ... s_{k_t}, the right
    factors L(k^{(n)}) with n = <h_k, v' Lam> in the order k_t, ..., k_1."""
    cd = cr.cd
    _check_reduced(cd, v_word)
    if not cd.bruhat_leq(v_word, w_word):
        raise ModuleError(f"{tuple(v_word)} is not below {tuple(w_word)} in the Bruhat order")
    M = determinantial_lower(cr, Lam, w_word)
    lam = tuple(Lam)
    for k in reversed(list(v_word)):
        n = lam[k - 1]
        if n:
            e = eps_star(M, k)
            if e != n:
                raise ModuleError(f"expected eps*_{k} = {n}, found {e}")
            M = divided_power_right(M, k, n)
        lam = cd.reflect(k, lam)
    return M


# ---------------------------------------------------------------------------
# central objects


class Centrals:
    """Central objects for a fixed i and side, with fundamental ones cached."""

    def __init__(self, cr: Crystal, i: int, side: str):
        if side not in (PLAIN, STAR):
            raise ValueError(side)
        self.cr = cr
        self.cd = cr.cd
        self.i = i
        self.side = side
        self.w0 = self.cd.w0_starting_with(i)  # s_i w_0 ... first letter i
        self._cache: Dict[Weight, KLRModule] = {}

    @property
    def w(self) -> Tuple[int, ...]:
        """Reduced word of s_i w_0."""
        return self.w0[1:]

    def module(self, Lam: Sequence[int]) -> KLRModule:
        Lam = tuple(Lam)
        if not self.cd.is_dominant(Lam):
            raise ModuleError(f"central object needs a dominant weight, got {Lam}")
        if Lam not in self._cache:
            if self.side == PLAIN:
                self._cache[Lam] = determinantial(self.cr, Lam, self.w)
            else:
                self._cache[Lam] = determinantial(self.cr, Lam, self.w0, (self.i,))
        return self._cache[Lam]

    def fundamental(self, j: int) -> KLRModule:
        return self.module(self.cd.fundamental(j))

    def weight(self, Lam: Sequence[int]) -> Weight:
        """wt C_Lam, linear in Lam."""
        cd = self.cd
        if self.side == PLAIN:
            return wsub(cd.weyl_act(self.w, Lam), Lam)
        return wsub(cd.weyl_act(self.w0, Lam), cd.reflect(self.i, Lam))

    def braid_form(self, Lam: Sequence[int]) -> Weight:
        """The weight pairing against wt(Y) in the braider degree.

        Plain side: Lambda(C_Lam, Y) = -(w Lam + Lam, wt Y).
        Star side: Lambda(Y, C*_Lam) = (w_0 Lam + s_i Lam, wt Y)."""
        cd = self.cd
        if self.side == PLAIN:
            return wadd(cd.weyl_act(self.w, Lam), Lam)
        return wadd(cd.weyl_act(self.w0, Lam), cd.reflect(self.i, Lam))

    def lam_central_left(self, Lam: Sequence[int], Y_wt: Sequence[int]) -> int:
        """Lambda(C_Lam, Y) for Y in the category (bilinear extension)."""
        v = -self.cd.pair_weights(self.braid_form(Lam), Y_wt)
        assert v.denominator == 1
        return int(v)

    def lam_central_right(self, Y_wt: Sequence[int], Lam: Sequence[int]) -> int:
        """Lambda(Y, C_Lam) = -Lambda(C_Lam, Y) for Y in the category."""
        return -self.lam_central_left(Lam, Y_wt)

    def in_category(self, M: KLRModule) -> bool:
        return (eps(M, self.i) if self.side == PLAIN else eps_star(M, self.i)) == 0


# ---------------------------------------------------------------------------
# characters of products


def shuffle_character(cd: CartanDatum, a: Mapping[Tuple, int], b: Mapping[Tuple, int]) -> Counter:
    """The graded character of M o N from those of M and N.

    Letters of the right factor that pass to the left of a letter of the
    left factor contribute -(alpha, alpha') to the degree."""
    out: Counter = Counter()
    for (u, du), ca in a.items():
        for (v, dv), cb in b.items():
            for word, d in _shuffles(cd, tuple(u), tuple(v)):
                out[(word, du + dv + d)] += ca * cb
    return out


@lru_cache(maxsize=None)
def _shuffles_cached(cd: CartanDatum, u: Tuple[int, ...], v: Tuple[int, ...]) -> Tuple[Tuple[Tuple[int, ...], int], ...]:
    if not u:
        return ((v, 0),)
    if not v:
        return ((u, 0),)
    res = []
    # first letter from u
    for w, d in _shuffles_cached(cd, u[1:], v):
        res.append(((u[0],) + w, d))
    # first letter from v: it passes every remaining letter of u
    cost = -sum(cd.form(x, v[0]) for x in u)
    for w, d in _shuffles_cached(cd, u, v[1:]):
        res.append(((v[0],) + w, d + cost))
    return tuple(res)


def _shuffles(cd, u, v):
    return _shuffles_cached(cd, u, v)


def char_power(cd: CartanDatum, ch: Counter, k: int) -> Counter:
    out = Counter({((), 0): 1})
    for _ in range(k):
        out = shuffle_character(cd, out, ch)
    return out


# ---------------------------------------------------------------------------
# simples of the localization


@dataclass(frozen=True)
class LocSimple:
    side: str
    i: int
    lam: Weight
    S: Optional[KLRModule]  # None encodes the zero object

    @property
    def is_zero(self) -> bool:
        return self.S is None

    def weight(self, cent: Centrals) -> Weight:
        return wadd(module_weight(self.S), cent.weight(self.lam))

    def __repr__(self) -> str:
        if self.is_zero:
            return "LocSimple(0)"
        return f"LocSimple({self.side}, i={self.i}, lam={self.lam}, S={self.S.key()[:1]}...)"


def zero(side: str, i: int, rank: int) -> LocSimple:
    return LocSimple(side, i, (0,) * rank, None)


def _split_pos(lam: Sequence[int]) -> Tuple[Weight, Weight]:
    return tuple(max(x, 0) for x in lam), tuple(max(-x, 0) for x in lam)


class Localizer:
    """Normal forms, equality and Lambda for simples of one localized category."""

    def __init__(self, cr: Crystal, i: int, side: str, max_dim: int = DEFAULT_MAX_DIM, search_bound: int = 3):
        self.cr = cr
        self.cd = cr.cd
        self.i = i
        self.side = side
        self.cent = Centrals(cr, i, side)
        self.max_dim = max_dim
        self.search_bound = search_bound
        self._lam_cache: Dict[Tuple, int] = {}
        self._norm_cache: Dict[Tuple, LocSimple] = {}
        self._char_cache: Dict[Weight, Counter] = {}

    # ---- basic pieces -------------------------------------------------
    def lam_modules(self, M: KLRModule, N: KLRModule) -> int:
        key = (M.key(), N.key())
        if key not in self._lam_cache:
            self._lam_cache[key] = lambda_simple(M, N, self.max_dim)
        return self._lam_cache[key]

    def head(self, M: KLRModule, N: KLRModule) -> KLRModule:
        return head_of_product(M, N, self.max_dim)

    def make(self, lam: Sequence[int], S: KLRModule) -> LocSimple:
        return LocSimple(self.side, self.i, tuple(lam), S)

    def zero(self) -> LocSimple:
        return zero(self.side, self.i, self.cd.rank)

    def central_product(self, H: KLRModule, mu: Sequence[int]) -> KLRModule:
        """hd(C_mu o H) (plain) or hd(H o C*_mu) (star)."""
        if not any(mu):
            return H
        C = self.cent.module(mu)
        return self.head(C, H) if self.side == PLAIN else self.head(H, C)

    def braider_ok(self, H: KLRModule) -> Tuple[bool, Optional[int]]:
        """Do all fundamental braiders act on H by their r-matrices?

        The braider for C_j has degree given by the linear formula.  It
        specializes a power of z times the renormalized R-matrix, so it is the
        r-matrix when Lambda(C_j, H) equals that degree and vanishes when Lambda
        is smaller."""
        wt = module_weight(H)
        for j in self.cd.index_set:
            C = self.cent.fundamental(j)
            if self.side == PLAIN:
                actual = self.lam_modules(C, H)
                expected = self.cent.lam_central_left(self.cd.fundamental(j), wt)
            else:
                actual = self.lam_modules(H, C)
                expected = self.cent.lam_central_right(wt, self.cd.fundamental(j))
            if actual > expected:
                raise ModuleError(f"Lambda exceeds the braider degree for C_{j}")
            if actual != expected:
                return False, j
        return True, None

    # ---- normal form --------------------------------------------------
    def normalize_module(self, H: KLRModule) -> LocSimple:
        """The image of a simple module in the localization: zero or (lam, S) with S in the category."""
        key = H.key()
        if key in self._norm_cache:
            return self._norm_cache[key]
        rank = self.cd.rank
        if self.cent.in_category(H):
            out = self.make((0,) * rank, H)
        else:
            ok, _ = self.braider_ok(H)
            if not ok:
                out = self.zero()
            else:
                out = None
                for mu in self._search_weights():
                    S = self.central_product(H, mu)
                    if self.cent.in_category(S):
                        out = self.make(wscale(-1, mu), S)
                        break
                if out is None:
                    raise Undetermined(f"no central weight up to {self.search_bound} moves the module into the category")
        self._norm_cache[key] = out
        return out

    def _search_weights(self) -> Iterable[Weight]:
        rank = self.cd.rank
        cands = [mu for mu in product(range(self.search_bound + 1), repeat=rank) if any(mu)]
        cands.sort(key=lambda m: (sum(m), m))
        return cands

    def normalize(self, x: LocSimple) -> LocSimple:
        """Bring (lam, S) with an arbitrary simple S into normal form."""
        if x.is_zero:
            return x
        y = self.normalize_module(x.S)
        if y.is_zero:
            return y
        return self.make(wadd(x.lam, y.lam), y.S)

    # ---- equality -----------------------------------------------------
    def central_character(self, Lam: Sequence[int]) -> Counter:
        Lam = tuple(Lam)
        if Lam not in self._char_cache:
            ch = Counter({((), 0): 1})
            for j in self.cd.index_set:
                if Lam[j - 1]:
                    ch = shuffle_character(self.cd, ch, char_power(self.cd, self.cent.fundamental(j).character(), Lam[j - 1]))
            self._char_cache[Lam] = ch
        return self._char_cache[Lam]

    def _char_with(self, x: LocSimple, mu: Sequence[int]) -> Tuple:
        C = self.central_character(wadd(x.lam, mu))
        S = x.S.character()
        ch = shuffle_character(self.cd, C, S) if self.side == PLAIN else shuffle_character(self.cd, S, C)
        return character_key(ch)

    def equal(self, a: LocSimple, b: LocSimple) -> bool:
        """Isomorphism up to grading shift, compared after clearing denominators."""
        a, b = self.normalize(a), self.normalize(b)
        if a.is_zero or b.is_zero:
            return a.is_zero and b.is_zero
        if a.weight(self.cent) != b.weight(self.cent):
            return False
        mu = tuple(max(0, -x, -y) for x, y in zip(a.lam, b.lam))
        return self._char_with(a, mu) == self._char_with(b, mu)

    # ---- Lambda -------------------------------------------------------
    def lam(self, a: Union[LocSimple, KLRModule], b: Union[LocSimple, KLRModule]) -> int:
        """Lambda on localized simples, extended bilinearly through the central factors."""
        a = a if isinstance(a, LocSimple) else self.make((0,) * self.cd.rank, a)
        b = b if isinstance(b, LocSimple) else self.make((0,) * self.cd.rank, b)
        if a.is_zero or b.is_zero:
            raise ModuleError("Lambda is not defined for the zero object")
        c = self.cent
        wa, wb = module_weight(a.S), module_weight(b.S)
        val = self.lam_modules(a.S, b.S) if a.S.n and b.S.n else 0
        val += c.lam_central_right(wa, b.lam)
        val += c.lam_central_left(a.lam, wb)
        val += c.lam_central_left(a.lam, c.weight(b.lam))
        return val

    # ---- products -----------------------------------------------------
    def head_product(self, a: LocSimple, b: LocSimple) -> LocSimple:
        """a o^ b in the localization: the image of hd(S_a o S_b), central parts added."""
        if a.is_zero or b.is_zero:
            return self.zero()
        H = self.head(a.S, b.S)
        y = self.normalize_module(H)
        if y.is_zero:
            raise Undetermined("the head of the module product dies in the localization")
        return self.make(wadd(wadd(a.lam, b.lam), y.lam), y.S)

    # ---- images of modules ------------------------------------------------
    def localize(self, M: KLRModule) -> LocSimple:
        return self.normalize_module(M)


def loc_equal(loc: Localizer, a: LocSimple, b: LocSimple) -> bool:
    return loc.equal(a, b)


# ---------------------------------------------------------------------------
# cuspidal modules


def cuspidals(cr: Crystal, word: Sequence[int]) -> List[KLRModule]:
    """D(s_{i_1}...s_{i_k} Lam_{i_k}, s_{i_1}...s_{i_{k-1}} Lam_{i_k}) for k = 1..len(word)."""
    cd = cr.cd
    out = []
    for k in range(1, len(word) + 1):
        j = word[k - 1]
        out.append(determinantial(cr, cd.fundamental(j), word[:k], word[: k - 1]))
    return out


def cuspidal_decompose(cr: Crystal, M: KLRModule, word: Sequence[int], cusp: Optional[List[KLRModule]] = None,
                       max_dim: int = DEFAULT_MAX_DIM) -> Tuple[int, ...]:
    """Exponents a with M = hd(S_N^{a_N} o ... o S_1^{a_1}) (S_1 rightmost).

    Found by exhaustive search over the exponent vectors of the right weight."""
    cd = cr.cd
    cusp = cusp if cusp is not None else cuspidals(cr, word)
    N = len(cusp)
    target = M.beta if M.n else (0,) * cd.rank
    roots = [S.beta for S in cusp]
    key = M.key()
    for a in _partitions(roots, tuple(target)):
        H = cr.trivial
        for k in reversed(range(N)):
            for _ in range(a[k]):
                H = head_of_product(H, cusp[k], max_dim) if H.n else cusp[k]
        if H.key() == key:
            return a
    raise ModuleError("no cuspidal decomposition found")


def _partitions(roots: Sequence[Tuple[int, ...]], target: Tuple[int, ...]) -> Iterable[Tuple[int, ...]]:
    n = len(roots)

    def rec(k: int, left: Tuple[int, ...]):
        if k == n:
            if not any(left):
                yield ()
            return
        r = roots[k]
        c = 0
        while all(x >= 0 for x in left):
            for rest in rec(k + 1, left):
                yield (c,) + rest
            left = tuple(x - y for x, y in zip(left, r))
            c += 1

    yield from rec(0, target)


# ---------------------------------------------------------------------------
# names and rendering


_SUP = str.maketrans("0123456789-", "⁰¹²³⁴⁵⁶⁷⁸⁹⁻")
_UNSUP = {v: k for k, v in zip("0123456789-", "⁰¹²³⁴⁵⁶⁷⁸⁹⁻")}


def word_name(word: Sequence[int]) -> str:
    """(2, 1, 1, 2) -> '21²2' (runs as superscript powers)."""
    out = []
    k = 0
    w = list(word)
    while k < len(w):
        r = k
        while r < len(w) and w[r] == w[k]:
            r += 1
        out.append(str(w[k]) + (str(r - k).translate(_SUP) if r - k > 1 else ""))
        k = r
    return "".join(out)


def parse_word(text: str) -> Tuple[int, ...]:
    """Inverse of word_name; also accepts ASCII powers such as '21^22'."""
    out: List[int] = []
    k = 0
    while k < len(text):
        ch = text[k]
        if not ch.isdigit():
            raise ValueError(f"bad letter {ch!r} in {text!r}")
        letter = int(ch)
        k += 1
        power = ""
        if k < len(text) and text[k] == "^":
            k += 1
            while k < len(text) and text[k].isdigit():
                power += text[k]
                k += 1
                break
        else:
            while k < len(text) and text[k] in _UNSUP:
                power += _UNSUP[text[k]]
                k += 1
        out.extend([letter] * (int(power) if power else 1))
    return tuple(out)


class Names:
    """Display names of simple modules and the modules behind bracket names.

    Different words can name the same simple (e.g. <2132> and <2312> in A3);
    rendering always uses the greedy path so output does not depend on input spelling."""

    def __init__(self, cr: Crystal):
        self.cr = cr
        self._greedy: Dict[Tuple, Tuple[int, ...]] = {}

    def register(self, word: Sequence[int]) -> KLRModule:
        return self.cr.path(word)

    def word(self, M: KLRModule) -> Tuple[int, ...]:
        """The lexicographically greedy crystal path (smallest i with eps_i > 0 first)."""
        k = M.key()
        if k in self._greedy:
            return self._greedy[k]
        out: List[int] = []
        cur = M
        while cur.n:
            j = next(j for j in self.cr.cd.index_set if eps(cur, j) > 0)
            out.append(j)
            cur = self.cr.E_tilde(j, cur)
        self._greedy[k] = tuple(out)
        return self._greedy[k]

    def name(self, M: KLRModule) -> str:
        return "⟨" + word_name(self.word(M)) + "⟩"


def render(x: LocSimple, loc: Localizer, names: Names) -> str:
    """S o C*_{pos} o C*_{neg}^{-1} (star) or C_{pos} o S o ... (plain), in bracket notation."""
    if x.is_zero:
        return "0"
    parts: List[str] = []
    pos, neg = _split_pos(x.lam)

    def cpart(lam: Weight, sign: int) -> List[str]:
        out = []
        for j in loc.cd.index_set:
            k = lam[j - 1]
            if k:
                nm = names.name(loc.cent.fundamental(j))
                e = sign * k
                out.append(nm if e == 1 else nm + ("^{%d}" % e if e < 0 else "%s" % str(e).translate(_SUP)))
        return out

    S = [] if x.S.n == 0 else [names.name(x.S)]
    if loc.side == STAR:
        parts = S + cpart(pos, 1) + cpart(neg, -1)
    else:
        parts = cpart(neg, -1) + cpart(pos, 1) + S
    return "∘".join(parts) if parts else "1"


_FACTOR = re.compile(r"⟨([^⟩]*)⟩(?:\^\{(-?\d+)\}|\^(-?\d+)|([⁰¹²³⁴⁵⁶⁷⁸⁹⁻]+))?")


def parse_expression(text: str) -> Optional[List[Tuple[Tuple[int, ...], int]]]:
    """'⟨2⟩∘⟨12⟩^{-1}' -> [((2,), 1), ((1, 2), -1)]; '0' -> None."""
    text = text.strip().replace("−", "-")
    if text == "0":
        return None
    if text == "1":
        return []
    out = []
    for part in text.split("∘"):
        m = _FACTOR.fullmatch(part.strip())
        if not m:
            raise ValueError(f"cannot parse factor {part!r}")
        word = parse_word(m.group(1))
        e = m.group(2) or m.group(3)
        if e is None and m.group(4):
            e = "".join(_UNSUP[ch] for ch in m.group(4))
        out.append((word, int(e) if e else 1))
    return out


def from_expression(text: str, loc: Localizer, names: Names) -> LocSimple:
    """The localized simple named by a product of bracket factors.

    Factors isomorphic to a fundamental central object contribute to the
    weight; the remaining factors are multiplied (heads, left to right)."""
    fac = parse_expression(text)
    if fac is None:
        return loc.zero()
    cd = loc.cd
    central_keys = {loc.cent.fundamental(j).key(): j for j in cd.index_set}
    lam = [0] * cd.rank
    S = loc.cr.trivial
    for word, e in fac:
        M = names.register(word)
        j = central_keys.get(M.key())
        if j is not None:
            lam[j - 1] += e
            continue
        if e < 0:
            raise ValueError(f"inverse of a non-central factor {word}")
        for _ in range(e):
            S = loc.head(S, M) if S.n else M
    return loc.normalize(loc.make(tuple(lam), S))
