"""The Saito reflection and the reflection functor on simple objects.

F_i sends a simple module M to a simple of the star localization at s_i w_0
(or to zero).  On simples with eps_i(M) = 0 it is the Saito reflection
sigma_i(M) = F~_i^{phi*_i(M)} E~*_i^{eps*_i(M)} M.  Otherwise, with N = E~_i M,
F_i(M) is K_i o^ F_i(N) when Lambda(K_i, F_i(N)) = Lambda(<i>, N) and zero if
this equality fails.  Here K_i = (E_i C*_{i*}) o C*_{i*}^{-1}.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .affinization import TruncAff, affine_L, lemij_affinize, rank1_affinize, shift_affinize
from .cartan import CartanDatum
from .convolution import DEFAULT_MAX_DIM, Crystal, catalog, eps, eps_star, head_of_product, phi_star
from .detloc import (
    PLAIN,
    STAR,
    Localizer,
    LocSimple,
    Names,
    Undetermined,
    cuspidals,
    determinantial,
    from_expression,
    parse_expression,
    render,
    wadd,
    wsub,
)
from .klr import KLRModule, ModuleError, make_L
from .linalg import Field
from .polyres import Poly

TABLE_DIR = Path(os.environ.get("KLRLOC_TABLES", Path(__file__).resolve().parents[2] / "tables"))

# (type, i) pairs with shipped tables
SUPPORTED = (("A2", 1), ("A3", 1), ("A3", 2), ("C2", 1), ("C2", 2))


def saito(cr: Crystal, i: int, M: KLRModule) -> KLRModule:
    """sigma_i(M) for a simple M with eps_i(M) = 0."""
    if eps(M, i) != 0:
        raise ModuleError(f"Saito reflection needs eps_{i}(M) = 0")
    f = phi_star(M, i)
    S = cr.E_star_power(i, M, eps_star(M, i))
    return cr.F_power(i, S, f)


class Reflection:
    """F_i on simple modules, with values in the star localization."""

    def __init__(self, cr: Crystal, i: int, max_dim: int = DEFAULT_MAX_DIM, search_bound: int = 3):
        self.cr = cr
        self.cd = cr.cd
        self.i = i
        self.max_dim = max_dim
        self.star = Localizer(cr, i, STAR, max_dim, search_bound)
        self.plain = Localizer(cr, i, PLAIN, max_dim, search_bound)
        self.names = Names(cr)
        self._memo: Dict[Tuple, LocSimple] = {}
        self._K: Dict[int, LocSimple] = {}

    # ---- K objects ---------------------------------------------------
    @property
    def istar(self) -> int:
        return self.cd.star(self.i)

    def A(self) -> KLRModule:
        """E_i C*_{i*}: the module part of K_i."""
        C = self.star.cent.fundamental(self.istar)
        A = self.cr.E_tilde(self.i, C)
        if A is None or eps(C, self.i) != 1:
            raise ModuleError("C*_{i*} should have eps_i = 1")
        return A

    def K(self, j: int) -> LocSimple:
        if j not in self._K:
            if j == self.i:
                lam = tuple(-x for x in self.cd.fundamental(self.istar))
                self._K[j] = self.star.make(lam, self.A())
            else:
                a = -self.cd.c(self.i, j)
                M = head_of_product(make_L(self.cd, self.cr.F, self.i, a), self.cr.L(j), self.max_dim) if a else self.cr.L(j)
                self._K[j] = self.star.normalize_module(M)
        return self._K[j]

    # ---- the recursion -------------------------------------------------
    def simple(self, M: KLRModule) -> LocSimple:
        key = M.key()
        if key in self._memo:
            return self._memo[key]
        i = self.i
        if eps(M, i) == 0:
            out = self.star.make((0,) * self.cd.rank, saito(self.cr, i, M))
        else:
            N = self.cr.E_tilde(i, M)
            X = self.simple(N)
            if X.is_zero:
                out = self.star.zero()
            else:
                lhs = self.star.lam(self.K(i), X)
                rhs = self.star.lam_modules(self.cr.L(i), N) if N.n else 0
                out = self.star.head_product(self.K(i), X) if lhs == rhs else self.star.zero()
        self._memo[key] = out
        return out

    def __call__(self, x) -> LocSimple:
        """F_i of a simple module or of a plain-side localized simple C_lam o S."""
        if isinstance(x, KLRModule):
            return self.simple(x)
        if x.side != PLAIN or x.i != self.i:
            raise ModuleError("input must be a plain-side simple for the same i")
        if x.is_zero:
            return self.star.zero()
        y = self.simple(x.S)
        if y.is_zero:
            raise Undetermined("the reflection of a plain-side simple vanished")
        return self.star.make(wadd(y.lam, x.lam), y.S)

    # ---- parsing of table sources ---------------------------------------
    def source(self, text: str):
        """A row source: a module, or a plain localized simple when inverses occur."""
        fac = parse_expression(text)
        if fac is None:
            raise ValueError("a table source cannot be zero")
        if any(e < 0 for _, e in fac):
            return from_expression(text, self.plain, self.names)
        S = self.cr.trivial
        for word, e in fac:
            M = self.names.register(word)
            for _ in range(e):
                S = head_of_product(S, M, self.max_dim) if S.n else M
        return S

    def target(self, text: str) -> LocSimple:
        return from_expression(text, self.star, self.names)

    def render(self, x: LocSimple) -> str:
        return render(self.canonical(x), self.star, self.names)

    def canonical(self, x: LocSimple) -> LocSimple:
        """Move fundamental central factors out of S where possible (display only)."""
        if x.is_zero:
            return x
        lam, S = list(x.lam), x.S
        changed = True
        while changed and S.n:
            changed = False
            for j in self.cd.index_set:
                P = self._divide(S, j)
                if P is not None:
                    S, lam[j - 1] = P, lam[j - 1] + 1
                    changed = True
                    break
        return self.star.make(tuple(lam), S)

    def _divide(self, S: KLRModule, j: int) -> Optional[KLRModule]:
        C = self.star.cent.fundamental(j)
        beta = tuple(a - b for a, b in zip(S.beta, C.beta))
        if any(b < 0 for b in beta):
            return None
        if not any(beta):
            return self.cr.trivial if C.key() == S.key() else None
        for P in _catalog_by_beta(self.cr, sum(beta)).get(beta, []):
            if eps_star(P, self.i) == 0 and head_of_product(P, C, self.max_dim).key() == S.key():
                return P
        return None


_CATALOGS: Dict[Tuple, Dict[int, List[KLRModule]]] = {}


def _catalog_by_beta(cr: Crystal, height: int) -> Dict[Tuple[int, ...], List[KLRModule]]:
    key = (id(cr), height)
    if key not in _CATALOGS:
        levels = catalog(cr, height)
        by: Dict[Tuple[int, ...], List[KLRModule]] = {}
        for M in levels.get(height, []):
            by.setdefault(tuple(M.beta), []).append(M)
        _CATALOGS[key] = by
    return _CATALOGS[key]


# ---------------------------------------------------------------------------
# tables


@dataclass
class Row:
    source: str
    expected: str
    computed: str
    ok: bool
    note: str = ""


@dataclass
class ReflectionTable:
    type: str
    i: int
    rows: List[Row] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def text(self) -> str:
        out = [f"# {self.type} i={self.i}"]
        for r in self.rows:
            flag = "ok" if r.ok else "MISMATCH"
            extra = f"  ({r.note})" if r.note else ""
            out.append(f"{r.source} ↦ {r.computed}    [{flag}; expected {r.expected}]{extra}")
        return "\n".join(out)


def table_path(type_: str, i: int, directory: Optional[Path] = None) -> Path:
    return (directory or TABLE_DIR) / f"{type_}_{i}.txt"


def read_table(path: Path) -> List[Tuple[str, str]]:
    rows = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        src, _, tgt = line.partition("↦")
        if not tgt:
            raise ValueError(f"bad table line {line!r}")
        rows.append((src.strip(), tgt.strip()))
    return rows


def reflect_table(refl: Reflection, type_: str, rows: Sequence[Tuple[str, str]]) -> ReflectionTable:
    tab = ReflectionTable(type_, refl.i)
    for src, tgt in rows:
        note = ""
        try:
            got = refl(refl.source(src))
            exp = refl.target(tgt)
            ok = refl.star.equal(got, exp)
            computed = refl.render(got)
        except Undetermined as exc:
            ok, computed, note = False, "undetermined", str(exc)
        tab.rows.append(Row(src, tgt, computed, ok, note))
    return tab


def make_reflection(cd: CartanDatum, F: Field, i: int, **kw) -> Reflection:
    return Reflection(Crystal(cd, F), i, **kw)


# ---------------------------------------------------------------------------
# Lambda(K_j, K_k)


def lakk_table(refl: Reflection) -> Dict[Tuple[int, int], Tuple[int, int]]:
    """(j, k) -> (Lambda(K_j, K_k), expected value)."""
    cd = refl.cd
    out = {}
    a2 = cd.name == "A2"
    for j in cd.index_set:
        for k in cd.index_set:
            got = refl.star.lam(refl.K(j), refl.K(k))
            # the A2 value -1 sits at Lambda(K_i, K_j); Lambda(K_j, K_i) = Lambda(<j>, <i>)
            if a2 and j != k and j == refl.i:
                exp = -1
            else:
                exp = refl.star.lam_modules(refl.cr.L(j), refl.cr.L(k))
            out[(j, k)] = (got, exp)
    return out


# ---------------------------------------------------------------------------
# affinizations of the K objects


def _q_in(cd: CartanDatum, F: Field, a: int, b: int, t: str, z: str) -> Poly:
    """The monic representative of Q_{a,b}(t, z)."""
    return Poly(F, (t, z), {e: F.scalar(c) for e, c in cd.Q(a, b).items()}).monic()


def K_aff(refl: Reflection, j: int, order: int = 6) -> TruncAff:
    """A truncated affinization of K_j over k[z_j] (for j = i: of its module part)."""
    cd, F, i = refl.cd, refl.cr.F, refl.i
    var = f"z{j}"
    zdeg = cd.form(j, j)
    if j == i:
        A = refl.A()
        colours = {c for nu in A.nus for c in nu}
        if cd.symmetric:
            return shift_affinize(A, order, var)
        if len(colours) != 1:
            raise ModuleError("no affinization recipe for a multi-colour K_i in a non-symmetric type")
        (k,) = colours
        return rank1_affinize(cd, F, k, A.n, _q_in(cd, F, k, i, "t", var), z=var, zdegree=zdeg, order=order)
    a = -cd.c(i, j)
    if a == 0:
        return affine_L(cd, F, j, order, var)
    base = rank1_affinize(cd, F, i, a, _q_in(cd, F, i, j, "t", var), z=var, zdegree=zdeg, order=order)
    return lemij_affinize(base, j, power=1)


def expected_De(cd: CartanDatum, F: Field, j: int, k: int) -> Poly:
    if cd.name == "A2":
        return Poly.const(F, F.one)
    if cd.c(j, k) == 0:
        return Poly.const(F, F.one)
    return Poly(F, (f"z{j}", f"z{k}"), {e: F.scalar(c) for e, c in cd.Q(j, k).items()}).monic()


def de_table(refl: Reflection, order: int = 6) -> Dict[Tuple[int, int], dict]:
    """(j, k) -> D(K^_j, K^_k) with expectation and truncation report, for j < k."""
    from .rmatrix import affine_invariants_stable, check_relaff

    cd = refl.cd
    Ks = {j: K_aff(refl, j, order) for j in cd.index_set}
    out = {}
    for j in cd.index_set:
        for k in cd.index_set:
            if j >= k:
                continue
            inv, rep = affine_invariants_stable(Ks[j], Ks[k])
            exp = expected_De(cd, refl.cr.F, j, k)
            out[(j, k)] = {"D": inv.D, "expected": exp, "ok": inv.D.monic().equiv(exp), "report": rep,
                           "relaff": check_relaff(inv), "inv": inv}
    return out


# ---------------------------------------------------------------------------
# further checks


def lemma2det(refl: Reflection, m: int, n: int, j: int) -> Tuple[bool, str, str]:
    """F_i(<j^n> o^ <i^m>) against <i^{-m-n<h_i,alpha_j>}> o^ <j^n>."""
    cd, F, i = refl.cd, refl.cr.F, refl.i
    a = -m - n * cd.c(i, j)
    if a < 0:
        raise ValueError("needs <h_i, s_j lambda> >= 0")
    Lj = make_L(cd, F, j, n)
    S = head_of_product(Lj, make_L(cd, F, i, m), refl.max_dim) if m else Lj
    T = head_of_product(make_L(cd, F, i, a), Lj, refl.max_dim) if a else Lj
    got = refl(S)
    exp = refl.star.make((0,) * cd.rank, T)
    return refl.star.equal(got, exp), refl.render(got), refl.render(exp)


def cuspidal_pairs(refl: Reflection) -> List[Tuple[int, KLRModule, KLRModule]]:
    """(k, V_k, S_k) for 2 <= k <= l along the reduced word of w_0 starting with i."""
    cd = refl.cd
    word = cd.w0_starting_with(refl.i)
    S = cuspidals(refl.cr, word)
    out = []
    for k in range(2, len(word) + 1):
        lamk = cd.fundamental(word[k - 1])
        V = determinantial(refl.cr, lamk, word[1:k], word[1:k - 1])
        out.append((k, V, S[k - 1]))
    return out


def weight_law(refl: Reflection, M: KLRModule, x: LocSimple) -> bool:
    """wt F_i(M) = s_i wt(M)."""
    cd = refl.cd
    wt = (0,) * cd.rank if M.n == 0 else M.weight()
    return x.weight(refl.star.cent) == cd.reflect(refl.i, wt)
