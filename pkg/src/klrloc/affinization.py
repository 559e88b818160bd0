"""Truncated affinizations: modules over k[z]/(z^m) deforming a simple module.

A truncated affine object is stored as a KLRModule with one deformation
variable z (nilpotent of order m, central, of positive degree).  Products of
such objects carry several variables; the helpers here that read central
elements as polynomials in the z's work for any number of variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .cartan import CartanDatum
from .klr import Gen, KLRModule, ModuleError, Word, quotient, rank_one_module, swap
from .linalg import Field
from .polyres import Poly

DEFAULT_ORDER = 6


class AffinizationError(ModuleError):
    pass


@dataclass
class TruncAff:
    """A truncated affinization: module, variable name, its degree and order."""

    module: KLRModule
    var: str
    degree: int
    order: int
    meta: Optional[dict] = None
    # rebuilds the same affinization at another truncation order
    builder: Optional[Callable[[int], "TruncAff"]] = field(default=None, repr=False, compare=False)

    def at_order(self, order: int) -> "TruncAff":
        if order == self.order:
            return self
        if self.builder is None:
            raise AffinizationError("this affinization cannot be rebuilt at another order")
        return self.builder(order)

    @property
    def cd(self) -> CartanDatum:
        return self.module.cd

    @property
    def F(self) -> Field:
        return self.module.F

    def z(self, nu: Word) -> np.ndarray:
        return self.module.mat(("z", self.var), nu)

    def rename(self, var: str) -> "TruncAff":
        M = self.module
        actions = {}
        for g in M.gens:
            ng = ("z", var) if g == ("z", self.var) else g
            actions[ng] = M.actions.get(g, {})
        zd = {(var if k == self.var else k): v for k, v in M.zdeg.items()}
        N = KLRModule(M.cd, M.F, M.n, {nu: M.deg[nu].tolist() for nu in M.nus}, actions, zd, name=M.name)
        b = self.builder
        return TruncAff(N, var, self.degree, self.order, self.meta,
                        (lambda o: b(o).rename(var)) if b is not None else None)

    def base(self) -> KLRModule:
        """M^/zM^."""
        return reduce_mod_z(self.module, [self.var])


def reduce_mod_z(M: KLRModule, vars: Sequence[str]) -> KLRModule:
    """Quotient of M by the images of the given deformation variables."""
    F = M.F
    basis = {}
    for c, idx in M.cells.items():
        cols = []
        for v in vars:
            d = M.zdeg[v]
            src = (c[0], c[1] - d)
            if src in M.cells:
                _, A = M.cell_action(("z", v), src)
                if A.shape[0]:
                    cols.append(A)
        if cols:
            B = np.concatenate(cols, axis=1)
            V, piv = F.colspace(B)
            if V.shape[1]:
                basis[c] = V
    Q, _ = quotient(M, basis)
    actions = {g: Q.actions[g] for g in Q.gens if not (g[0] == "z" and g[1] in vars)}
    zd = {k: v for k, v in M.zdeg.items() if k not in vars}
    return KLRModule(M.cd, F, M.n, {nu: Q.deg[nu].tolist() for nu in Q.nus}, actions, zd, name=M.name)


def _shift_matrix(F: Field, m: int) -> np.ndarray:
    S = F.zeros((m, m))
    for e in range(m - 1):
        S[e + 1, e] = F.one
    return S


def shift_affinize(M: KLRModule, order: int = DEFAULT_ORDER, var: str = "z") -> TruncAff:
    """(k[z]/z^m) (x) M with x_k acting by x_k + z."""
    cd = M.cd
    colours = {c for nu in M.nus for c in nu}
    if not cd.symmetric and len(colours) > 1:
        raise AffinizationError("shift affinization needs a symmetric type or a single colour")
    if M.zdeg:
        raise AffinizationError("module already deformed")
    F = M.F
    c0 = next(iter(colours))
    zdeg = cd.form(c0, c0)
    S = _shift_matrix(F, order)
    I = F.eye(order)
    degs = {nu: (M.deg[nu][:, None] + zdeg * np.arange(order)[None, :]).reshape(-1).tolist() for nu in M.nus}
    actions: Dict[Gen, Dict[Word, np.ndarray]] = {}
    for g in M.gens:
        blocks = {}
        for nu in M.nus:
            tnu = M.target(g, nu)
            if tnu not in M.deg:
                continue
            blk = np.kron(M.mat(g, nu), I)
            if g[0] == "x":
                blk = F.add(blk, np.kron(F.eye(M.block_dim(nu)), S))
            blocks[nu] = blk
        actions[g] = blocks
    actions[("z", var)] = {nu: np.kron(F.eye(M.block_dim(nu)), S) for nu in M.nus}
    nm = f"{M.name}_{var}" if M.name else None
    A = KLRModule(cd, F, M.n, degs, actions, {var: zdeg}, name=nm)
    return TruncAff(A, var, zdeg, order, {"construction": "shift"},
                    lambda o: shift_affinize(M, o, var))


def _poly_coeff_lists(f: Poly, t: str, z: str, n: int) -> List[Dict[int, object]]:
    """f = t^n + c_1(z) t^{n-1} + ... as [c_1, ..., c_n] with c_a = {power: coeff}."""
    vars = f.vars
    if any(v not in (t, z) for v in f.used_vars()):
        raise AffinizationError("unexpected variables in f")
    it = vars.index(t) if t in vars else None
    iz = vars.index(z) if z in vars else None
    cs: List[Dict[int, object]] = [dict() for _ in range(n)]
    lead = None
    for e, c in f.terms.items():
        pt = e[it] if it is not None else 0
        pz = e[iz] if iz is not None else 0
        if pt > n:
            raise AffinizationError("degree in t exceeds n")
        if pt == n:
            if pz != 0:
                raise AffinizationError("f is not monic in t")
            lead = c
            continue
        cs[n - pt - 1][pz] = c
    if lead is None:
        raise AffinizationError("f is not monic in t")
    F = f.F
    inv = F.inv_scalar(lead)
    return [{k: F.smul(v, inv) for k, v in c.items()} for c in cs]


def rank1_affinize(cd: CartanDatum, F: Field, i: int, n: int, f: Poly, t: str = "t", z: str = "z",
                   zdegree: Optional[int] = None, order: int = DEFAULT_ORDER, var: Optional[str] = None) -> TruncAff:
    """Affinization of L(i^n) with chi_i = f(t, z), via the splitting algebra of f."""
    di2 = cd.form(i, i)
    zdegree = di2 if zdegree is None else zdegree
    if not f.is_quasi_monic(z) and n > 0 and f.degree(z) > 0:
        raise AffinizationError("f is not quasi-monic in z")
    if not f.is_homogeneous({t: di2, z: zdegree}):
        raise AffinizationError("f is not homogeneous")
    coeffs = _poly_coeff_lists(f, t, z, n)
    var = var or z
    M = rank_one_module(cd, F, i, n, coeffs, zname=var, zdegree=zdegree, order=order)
    return TruncAff(M, var, zdegree, order, {"construction": "rank1", "chi": str(f)},
                    lambda o: rank1_affinize(cd, F, i, n, f, t, z, zdegree, o, var))


def lemij_affinize(Lhat: TruncAff, j: int, power: Optional[int] = None) -> TruncAff:
    """Lhat (x)_{k[z]} <j>_{z^power}: the j strand acts by z^power and tau_m by 0.

    Lhat is a truncated affinization of L(i^m) (single colour i).  The result
    is an R(m alpha_i + alpha_j)-module provided Q_{i,j}(x_m, z^power) = 0 on Lhat."""
    L = Lhat.module
    cd = L.cd
    F = L.F
    m = L.n
    (nu0,) = L.nus if L.nus else ((),)
    i = nu0[0] if m else None
    c = -cd.c(i, j) if m else 1
    power = c if power is None else power
    if power * Lhat.degree != cd.form(j, j):
        raise AffinizationError("degree of z^power does not match deg x for colour j")
    Z = Lhat.z(nu0)
    Zp = F.eye(Z.shape[0])
    for _ in range(power):
        Zp = F.matmul(Z, Zp)
    if m:
        # Q_{i,j}(x_m, z^power) must vanish
        Q = cd.Q(i, j)
        acc = F.zeros(Z.shape)
        X = L.mat(("x", m - 1), nu0)
        for (p, q), coef in Q.items():
            t = F.eye(Z.shape[0])
            for _ in range(p):
                t = F.matmul(X, t)
            for _ in range(q):
                t = F.matmul(Zp, t)
            acc = F.add(acc, F.scale(F.scalar(coef), t))
        if not F.is_zero(acc):
            raise AffinizationError("Q_{i,j}(x_m, z^c) does not vanish on the given affinization")
    nu = nu0 + (j,)
    actions: Dict[Gen, Dict[Word, np.ndarray]] = {}
    for g in L.gens:
        actions[g] = {nu: L.mat(g, nu0)}
    actions[("x", m)] = {nu: Zp}
    actions[("t", m - 1)] = {} if m else {}
    degs = {nu: L.deg[nu0].tolist()}
    nm = None
    if L.name:
        nm = f"{L.name}.<{j}>"
    A = KLRModule(cd, F, m + 1, degs, actions, L.zdeg, name=nm)
    meta = dict(Lhat.meta or {})
    meta.update({"construction": "lemij", "j": j, "power": power})
    b = Lhat.builder
    return TruncAff(A, Lhat.var, Lhat.degree, Lhat.order, meta,
                    (lambda o: lemij_affinize(b(o), j, power)) if b is not None else None)


def affine_L(cd: CartanDatum, F: Field, i: int, order: int = DEFAULT_ORDER, var: str = "z") -> TruncAff:
    """L(i)_z = (k[x_1], x_1) truncated."""
    from .klr import make_L

    return shift_affinize(make_L(cd, F, i, 1), order, var)


# ---------------------------------------------------------------------------
# reading central elements as polynomials in the deformation variables


def _z_monomials(M: KLRModule, vars: Sequence[str], bound: Mapping[str, int]) -> List[Tuple[int, ...]]:
    return list(product(*[range(bound[v]) for v in vars]))


def _mono_matrix(M: KLRModule, vars: Sequence[str], e: Tuple[int, ...], nu: Word, cache: dict) -> np.ndarray:
    key = (nu, e)
    if key in cache:
        return cache[key]
    F = M.F
    k = next((k for k, p in enumerate(e) if p), None)
    if k is None:
        m = F.eye(M.block_dim(nu))
    else:
        prev = e[:k] + (e[k] - 1,) + e[k + 1:]
        m = F.matmul(M.mat(("z", vars[k]), nu), _mono_matrix(M, vars, prev, nu, cache))
    cache[key] = m
    return m


def as_z_polynomial(M: KLRModule, blocks: Mapping[Word, np.ndarray], order: Mapping[str, int],
                    vars: Optional[Sequence[str]] = None) -> Optional[Poly]:
    """Write a block-diagonal operator as p(z) id, or return None.

    `order` bounds the exponent of each variable (the truncation)."""
    F = M.F
    vars = sorted(M.zdeg) if vars is None else list(vars)
    mons = _z_monomials(M, vars, order)
    cache: dict = {}
    rows = []
    rhs = []
    for nu in M.nus:
        if nu not in blocks:
            continue
        cols = [_mono_matrix(M, vars, e, nu, cache).reshape(-1) for e in mons]
        rows.append(np.stack(cols, axis=1))
        rhs.append(blocks[nu].reshape(-1)[:, None])
    if not rows:
        return Poly(F, vars, {})
    A = np.concatenate(rows, axis=0)
    b = np.concatenate(rhs, axis=0)
    # drop zero rows for speed
    keep = np.flatnonzero(np.any(A != 0, axis=1) | np.any(b != 0, axis=1))
    A = A[keep]
    b = b[keep]
    if A.shape[0] == 0:
        return Poly(F, vars, {})
    sol = F.solve(A, b)
    if sol is None:
        return None
    terms = {e: sol[k, 0] for k, e in enumerate(mons) if sol[k, 0] != 0}
    return Poly(F, vars, terms)


def truncation_orders(M: KLRModule) -> Dict[str, int]:
    """Nilpotency order of each deformation variable."""
    F = M.F
    out = {}
    for v in M.zdeg:
        r = 0
        mats = {nu: F.eye(M.block_dim(nu)) for nu in M.nus}
        while any(not F.is_zero(m) for m in mats.values()):
            mats = {nu: F.matmul(M.mat(("z", v), nu), m) for nu, m in mats.items()}
            r += 1
            if r > M.dim + 1:
                raise AffinizationError(f"{v} is not nilpotent")
        out[v] = r
    return out


def chi(i: int, M: KLRModule, t: str = None, order: Optional[Mapping[str, int]] = None) -> Poly:
    """chi_i(M)(t) = sum_nu prod_{nu_k = i} (t - x_k) e(nu), as a polynomial in t and the z's.

    Requires the coefficients to act by polynomials in the deformation variables."""
    F = M.F
    t = t or f"t{i}"
    if order is None:
        order = truncation_orders(M)
    vars = sorted(M.zdeg)
    # coefficient matrices of t^r per block: elementary symmetric in the colour-i x's
    ncol = None
    coeffs: Dict[int, Dict[Word, np.ndarray]] = {}
    for nu in M.nus:
        pos = [k for k, c in enumerate(nu) if c == i]
        if ncol is None:
            ncol = len(pos)
        dn = M.block_dim(nu)
        # running product polynomial in t with matrix coefficients
        poly = [F.eye(dn)]  # poly[r] = coefficient of t^r
        for k in pos:
            X = M.mat(("x", k), nu)
            new = [F.zeros((dn, dn)) for _ in range(len(poly) + 1)]
            for r, C in enumerate(poly):
                new[r + 1] = F.add(new[r + 1], C)
                new[r] = F.sub(new[r], F.matmul(X, C))
            poly = new
        for r, C in enumerate(poly):
            coeffs.setdefault(r, {})[nu] = C
    out = Poly(F, vars + [t], {})
    for r, blocks in coeffs.items():
        p = as_z_polynomial(M, blocks, order, vars)
        if p is None:
            raise AffinizationError("chi coefficient is not a polynomial in the deformation variables")
        tp = Poly.var(F, t) ** r
        out = out + p * tp
    return out.with_vars(tuple(sorted(set(vars) | {t})))


def _edge_chi(i: int, M: KLRModule, left: bool, t: Optional[str], order: Optional[Mapping[str, int]]) -> Poly:
    from .convolution import eps, eps_star

    F = M.F
    t = t or f"t{i}"
    if order is None:
        order = truncation_orders(M)
    m = eps(M, i) if left else eps_star(M, i)
    vars = sorted(M.zdeg)
    n = M.n
    strands = range(m) if left else range(n - m, n)
    coeffs: Dict[int, Dict[Word, np.ndarray]] = {}
    for nu in M.nus:
        if any(nu[k] != i for k in strands):
            continue
        dn = M.block_dim(nu)
        poly = [F.eye(dn)]
        for k in strands:
            X = M.mat(("x", k), nu)
            new = [F.zeros((dn, dn)) for _ in range(len(poly) + 1)]
            for r, C in enumerate(poly):
                new[r + 1] = F.add(new[r + 1], C)
                new[r] = F.sub(new[r], F.matmul(X, C))
            poly = new
        for r, C in enumerate(poly):
            coeffs.setdefault(r, {})[nu] = C
    out = Poly(F, vars + [t], {})
    for r, blocks in coeffs.items():
        p = as_z_polynomial(M, blocks, order, vars)
        if p is None:
            raise AffinizationError("symmetric functions of the edge strands are not scalar on this module")
        out = out + p * Poly.var(F, t) ** r
    return out.with_vars(tuple(sorted(set(vars) | {t})))


def chibar(i: int, M: KLRModule, t: Optional[str] = None, order: Optional[Mapping[str, int]] = None) -> Poly:
    """(t - x_1)...(t - x_m) on E_i^(m) M with m = eps_i(M), as a polynomial in t and the z's."""
    return _edge_chi(i, M, True, t, order)


def chibar_star(i: int, M: KLRModule, t: Optional[str] = None, order: Optional[Mapping[str, int]] = None) -> Poly:
    """The same product over the last eps*_i(M) strands."""
    return _edge_chi(i, M, False, t, order)


def central_p(M: KLRModule, i: int) -> Dict[Word, np.ndarray]:
    """The central element p_{i,beta} = sum_nu prod_{nu_a = i} x_a e(nu)."""
    F = M.F
    out = {}
    for nu in M.nus:
        m = F.eye(M.block_dim(nu))
        for k, c in enumerate(nu):
            if c == i:
                m = F.matmul(M.mat(("x", k), nu), m)
        out[nu] = m
    return out


def p_condition_check(A: TruncAff) -> Tuple[bool, str]:
    """p_{i,beta} acts nonzero on the truncated object for every i in the support."""
    M = A.module
    F = M.F
    for i in M.cd.index_set:
        if not M.beta or not M.beta[i - 1]:
            continue
        p = central_p(M, i)
        if all(F.is_zero(m) for m in p.values()):
            return False, f"p_{i} acts by zero"
    return True, "ok"


def flatness_check(A: TruncAff) -> Tuple[bool, str]:
    """Ker(z^k) is contained in z^{m-k} M^ for 1 <= k < m, and M^/zM^ has dim M^/m."""
    M = A.module
    F = M.F
    m = A.order
    Z = M.dense(("z", A.var))
    D = M.dim
    if D % m:
        return False, "dimension not divisible by the order"
    powers = [F.eye(D)]
    for _ in range(m):
        powers.append(F.matmul(Z, powers[-1]))
    if not F.is_zero(powers[m]):
        return False, "z^m is not zero"
    for k in range(1, m):
        K = F.nullspace(powers[k])
        Im = powers[m - k]
        r1 = F.rank(Im)
        r2 = F.rank(np.concatenate([Im, K], axis=1))
        if r1 != r2:
            return False, f"Ker(z^{k}) not inside z^{m - k}M"
        if r1 != (k) * (D // m):
            return False, f"rank of z^{m - k} is {r1}, expected {k * (D // m)}"
    return True, "ok"


def check_affinization(A: TruncAff, base: KLRModule) -> Tuple[bool, str]:
    ok, msg = A.module.check_relations()
    if not ok:
        return ok, msg
    ok, msg = flatness_check(A)
    if not ok:
        return ok, msg
    ok, msg = p_condition_check(A)
    if not ok:
        return ok, msg
    if A.base().key() != base.key():
        return False, "M^/zM^ differs from the base module"
    return True, "ok"
