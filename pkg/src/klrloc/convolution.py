"""Convolution products, restriction functors and crystal operators.

The convolution M o N = R(beta+gamma) e(beta,gamma) (x)_{R(beta) (x) R(gamma)} (M (x) N)
has the basis tau_{red d} (u (x) v) with d running over the minimal length
coset representatives ("shuffles") of S_{m+n} / S_m x S_n.  The action of a
generator g on tau_d (u (x) v) is obtained from the normal form of
g tau_{red d} e(nu) taken with parabolic reduced words red(d') red(u_1) red(u_2).
"""

from __future__ import annotations

from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .cartan import CartanDatum
from .engine import (
    KLREngine,
    act,
    engine_for,
    identity,
    lex_reduced_word,
    shuffle_split,
    shuffles,
)
from .klr import (
    Cell,
    Gen,
    KLRModule,
    ModuleError,
    Word,
    closure,
    compose_maps,
    hom_space,
    image_module,
    map_is_zero,
    make_L,
    submodule,
    swap,
    trivial_module,
)
from .linalg import Field

DEFAULT_MAX_DIM = 5000


class DimensionBoundError(ModuleError):
    def __init__(self, dim: int, bound: int):
        super().__init__(f"module dimension {dim} exceeds the configured bound {bound}")
        self.dim = dim
        self.bound = bound


# ---------------------------------------------------------------------------
# operators of words on a module block


def _op_matrix(M: KLRModule, word: Tuple[int, ...], a: Tuple[int, ...], nu: Word, cache: dict) -> Optional[np.ndarray]:
    """Matrix of tau_{word} x^a on the nu block of M (None when the block is absent)."""
    key = (id(M), word, a, nu)
    if key in cache:
        return cache[key]
    F = M.F
    if nu not in M.deg:
        cache[key] = None
        return None
    m = None
    for k, p in enumerate(a):
        for _ in range(p):
            X = M.mat(("x", k), nu)
            m = X if m is None else F.matmul(X, m)
    if m is None:
        m = F.eye(M.block_dim(nu))
    cur = nu
    for l in reversed(word):
        T = M.mat(("t", l), cur)
        m = F.matmul(T, m)
        cur = swap(cur, l)
        if cur not in M.deg:
            cache[key] = None
            return None
    cache[key] = (cur, m)
    return cache[key]


class ConvModule(KLRModule):
    """M o N together with its basis layout (shuffle, M-block, N-block)."""

    left: KLRModule
    right: KLRModule
    split: int
    layout: Dict[Word, List[Tuple[Tuple[int, ...], Word, Word, int, int]]]


def outer(M: KLRModule, N: KLRModule) -> KLRModule:
    """M (x) N as a module over R(beta) (x) R(gamma) (tau_{m-1} absent)."""
    F = M.F
    m, n = M.n, N.n
    clash = set(M.zdeg) & set(N.zdeg)
    if clash:
        raise ModuleError(f"shared deformation variables {sorted(clash)}")
    degs: Dict[Word, List[int]] = {}
    actions: Dict[Gen, Dict[Word, np.ndarray]] = {}
    zd = dict(M.zdeg)
    zd.update(N.zdeg)
    for a in M.nus:
        for b in N.nus:
            nu = a + b
            degs[nu] = (M.deg[a][:, None] + N.deg[b][None, :]).reshape(-1).tolist()
    for k in range(m):
        actions[("x", k)] = {a + b: np.kron(M.mat(("x", k), a), F.eye(N.block_dim(b))) for a in M.nus for b in N.nus}
    for k in range(n):
        actions[("x", m + k)] = {a + b: np.kron(F.eye(M.block_dim(a)), N.mat(("x", k), b)) for a in M.nus for b in N.nus}
    for l in range(m - 1):
        actions[("t", l)] = {a + b: np.kron(M.mat(("t", l), a), F.eye(N.block_dim(b))) for a in M.nus for b in N.nus if swap(a, l) in M.deg}
    for l in range(n - 1):
        actions[("t", m + l)] = {a + b: np.kron(F.eye(M.block_dim(a)), N.mat(("t", l), b)) for a in M.nus for b in N.nus if swap(b, l) in N.deg}
    for v in M.zdeg:
        actions[("z", v)] = {a + b: np.kron(M.mat(("z", v), a), F.eye(N.block_dim(b))) for a in M.nus for b in N.nus}
    for v in N.zdeg:
        actions[("z", v)] = {a + b: np.kron(F.eye(M.block_dim(a)), N.mat(("z", v), b)) for a in M.nus for b in N.nus}
    return KLRModule(M.cd, F, m + n, degs, actions, zd, parabolic=m if m and n else None)


def convolve(M: KLRModule, N: KLRModule, max_dim: int = DEFAULT_MAX_DIM, name: Optional[str] = None) -> ConvModule:
    """The convolution product M o N."""
    F = M.F
    cd = M.cd
    m, n = M.n, N.n
    total = m + n
    from math import comb

    dim = comb(total, m) * M.dim * N.dim
    if dim > max_dim:
        raise DimensionBoundError(dim, max_dim)
    clash = set(M.zdeg) & set(N.zdeg)
    if clash:
        raise ModuleError(f"shared deformation variables {sorted(clash)}")
    eng = engine_for(cd, total, m)
    ds = shuffles(m, n)
    # layout of blocks
    layout: Dict[Word, List[Tuple[Tuple[int, ...], Word, Word, int, int]]] = {}
    degs: Dict[Word, List[int]] = {}
    for d in ds:
        for a in M.nus:
            for b in N.nus:
                nu = a + b
                w = act(d, nu)
                size = M.block_dim(a) * N.block_dim(b)
                off = len(degs.get(w, []))
                layout.setdefault(w, []).append((d, a, b, off, size))
                base = eng.degree((d, (0,) * total, nu))
                dd = (M.deg[a][:, None] + N.deg[b][None, :]).reshape(-1) + base
                degs.setdefault(w, []).extend(dd.tolist())
    pos = {}
    for w, items in layout.items():
        for (d, a, b, off, size) in items:
            pos[(d, a, b)] = (w, off, size)
    cache: dict = {}
    gens: List[Gen] = [("x", k) for k in range(total)] + [("t", l) for l in range(total - 1)]
    actions: Dict[Gen, Dict[Word, np.ndarray]] = {}
    for g in gens:
        blocks: Dict[Word, np.ndarray] = {}
        for w, items in layout.items():
            tw = swap(w, g[1]) if g[0] == "t" else w
            if tw not in layout:
                continue
            out = F.zeros((len(degs[tw]), len(degs[w])))
            for (d, a, b, off, size) in items:
                nu = a + b
                key = (d, (0,) * total, nu)
                elem = eng.lmul_x(g[1], key) if g[0] == "x" else eng.lmul_tau(g[1], key)
                for (w2, ex, nu2), c in elem.items():
                    d2, u = shuffle_split(w2, m)
                    u1 = u[:m]
                    u2 = tuple(x - m for x in u[m:])
                    oa = _op_matrix(M, lex_reduced_word(u1), ex[:m], a, cache)
                    ob = _op_matrix(N, lex_reduced_word(u2), ex[m:], b, cache)
                    if oa is None or ob is None:
                        continue
                    a2, ma = oa
                    b2, mb = ob
                    tgt = pos.get((d2, a2, b2))
                    if tgt is None:
                        continue
                    tw2, toff, tsize = tgt
                    assert tw2 == tw
                    blk = F.kron(ma, mb)
                    cc = F.scalar(c)
                    out[toff:toff + tsize, off:off + size] = F.add(out[toff:toff + tsize, off:off + size], F.scale(cc, blk))
            blocks[w] = out
        actions[g] = blocks
    zd = dict(M.zdeg)
    zd.update(N.zdeg)
    for v in zd:
        blocks = {}
        for w, items in layout.items():
            out = F.zeros((len(degs[w]), len(degs[w])))
            for (d, a, b, off, size) in items:
                if v in M.zdeg:
                    blk = np.kron(M.mat(("z", v), a), F.eye(N.block_dim(b)))
                else:
                    blk = np.kron(F.eye(M.block_dim(a)), N.mat(("z", v), b))
                out[off:off + size, off:off + size] = blk
            blocks[w] = out
        actions[("z", v)] = blocks
    nm = name
    if nm is None and M.name and N.name:
        nm = f"{M.name}o{N.name}"
    C = ConvModule(cd, F, total, degs, actions, zd, name=nm)
    C.left, C.right, C.split, C.layout = M, N, m, layout
    C.engine = eng
    return C


def convolve_many(mods: Sequence[KLRModule], max_dim: int = DEFAULT_MAX_DIM) -> KLRModule:
    """Left-nested product ((M_1 o M_2) o M_3) o ..."""
    out = mods[0]
    for M in mods[1:]:
        out = convolve(out, M, max_dim=max_dim)
    return out


def convolve_maps(src: ConvModule, dst: ConvModule, f: Dict[Word, np.ndarray], g: Dict[Word, np.ndarray]) -> Dict[Word, np.ndarray]:
    """f o g : M o N -> M' o N' for block maps f: M -> M', g: N -> N'."""
    F = src.F
    if src.split != dst.split:
        raise ModuleError("convolution shapes differ")
    out: Dict[Word, np.ndarray] = {}
    dpos = {}
    for w, items in dst.layout.items():
        for (d, a, b, off, size) in items:
            dpos[(d, a, b)] = (off, size)
    for w, items in src.layout.items():
        if w not in dst.layout:
            continue
        blk = F.zeros((dst.block_dim(w), src.block_dim(w)))
        for (d, a, b, off, size) in items:
            if (d, a, b) not in dpos or a not in f or b not in g:
                continue
            toff, tsize = dpos[(d, a, b)]
            blk[toff:toff + tsize, off:off + size] = F.kron(f[a], g[b])
        out[w] = blk
    return out


def identity_map(M: KLRModule) -> Dict[Word, np.ndarray]:
    return {nu: M.F.eye(M.block_dim(nu)) for nu in M.nus}


# ---------------------------------------------------------------------------
# homomorphisms out of a convolution product


def hom_from_conv(C: ConvModule, Y: KLRModule, degree: Optional[int] = None) -> Dict[int, List[Dict[Word, np.ndarray]]]:
    """HOM(M o N, Y) through HOM_{R(beta) (x) R(gamma)}(M (x) N, e(beta,gamma) Y)."""
    F = C.F
    box = getattr(C, "_box", None)
    if box is None:
        box = outer(C.left, C.right)
        C._box = box
    raw = hom_space(box, Y, degree=degree, gens=box.gens)
    out: Dict[int, List[Dict[Word, np.ndarray]]] = {}
    cache: dict = {}
    for s, maps in raw.items():
        ext = [extend_from_box(C, Y, f, cache) for f in maps]
        out[s] = ext
    return out


def extend_from_box(C: ConvModule, Y: KLRModule, f: Dict[Word, np.ndarray], cache: Optional[dict] = None) -> Dict[Word, np.ndarray]:
    """phi(tau_d (u (x) v)) = tau_{red d} phi(u (x) v)."""
    F = C.F
    cache = {} if cache is None else cache
    out: Dict[Word, np.ndarray] = {}
    for w, items in C.layout.items():
        if w not in Y.deg:
            continue
        blk = F.zeros((Y.block_dim(w), C.block_dim(w)))
        for (d, a, b, off, size) in items:
            nu = a + b
            if nu not in f:
                continue
            r = _op_matrix(Y, C.engine.red(d), (0,) * C.n, nu, cache)
            if r is None:
                continue
            tw, T = r
            blk[:, off:off + size] = F.matmul(T, f[nu])
        out[w] = blk
    return out


# ---------------------------------------------------------------------------
# R-matrices of simple modules (the unique intertwiner) and heads


class RMatrixError(ModuleError):
    pass


def r_matrix(M: KLRModule, N: KLRModule, max_dim: int = DEFAULT_MAX_DIM):
    """The intertwiner r_{M,N}: M o N -> N o M (unique up to a scalar).

    Returns (MN, NM, map, degree).  Raises when the hom space is not one-dimensional."""
    MN = convolve(M, N, max_dim=max_dim)
    NM = convolve(N, M, max_dim=max_dim)
    H = hom_from_conv(MN, NM)
    total = sum(len(v) for v in H.values())
    if total != 1:
        raise RMatrixError(f"HOM(M o N, N o M) has dimension {total}")
    (s, maps), = H.items()
    return MN, NM, maps[0], s


def head_of_product(M: KLRModule, N: KLRModule, max_dim: int = DEFAULT_MAX_DIM, name: Optional[str] = None) -> KLRModule:
    """M o^ N = Im(r_{M,N}) when one factor is real."""
    if M.n == 0:
        return N
    if N.n == 0:
        return M
    MN, NM, f, s = r_matrix(M, N, max_dim=max_dim)
    H = image_module(f, MN, NM, s)
    H.name = name
    return H


def lambda_simple(M: KLRModule, N: KLRModule, max_dim: int = DEFAULT_MAX_DIM) -> int:
    """Lambda(M, N) = deg r_{M,N}."""
    if M.n == 0 or N.n == 0:
        return 0
    return r_matrix(M, N, max_dim=max_dim)[3]


# ---------------------------------------------------------------------------
# restriction and divided powers


def restrict_left(M: KLRModule, prefix: Word) -> KLRModule:
    """e(prefix, *) M viewed as a module over the remaining strands.

    The first len(prefix) strands are forgotten; their x's become extra
    commuting operators that are dropped here."""
    k = len(prefix)
    F = M.F
    degs = {}
    actions: Dict[Gen, Dict[Word, np.ndarray]] = {}
    for nu in M.nus:
        if nu[:k] == tuple(prefix):
            degs[nu[k:]] = M.deg[nu].tolist()
    for g in M.gens:
        kind, idx = g
        if kind == "x":
            if idx < k:
                continue
            ng = ("x", idx - k)
        elif kind == "t":
            if idx < k:
                continue
            ng = ("t", idx - k)
        else:
            ng = g
        actions[ng] = {nu[k:]: M.mat(g, nu) for nu in M.nus if nu[:k] == tuple(prefix)}
    return KLRModule(M.cd, F, M.n - k, degs, actions, M.zdeg)


def restrict_right(M: KLRModule, suffix: Word) -> KLRModule:
    k = len(suffix)
    n = M.n
    F = M.F
    degs = {}
    actions: Dict[Gen, Dict[Word, np.ndarray]] = {}
    sel = [nu for nu in M.nus if nu[n - k:] == tuple(suffix)]
    for nu in sel:
        degs[nu[:n - k]] = M.deg[nu].tolist()
    for g in M.gens:
        kind, idx = g
        if kind == "x" and idx >= n - k:
            continue
        if kind == "t" and idx >= n - k - 1:
            continue
        actions[g] = {nu[:n - k]: M.mat(g, nu) for nu in sel}
    return KLRModule(M.cd, F, n - k, degs, actions, M.zdeg)


def restrict(M: KLRModule, gamma: Sequence[int]) -> KLRModule:
    """e(gamma, beta-gamma) M as an R(gamma) (x) R(beta-gamma)-module (parabolic)."""
    cd = M.cd
    m = sum(gamma)
    sel = [nu for nu in M.nus if beta_of(cd, nu[:m]) == tuple(gamma)]
    degs = {nu: M.deg[nu].tolist() for nu in sel}
    actions = {g: {nu: M.mat(g, nu) for nu in sel} for g in M.gens if not (g[0] == "t" and g[1] == m - 1)}
    return KLRModule(cd, M.F, M.n, degs, actions, M.zdeg, parabolic=m if 0 < m < M.n else None)


def beta_of(cd: CartanDatum, nu: Sequence[int]) -> Tuple[int, ...]:
    out = [0] * cd.rank
    for c in nu:
        out[c - 1] += 1
    return tuple(out)


def _nilhecke_idempotent(M: KLRModule, nu: Word, start: int, r: int) -> np.ndarray:
    """Matrix of (-1)^{l(w0)} tau_{w0} x^delta on strands start..start+r-1 of the nu block."""
    F = M.F
    m = F.eye(M.block_dim(nu))
    for t in range(r):
        for _ in range(r - 1 - t):
            m = F.matmul(M.mat(("x", start + t), nu), m)
    w0 = []
    for a in range(r - 1, 0, -1):
        w0 += list(range(start, start + a))
    # w0 as a word: product s_start..s_{start+r-2} s_start..  (any reduced word works)
    for l in reversed(w0):
        m = F.matmul(M.mat(("t", l), nu), m)
    length = r * (r - 1) // 2
    if length % 2:
        m = F.neg(m)
    return m


def divided_power_left(M: KLRModule, i: int, r: int) -> KLRModule:
    """E_i^{(r)} M: image of the nilHecke idempotent on e(i^r, *) M."""
    if r == 0:
        return M
    prefix = (i,) * r
    R = restrict_left(M, prefix)
    if R.dim == 0:
        return R
    basis: Dict[Cell, np.ndarray] = {}
    for nu in M.nus:
        if nu[:r] != prefix:
            continue
        e = _nilhecke_idempotent(M, nu, 0, r)
        rnu = nu[r:]
        for d in sorted(set(R.deg[rnu].tolist())):
            idx = R.cells[(rnu, d)]
            V, piv = M.F.colspace(e[np.ix_(idx, idx)])
            if V.shape[1]:
                basis[(rnu, d)] = V
    if not basis:
        raise ModuleError("idempotent image vanished")
    return submodule(R, basis)[0]


def divided_power_right(M: KLRModule, i: int, r: int) -> KLRModule:
    if r == 0:
        return M
    n = M.n
    suffix = (i,) * r
    R = restrict_right(M, suffix)
    if R.dim == 0:
        return R
    basis: Dict[Cell, np.ndarray] = {}
    for nu in M.nus:
        if nu[n - r:] != suffix:
            continue
        e = _nilhecke_idempotent(M, nu, n - r, r)
        rnu = nu[:n - r]
        for d in sorted(set(R.deg[rnu].tolist())):
            idx = R.cells[(rnu, d)]
            V, piv = M.F.colspace(e[np.ix_(idx, idx)])
            if V.shape[1]:
                basis[(rnu, d)] = V
    return submodule(R, basis)[0]


def E(M: KLRModule, i: int) -> KLRModule:
    return restrict_left(M, (i,))


def E_star(M: KLRModule, i: int) -> KLRModule:
    return restrict_right(M, (i,))


# ---------------------------------------------------------------------------
# crystal operators


def eps(M: KLRModule, i: int) -> int:
    best = 0
    for nu in M.nus:
        k = 0
        while k < len(nu) and nu[k] == i:
            k += 1
        best = max(best, k)
    return best


def eps_star(M: KLRModule, i: int) -> int:
    best = 0
    for nu in M.nus:
        k = 0
        while k < len(nu) and nu[len(nu) - 1 - k] == i:
            k += 1
        best = max(best, k)
    return best


def weight_of(M: KLRModule) -> Tuple[int, ...]:
    cd = M.cd
    if M.n == 0:
        return (0,) * cd.rank
    return M.weight()


def phi(M: KLRModule, i: int) -> int:
    return eps(M, i) + weight_of(M)[i - 1]


def phi_star(M: KLRModule, i: int) -> int:
    return eps_star(M, i) + weight_of(M)[i - 1]


class Crystal:
    """Crystal operators on simple modules over a fixed field, memoized by key."""

    def __init__(self, cd: CartanDatum, F: Field, max_dim: int = DEFAULT_MAX_DIM):
        self.cd = cd
        self.F = F
        self.max_dim = max_dim
        self._L: Dict[int, KLRModule] = {}
        self._memo: Dict[Tuple[str, int, Tuple], KLRModule] = {}
        self.trivial = trivial_module(cd, F)

    def L(self, i: int) -> KLRModule:
        if i not in self._L:
            self._L[i] = make_L(self.cd, self.F, i, 1)
        return self._L[i]

    def _get(self, op: str, i: int, M: KLRModule, fn) -> KLRModule:
        key = (op, i, M.key())
        if key not in self._memo:
            self._memo[key] = fn()
        return self._memo[key]

    def F_tilde(self, i: int, M: KLRModule) -> KLRModule:
        return self._get("F", i, M, lambda: head_of_product(self.L(i), M, self.max_dim))

    def F_tilde_star(self, i: int, M: KLRModule) -> KLRModule:
        return self._get("F*", i, M, lambda: head_of_product(M, self.L(i), self.max_dim))

    def E_tilde(self, i: int, M: KLRModule) -> Optional[KLRModule]:
        e = eps(M, i)
        if e == 0:
            return None

        def build():
            S = divided_power_left(M, i, e)
            for _ in range(e - 1):
                S = self.F_tilde(i, S)
            return S

        return self._get("E", i, M, build)

    def E_tilde_star(self, i: int, M: KLRModule) -> Optional[KLRModule]:
        e = eps_star(M, i)
        if e == 0:
            return None

        def build():
            S = divided_power_right(M, i, e)
            for _ in range(e - 1):
                S = self.F_tilde_star(i, S)
            return S

        return self._get("E*", i, M, build)

    def E_tilde_max(self, i: int, M: KLRModule) -> KLRModule:
        e = eps(M, i)
        return divided_power_left(M, i, e) if e else M

    def E_tilde_star_max(self, i: int, M: KLRModule) -> KLRModule:
        e = eps_star(M, i)
        return divided_power_right(M, i, e) if e else M

    def F_power(self, i: int, M: KLRModule, r: int) -> KLRModule:
        for _ in range(r):
            M = self.F_tilde(i, M)
        return M

    def F_star_power(self, i: int, M: KLRModule, r: int) -> KLRModule:
        for _ in range(r):
            M = self.F_tilde_star(i, M)
        return M

    def E_star_power(self, i: int, M: KLRModule, r: int) -> Optional[KLRModule]:
        for _ in range(r):
            M = self.E_tilde_star(i, M)
            if M is None:
                return None
        return M

    def E_power(self, i: int, M: KLRModule, r: int) -> Optional[KLRModule]:
        for _ in range(r):
            M = self.E_tilde(i, M)
            if M is None:
                return None
        return M

    def path(self, word: Sequence[int]) -> KLRModule:
        """F~_{a_1} ... F~_{a_n} (trivial): the simple named <a_1...a_n>."""
        M = self.trivial
        for a in reversed(list(word)):
            M = self.F_tilde(a, M)
        return M


def catalog(cr: Crystal, height: int) -> Dict[int, List[KLRModule]]:
    """All simple modules (up to shift) of height <= `height`, by closing under F~."""
    levels: Dict[int, List[KLRModule]] = {0: [cr.trivial]}
    for h in range(1, height + 1):
        seen = {}
        for S in levels[h - 1]:
            for i in cr.cd.index_set:
                T = cr.F_tilde(i, S)
                k = T.key()
                if k not in seen:
                    T.name = T.name or None
                    seen[k] = T
        levels[h] = [seen[k] for k in sorted(seen)]
    return levels
