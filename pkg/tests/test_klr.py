import math

import numpy as np
import pytest

from klrloc.cartan import build_cartan
from klrloc.convolution import convolve
from klrloc.klr import (
    KLRModule,
    ModuleError,
    closure,
    end_is_scalar,
    hom_space,
    is_simple,
    make_L,
    one_dim,
    psi_twist,
    star_dual,
    submodule,
)

from conftest import catalog_of, crystal_of


@pytest.fixture(scope="module")
def A2():
    return build_cartan("A2")


def test_L1_passes(A2, Fp):
    L = make_L(A2, Fp, 1, 1)
    assert L.dim == 1
    assert L.check_relations() == (True, "ok")
    assert L.character() == {((1,), 0): 1}


def test_wrong_degree_is_reported(A2, Fp):
    bad = KLRModule(A2, Fp, 1, {(1,): [0]}, {("x", 0): {(1,): Fp.eye(1)}})
    ok, msg = bad.check_relations()
    assert not ok and msg.startswith("grading")


def test_misnormalized_nilhecke_fails(A2, Fp):
    L = make_L(A2, Fp, 1, 2)
    acts = {g: dict(b) for g, b in L.actions.items()}
    acts[("t", 0)] = {nu: Fp.scale(2, m) for nu, m in acts[("t", 0)].items()}
    bad = KLRModule(A2, Fp, 2, {nu: L.deg[nu].tolist() for nu in L.nus}, acts)
    ok, msg = bad.check_relations()
    assert not ok
    assert "tau1" in msg


@pytest.mark.parametrize("label", ["A2", "C2"])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_rank_one_dimension(label, n, Fp):
    cd = build_cartan(label)
    for i in cd.index_set:
        L = make_L(cd, Fp, i, n)
        assert L.dim == math.factorial(n)
        assert L.nus == [(i,) * n]
        assert L.check_relations()[0]
        assert L.nilpotency_order(0) <= n


def test_rank_one_over_rationals(Q):
    cd = build_cartan("C2")
    L = make_L(cd, Q, 2, 3)
    assert L.dim == 6 and L.check_relations()[0]
    assert is_simple(L)


def test_L_ii_character(Fp):
    cd = build_cartan("C2")
    for i in cd.index_set:
        ch = make_L(cd, Fp, i, 2).character()
        d = cd.d(i)
        assert ch == {((i, i), -d): 1, ((i, i), d): 1}


def test_L_is_self_dual(Fp):
    cd = build_cartan("C2")
    for i in cd.index_set:
        L = make_L(cd, Fp, i, 3)
        assert star_dual(L).key() == L.key()
        assert star_dual(L).character() == L.character()


def test_dual_of_product_swaps_head_and_socle(A2, Fp):
    P = convolve(make_L(A2, Fp, 1, 1), make_L(A2, Fp, 2, 1))
    D = star_dual(P)
    assert D.check_relations()[0]
    assert D.character() == {(nu, -d): m for (nu, d), m in P.character().items()}


def test_double_dual_is_identity(Fp):
    cr = crystal_of("A3", Fp)
    mods = [M for ms in catalog_of(cr, 3).values() for M in ms][:10]
    for M in mods:
        DD = star_dual(star_dual(M))
        assert DD.character() == M.character()
        for g in M.gens:
            for nu in M.nus:
                assert np.array_equal(DD.mat(g, nu), M.mat(g, nu))


def test_psi_twist(A2, Fp):
    assert psi_twist(one_dim(A2, Fp, (1, 2))).nus == [(2, 1)]
    L = make_L(A2, Fp, 2, 3)
    assert psi_twist(L).key() == L.key()
    assert psi_twist(L).check_relations()[0]


def test_psi_reverses_products(Fp):
    cr = crystal_of("C2", Fp)
    M, N = cr.path((1, 2)), cr.path((2, 2))
    lhs = psi_twist(convolve(M, N))
    rhs = convolve(psi_twist(N), psi_twist(M))
    assert lhs.check_relations()[0]
    assert lhs.key() == rhs.key()


def test_closure_examples(A2, Fp):
    P = convolve(make_L(A2, Fp, 1, 1), make_L(A2, Fp, 2, 1))
    assert closure(P, []) == {}
    everything = closure(P, [(c, Fp.eye(P.cell_dim(c))[:, :1]) for c in P.cells])
    assert sum(B.shape[1] for B in everything.values()) == P.dim
    socle_cell = next(c for c in P.cells if c[0] == (2, 1))
    seed = Fp.eye(P.cell_dim(socle_cell))[:, :1]
    S, _ = submodule(P, closure(P, [(socle_cell, seed)]))
    assert S.dim == 1 and S.nus == [(2, 1)]


def test_simplicity_examples(A2, Fp):
    assert is_simple(make_L(A2, Fp, 1, 1))
    assert is_simple(make_L(A2, Fp, 1, 2))
    assert not is_simple(convolve(make_L(A2, Fp, 1, 1), make_L(A2, Fp, 2, 1)))
    with pytest.raises(ModuleError):
        one_dim(A2, Fp, (1, 1))


def test_hom_examples(A2, Fp):
    L1, L2 = make_L(A2, Fp, 1, 1), make_L(A2, Fp, 2, 1)
    H = hom_space(L1, L1)
    assert list(H) == [0] and len(H[0]) == 1
    H = hom_space(convolve(L1, L2), convolve(L2, L1))
    assert {d: len(v) for d, v in H.items()} == {-A2.form(1, 2): 1}
    assert end_is_scalar(convolve(L1, L1))


@pytest.mark.parametrize("label", ["A2", "A3", "C2"])
def test_is_simple_matches_endomorphisms(label, Fp):
    cr = crystal_of(label, Fp)
    cat = catalog_of(cr, 3)
    mods = [M for ms in cat.values() for M in ms]
    tests = list(mods)
    for M in mods[:4]:
        for N in mods[:4]:
            if M.dim * N.dim * math.comb(M.n + N.n, M.n) <= 24:
                tests.append(convolve(M, N))
    for M in tests:
        if M.dim > 24:
            continue
        H = hom_space(M, M)
        scalar = list(H) == [0] and len(H[0]) == 1
        if is_simple(M):
            assert scalar
        assert M.check_relations()[0]


@pytest.mark.parametrize("label", ["A2", "A3", "C2"])
def test_catalog_keys_are_distinct(label, Fp):
    cr = crystal_of(label, Fp)
    mods = [M for ms in catalog_of(cr, 3).values() for M in ms]
    keys = [M.key() for M in mods]
    assert len(set(keys)) == len(keys)
