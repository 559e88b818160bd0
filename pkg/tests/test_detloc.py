import itertools

import pytest

from klrloc.cartan import build_cartan
from klrloc.convolution import eps, eps_star, head_of_product, r_matrix
from klrloc.detloc import (
    PLAIN,
    STAR,
    Localizer,
    Names,
    cuspidal_decompose,
    cuspidals,
    determinantial,
    from_expression,
    loc_equal,
    module_weight,
    parse_expression,
    parse_word,
    render,
    word_name,
)
from klrloc.klr import ModuleError, character_key, is_simple, psi_twist

from conftest import catalog_of, crystal_of


@pytest.fixture(scope="module")
def a2(Fp):
    cr = crystal_of("A2", Fp)
    return cr, Names(cr)


def test_single_reflection(Fp):
    for label in ("A2", "A3", "C2"):
        cr = crystal_of(label, Fp)
        cd = cr.cd
        for i in cd.index_set:
            D = determinantial(cr, cd.fundamental(i), (i,))
            assert D.key() == cr.path((i,)).key()


@pytest.mark.parametrize("label", ["A2", "A3", "C2"])
def test_two_reflections(label, Fp):
    cr = crystal_of(label, Fp)
    cd = cr.cd
    for i in cd.index_set:
        for j in cd.index_set:
            if i == j or cd.c(i, j) == 0:
                continue
            D = determinantial(cr, cd.fundamental(j), (i, j))
            want = head_of_product(cr.path((i,) * -cd.c(i, j)), cr.path((j,)))
            assert D.key() == want.key()


def test_a2_longest(a2):
    cr, names = a2
    cd = cr.cd
    D = determinantial(cr, cd.fundamental(1), cd.w0)
    assert D.beta == (1, 1)
    assert names.name(D) == "⟨21⟩"
    assert is_simple(D)


@pytest.mark.parametrize("label", ["A3", "C2"])
def test_head_composition(label, Fp):
    cr = crystal_of(label, Fp)
    cd = cr.cd
    w = cd.w0
    for j in cd.index_set:
        Lam = cd.fundamental(j)
        for k in range(1, len(w)):
            v = w[k:]
            if cd.length(v) != len(v):
                continue
            upper = determinantial(cr, Lam, w, v)
            lower = determinantial(cr, Lam, v)
            if upper.n == 0 or lower.n == 0 or upper.n + lower.n > 6:
                continue
            assert head_of_product(upper, lower).key() == determinantial(cr, Lam, w).key()


def test_bruhat_rejection(a2):
    cr, _ = a2
    with pytest.raises(ModuleError):
        determinantial(cr, (1, 0), (1,), (2,))
    with pytest.raises(ModuleError):
        determinantial(cr, (-1, 1), (1,))


@pytest.mark.parametrize("label", ["A2", "A3", "C2"])
def test_central_objects(label, Fp):
    cr = crystal_of(label, Fp)
    cd = cr.cd
    for i in cd.index_set:
        P, S = Localizer(cr, i, PLAIN), Localizer(cr, i, STAR)
        for j in cd.index_set:
            C, Cs = P.cent.fundamental(j), S.cent.fundamental(j)
            assert eps(C, i) == 0 and eps_star(Cs, i) == 0
            assert module_weight(C) == P.cent.weight(cd.fundamental(j))
            assert psi_twist(C).key() == S.cent.fundamental(cd.star(j)).key()


def test_central_names_a2(a2):
    cr, names = a2
    P, S = Localizer(cr, 1, PLAIN), Localizer(cr, 1, STAR)
    assert [names.name(P.cent.fundamental(j)) for j in (1, 2)] == ["⟨21⟩", "⟨2⟩"]
    assert [names.name(S.cent.fundamental(j)) for j in (1, 2)] == ["⟨2⟩", "⟨12⟩"]


def test_central_rejects_non_dominant(a2):
    cr, _ = a2
    with pytest.raises(ModuleError):
        Localizer(cr, 1, PLAIN).cent.module((1, -1))


@pytest.mark.parametrize("label", ["A2", "C2"])
def test_central_multiplicative(label, Fp):
    cr = crystal_of(label, Fp)
    P = Localizer(cr, 1, PLAIN)
    for Lam in [(1, 1), (2, 0), (0, 2)]:
        prod = P.central_character(Lam)
        assert character_key(prod) == character_key(P.cent.module(Lam).character())


@pytest.mark.parametrize("label", ["A2", "C2"])
def test_centrality(label, Fp):
    cr = crystal_of(label, Fp)
    cd = cr.cd
    cat = catalog_of(cr, 3)
    for i in cd.index_set:
        P = Localizer(cr, i, PLAIN)
        for j in cd.index_set:
            C = P.cent.fundamental(j)
            for h in (1, 2):
                for M in cat[h]:
                    if eps(M, i) or C.n + M.n > 6:
                        continue
                    MN, NM, f, s = r_matrix(C, M)
                    assert all(cr.F.rank(f[nu]) == MN.block_dim(nu) for nu in MN.nus)
                    assert s == P.cent.lam_central_left(cd.fundamental(j), module_weight(M))


def test_central_lambda_formulas(Fp):
    for label in ("A2", "A3"):
        cr = crystal_of(label, Fp)
        cd = cr.cd
        for i in cd.index_set:
            P, S = Localizer(cr, i, PLAIN), Localizer(cr, i, STAR)
            for a in cd.index_set:
                Lam = cd.fundamental(a)
                for j in cd.index_set:
                    Lj = cr.path((j,))
                    w = cd.weyl_act(P.cent.w, Lam)
                    pl = cd.pair_weights(tuple(x + y for x, y in zip(w, Lam)), cd.alpha(j))
                    if eps(Lj, i) == 0:
                        assert P.lam_modules(P.cent.fundamental(a), Lj) == pl
                    if eps_star(Lj, i) == 0:
                        w0l = cd.weyl_act(cd.w0, Lam)
                        st = -cd.pair_weights(tuple(x + y for x, y in zip(w0l, cd.reflect(i, Lam))), cd.alpha(j))
                        assert S.lam_modules(Lj, S.cent.fundamental(a)) == st


def test_a2_normal_forms(a2):
    cr, names = a2
    P = Localizer(cr, 1, PLAIN)
    x = P.localize(cr.path((1,)))
    assert render(x, P, names) == "⟨2⟩^{-1}∘⟨21⟩"
    assert x.lam == (0, -1)
    assert P.localize(cr.path((1, 2))).is_zero
    M = cr.path((2, 1))
    y = P.localize(M)
    assert y.lam == (0, 0) and y.S.key() == M.key()


def test_loc_equal(a2):
    cr, names = a2
    P = Localizer(cr, 1, PLAIN)
    x = P.localize(cr.path((1,)))
    # absorbing one more copy of C_2 leaves the class unchanged
    C2 = P.cent.fundamental(2)
    y = P.make((0, -2), head_of_product(C2, x.S))
    assert loc_equal(P, x, y)
    a = P.localize(cr.path((2,)))
    assert not loc_equal(P, a, P.localize(cr.path((2, 1))))
    assert loc_equal(P, a, a)
    assert not loc_equal(P, x, P.zero()) and loc_equal(P, P.zero(), P.zero())


def test_loc_equal_is_equivalence(a2):
    cr, _ = a2
    P = Localizer(cr, 2, STAR)
    cat = catalog_of(cr, 3)
    items = [P.localize(M) for h in (1, 2, 3) for M in cat[h]]
    for a, b in itertools.combinations(items, 2):
        assert loc_equal(P, a, b) == loc_equal(P, b, a)
    for a in items:
        assert loc_equal(P, a, P.normalize(a))
        assert loc_equal(P, P.normalize(a), P.normalize(P.normalize(a)))


def test_expression_round_trip(a2):
    cr, names = a2
    P = Localizer(cr, 1, PLAIN)
    for w in [(1,), (2,), (2, 1), (1, 1)]:
        x = P.localize(cr.path(w))
        text = render(x, P, names)
        assert loc_equal(P, from_expression(text, P, names), x)
    assert from_expression("0", P, names).is_zero


def test_lambda_on_localized(a2):
    cr, _ = a2
    P = Localizer(cr, 1, PLAIN)
    Y = cr.path((2,))
    inv = P.make((0, -1), cr.trivial)
    C = P.make((0, 1), cr.trivial)
    assert P.lam(inv, Y) == -P.lam(C, Y)


def test_word_names():
    assert word_name((2, 1, 1, 2)) == "21²2"
    assert parse_word("21²2") == (2, 1, 1, 2)
    assert parse_word("21^22") == (2, 1, 1, 2)
    assert parse_expression("⟨2⟩∘⟨12⟩^{-1}") == [((2,), 1), ((1, 2), -1)]
    assert parse_expression("0") is None


@pytest.mark.parametrize("label", ["A2", "A3", "C2"])
def test_cuspidals(label, Fp):
    cr = crystal_of(label, Fp)
    cd = cr.cd
    word = cd.w0
    cusp = cuspidals(cr, word)
    assert len(cusp) == len(word)
    assert all(is_simple(S) for S in cusp)
    for S in cusp:
        assert sum(S.beta) <= 3
    for M in catalog_of(cr, 3)[3]:
        a = cuspidal_decompose(cr, M, word, cusp)
        assert sum(x * sum(S.beta) for x, S in zip(a, cusp)) == 3
