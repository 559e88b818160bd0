import json

import pytest

from klrloc.affinization import affine_L, check_affinization
from klrloc.cartan import build_cartan
from klrloc.io import (
    SchemaError,
    aff_from_json,
    aff_to_json,
    dump,
    load,
    load_module,
    module_from_json,
    module_to_json,
    save_module,
    table_to_json,
)
from klrloc.klr import make_L
from klrloc.reflection import SUPPORTED, make_reflection, read_table, reflect_table, table_path

from conftest import catalog_of, crystal_of


@pytest.mark.parametrize("label", ["A2", "C2"])
def test_catalog_round_trip(label, Fp):
    cr = crystal_of(label, Fp)
    for h, mods in catalog_of(cr, 3).items():
        for M in mods:
            if M.n == 0:
                continue
            d = module_to_json(M)
            N = module_from_json(json.loads(json.dumps(d)))
            assert N.key() == M.key()
            assert module_to_json(N) == d


def test_round_trip_over_q(Q):
    cd = build_cartan("C2")
    M = make_L(cd, Q, 1, 3)
    N = module_from_json(module_to_json(M))
    assert N.F.name == "Q" and N.key() == M.key()


def test_file_round_trip(tmp_path, Fp):
    cd = build_cartan("A2")
    M = make_L(cd, Fp, 2, 2)
    p = tmp_path / "m.json"
    save_module(M, p)
    assert load_module(p).key() == M.key()
    first = p.read_bytes()
    save_module(load_module(p), p)
    assert p.read_bytes() == first


def test_affinization_round_trip(Fp):
    cd = build_cartan("A2")
    A = affine_L(cd, Fp, 1, 4, "z")
    B = aff_from_json(aff_to_json(A))
    assert (B.var, B.degree, B.order) == (A.var, A.degree, A.order)
    assert check_affinization(B, make_L(cd, Fp, 1, 1))[0]


def test_corrupted_entry_rejected(Fp):
    cd = build_cartan("A2")
    d = module_to_json(make_L(cd, Fp, 1, 2))
    blk = d["actions"]["t:0"]["1,1"]
    blk["data"][0] = (blk["data"][0] + 1) % Fp.p
    with pytest.raises(SchemaError):
        module_from_json(d)


def test_schema_checks(Fp):
    cd = build_cartan("A2")
    d = module_to_json(make_L(cd, Fp, 1, 1))
    with pytest.raises(SchemaError):
        module_from_json({**d, "schema": 99})
    with pytest.raises(SchemaError):
        module_from_json({**d, "kind": "table"})
    with pytest.raises(SchemaError):
        aff_from_json(d)


def test_table_reports_are_byte_stable(tmp_path, Fp):
    label, i = SUPPORTED[0]
    refl = make_reflection(build_cartan(label), Fp, i)
    tab = reflect_table(refl, label, read_table(table_path(label, i)))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    dump(table_to_json(tab), a)
    tab2 = reflect_table(refl, label, read_table(table_path(label, i)))
    dump(table_to_json(tab2), b)
    assert a.read_bytes() == b.read_bytes()
    assert load(a)["rows"][2]["computed"] == "0"


def test_golden_table_files():
    for label, i in SUPPORTED:
        text = table_path(label, i).read_text(encoding="utf-8")
        assert text.startswith(f"# type {label}, i = {i}")
        assert text.endswith("\n") and "\r" not in text
        assert all("↦" in line for line in text.splitlines()[1:] if line.strip())
