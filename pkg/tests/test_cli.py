import json

import pytest

from klrloc.cli import SessionConfig, run


def out_of(capsys, argv):
    code = run(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_cartan(capsys):
    code, out, _ = out_of(capsys, ["cartan", "--type", "C2"])
    assert code == 0 and "w0 = s2s1s2s1" in out


def test_catalog_counts(capsys):
    code, out, _ = out_of(capsys, ["catalog", "--type", "A3", "--height", "3", "--format", "json"])
    data = json.loads(out)
    assert code == 0 and data["counts"] == {"0": 1, "1": 3, "2": 8, "3": 17}


def test_conv_head_crystal(capsys):
    assert "dim 2 = 2 * 1 * 1" in out_of(capsys, ["conv", "1", "2", "--type", "A2"])[1]
    assert "= ⟨12⟩ (dim 1)" in out_of(capsys, ["head", "1", "2", "--type", "A2"])[1]
    assert "i=1: eps=1" in out_of(capsys, ["crystal", "121", "--type", "A2"])[1]


def test_det_and_rmat(capsys):
    assert out_of(capsys, ["det", "1,0", "--type", "A2"])[1].startswith("⟨21⟩")
    code, out, _ = out_of(capsys, ["rmat", "1", "2", "--type", "A2"])
    assert code == 0 and "Lambda(M,N): 1" in out


def test_tables_a2(capsys):
    code, out, _ = out_of(capsys, ["tables", "--type", "A2", "--i", "1"])
    assert code == 0 and "A2 i=1: PASS with 4 rows" in out


def test_tables_unknown(capsys):
    code, _, err = out_of(capsys, ["tables", "--type", "A3", "--i", "3"])
    assert code == 2 and "no shipped table" in err


def test_invariants_k_pairs(capsys):
    code, out, _ = out_of(capsys, ["invariants", "--type", "C2", "--pairs", "K"])
    assert code == 0 and "D=z1^2 - z2" in out and "ok=True" in out


def test_check_yb(capsys):
    code, out, _ = out_of(capsys, ["check", "yb", "--type", "A2", "--colours", "12"])
    assert code == 0 and out.count("PASS") == 16


def test_check_relaff(capsys):
    code, out, _ = out_of(capsys, ["check", "relaff", "--type", "A2"])
    assert code == 0 and "FAIL" not in out


def test_reflect_module(capsys):
    code, out, _ = out_of(capsys, ["reflect", "--type", "A3", "--i", "1", "--module", "⟨32⟩"])
    assert code == 0 and out.strip() == "⟨32⟩ ↦ ⟨132⟩"


def test_bad_config(capsys, tmp_path):
    code, _, err = out_of(capsys, ["cartan", "--type", "X9"])
    assert code == 2 and "invalid configuration" in err
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"type": "A2", "colour": 3}))
    code, _, err = out_of(capsys, ["cartan", "--config", str(cfg)])
    assert code == 2 and "unknown config keys" in err


def test_dimension_bound(capsys):
    code, _, err = out_of(capsys, ["conv", "1122", "1122", "--type", "A2", "--max-dim", "10"])
    assert code == 3 and "dimension" in err


def test_cache_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("KLRLOC_CACHE_DIR", str(tmp_path))
    assert out_of(capsys, ["tables", "--type", "A2", "--i", "1"])[0] == 0
    assert list(tmp_path.iterdir())


def test_config_defaults():
    cfg = SessionConfig.load(None, {"type": "C2"})
    assert cfg.order == 6 and cfg.cartan().name == "C2"
    with pytest.raises(ValueError):
        SessionConfig.load(None, {"format": "xml"})
