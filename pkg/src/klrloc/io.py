"""JSON persistence for modules, truncated affinizations and reflection tables."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from .affinization import TruncAff
from .cartan import CartanDatum, build_cartan
from .klr import KLRModule
from .linalg import Field, make_field

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    pass


def _entry(x) -> Union[int, str]:
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x.numerator)
    return int(x)


def _mat_to_json(m: np.ndarray) -> dict:
    return {"shape": list(m.shape), "data": [_entry(x) for x in m.reshape(-1).tolist()]}


def _mat_from_json(F: Field, d: dict) -> np.ndarray:
    flat = [Fraction(x) if isinstance(x, str) else x for x in d["data"]]
    arr = np.array(flat, dtype=object).reshape(d["shape"]) if flat else np.zeros(d["shape"], dtype=object)
    return F.array(arr)


def _word_str(nu) -> str:
    return ",".join(str(c) for c in nu)


def _word_parse(s: str):
    return tuple(int(c) for c in s.split(",")) if s else ()


def cartan_to_json(cd: CartanDatum) -> dict:
    out: Dict[str, Any] = {"label": cd.label, "rank": cd.rank}
    if cd.qtable is not None:
        out["q"] = [[i, j, [[p, q, str(c)] for (p, q), c in sorted(v.items())]] for (i, j), v in sorted(cd.qtable.items())]
    return out


def cartan_from_json(d: dict) -> CartanDatum:
    q = None
    if "q" in d:
        q = {(i, j): {(p, r): Fraction(c) for p, r, c in terms} for i, j, terms in d["q"]}
    return build_cartan(d["label"], d["rank"], q)


def module_to_json(M: KLRModule) -> dict:
    actions = {}
    for g in M.gens:
        key = f"{g[0]}:{g[1]}"
        actions[key] = {_word_str(nu): _mat_to_json(m) for nu, m in M.actions[g].items()}
    return {
        "schema": SCHEMA_VERSION,
        "kind": "module",
        "cartan": cartan_to_json(M.cd),
        "field": M.F.name,
        "n": M.n,
        "name": M.name,
        "parabolic": M.parabolic,
        "zdeg": dict(M.zdeg),
        "degrees": {_word_str(nu): [int(x) for x in M.deg[nu]] for nu in M.nus},
        "actions": actions,
    }


def _check_schema(d: dict, kind: str) -> None:
    if d.get("schema") != SCHEMA_VERSION:
        raise SchemaError(f"schema version {d.get('schema')!r} is not supported (expected {SCHEMA_VERSION})")
    if d.get("kind") != kind:
        raise SchemaError(f"expected a {kind!r} record, found {d.get('kind')!r}")


def module_from_json(d: dict, check: bool = True) -> KLRModule:
    _check_schema(d, "module")
    cd = cartan_from_json(d["cartan"])
    F = make_field(d["field"])
    degrees = {_word_parse(k): v for k, v in d["degrees"].items()}
    actions = {}
    for key, blocks in d["actions"].items():
        kind, _, idx = key.partition(":")
        g = (kind, idx if kind == "z" else int(idx))
        actions[g] = {_word_parse(nu): _mat_from_json(F, m) for nu, m in blocks.items()}
    M = KLRModule(cd, F, d["n"], degrees, actions, d.get("zdeg") or None, name=d.get("name"), parabolic=d.get("parabolic"))
    if check:
        ok, msg = M.check_relations()
        if not ok:
            raise SchemaError(f"loaded module fails the defining relations: {msg}")
    return M


def aff_to_json(A: TruncAff) -> dict:
    return {"schema": SCHEMA_VERSION, "kind": "affinization", "z": A.var, "degree": A.degree, "order": A.order,
            "meta": {k: v for k, v in (A.meta or {}).items() if isinstance(v, (int, str))},
            "module": module_to_json(A.module)}


def aff_from_json(d: dict, check: bool = True) -> TruncAff:
    _check_schema(d, "affinization")
    inner = module_from_json(d["module"], check=check)
    return TruncAff(inner, d["z"], d["degree"], d["order"], d.get("meta") or {})


def table_to_json(tab) -> dict:
    return {"schema": SCHEMA_VERSION, "kind": "table", "type": tab.type, "i": tab.i,
            "rows": [{"source": r.source, "expected": r.expected, "computed": r.computed, "ok": r.ok, "note": r.note}
                     for r in tab.rows]}


def dump(obj: dict, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")


def load(path: Union[str, Path]) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def save_module(M: KLRModule, path) -> None:
    dump(module_to_json(M), path)


def load_module(path, check: bool = True) -> KLRModule:
    return module_from_json(load(path), check=check)
