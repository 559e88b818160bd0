"""Command line interface: ``python -m klrloc VERB ...`` or ``klrloc VERB ...``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from math import comb
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .cartan import CartanError, build_cartan
from .convolution import DEFAULT_MAX_DIM, Crystal, DimensionBoundError, catalog, convolve, eps, eps_star, head_of_product, phi, phi_star
from .detloc import PLAIN, STAR, Centrals, Names, determinantial, parse_word, word_name
from .klr import ModuleError
from .linalg import make_field

CACHE_ENV = "KLRLOC_CACHE_DIR"


@dataclass
class SessionConfig:
    type: str = "A2"
    field: str = "F_16777213"
    q: Optional[Dict[str, Any]] = None
    order: int = 6
    max_dim: int = DEFAULT_MAX_DIM
    height: int = 4
    format: str = "text"

    @classmethod
    def load(cls, path: Optional[str], overrides: Dict[str, Any]) -> "SessionConfig":
        data: Dict[str, Any] = {}
        if path:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
            unknown = set(data) - set(cls.__dataclass_fields__)
            if unknown:
                raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def qtable(self):
        """Q overrides as {"i,j": [[p, q, coeff], ...]}."""
        if not self.q:
            return None
        out = {}
        for key, terms in self.q.items():
            i, j = (int(x) for x in key.split(","))
            out[(i, j)] = {(int(p), int(r)): c for p, r, c in terms}
        return out

    def validate(self) -> None:
        self.cartan()
        make_field(self.field)
        if self.format not in ("text", "json"):
            raise ValueError("format must be text or json")
        if self.order < 1 or self.max_dim < 1 or self.height < 0:
            raise ValueError("order, max_dim and height must be positive")

    def cartan(self):
        return build_cartan(self.type, qtable=self.qtable())

    def crystal(self) -> Crystal:
        return Crystal(self.cartan(), make_field(self.field), self.max_dim)


def _word(text: str):
    return parse_word(text.strip().strip("⟨⟩<>"))


def _emit(cfg: SessionConfig, data: Any, text: str) -> None:
    if cfg.format == "json":
        print(json.dumps(data, indent=1, sort_keys=True, ensure_ascii=False))
    else:
        print(text)


def _module_summary(names: Names, M) -> Dict[str, Any]:
    return {"name": names.name(M), "dim": M.dim, "beta": list(M.beta) if M.beta else [],
            "character": [[list(nu), d, m] for (nu, d), m in sorted(M.character().items())]}


def _cache_dir() -> Optional[Path]:
    d = os.environ.get(CACHE_ENV)
    if not d:
        return None
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


# ---------------------------------------------------------------------------
# verbs


def cmd_cartan(cfg: SessionConfig, args) -> int:
    cd = cfg.cartan()
    data = {
        "type": cd.name,
        "cartan_matrix": cd.cartan_matrix,
        "symmetrizer": [cd.d(i) for i in cd.index_set],
        "w0": list(cd.w0),
        "star": {i: cd.star(i) for i in cd.index_set},
        "Q": {f"{i},{j}": sorted([p, q, str(c)] for (p, q), c in cd.Q(i, j).items())
              for i in cd.index_set for j in cd.index_set if i != j},
    }
    lines = [f"type {cd.name}", "cartan matrix:"] + ["  " + " ".join(f"{x:3d}" for x in row) for row in cd.cartan_matrix]
    lines.append("w0 = " + "".join(f"s{j}" for j in cd.w0))
    _emit(cfg, data, "\n".join(lines))
    return 0


def cmd_catalog(cfg: SessionConfig, args) -> int:
    cr = cfg.crystal()
    names = Names(cr)
    h = args.height if args.height is not None else cfg.height
    levels = catalog(cr, h)
    data = {str(k): [_module_summary(names, M)["name"] for M in v] for k, v in levels.items()}
    lines = [f"height {k}: {len(v)} simple(s): " + " ".join(data[str(k)]) for k, v in levels.items()]
    _emit(cfg, {"counts": {k: len(v) for k, v in levels.items()}, "simples": data}, "\n".join(lines))
    return 0


def _save(M, path: Optional[str]) -> None:
    if path:
        from .io import save_module

        save_module(M, path)


def cmd_conv(cfg: SessionConfig, args) -> int:
    cr = cfg.crystal()
    names = Names(cr)
    M, N = cr.path(_word(args.left)), cr.path(_word(args.right))
    C = convolve(M, N, cfg.max_dim)
    _save(C, args.save)
    data = {"left": names.name(M), "right": names.name(N), "dim": C.dim, "dims": [M.dim, N.dim]}
    data["binomial"] = comb(M.n + N.n, M.n)
    _emit(cfg, data, f"{data['left']} ∘ {data['right']}: dim {C.dim} = {data['binomial']} * {M.dim} * {N.dim}")
    return 0


def cmd_head(cfg: SessionConfig, args) -> int:
    cr = cfg.crystal()
    names = Names(cr)
    M, N = cr.path(_word(args.left)), cr.path(_word(args.right))
    H = head_of_product(M, N, cfg.max_dim)
    _save(H, args.save)
    data = _module_summary(names, H)
    _emit(cfg, data, f"hd({names.name(M)} ∘ {names.name(N)}) = {data['name']} (dim {H.dim})")
    return 0


def cmd_crystal(cfg: SessionConfig, args) -> int:
    cr = cfg.crystal()
    names = Names(cr)
    M = cr.path(_word(args.word))
    cd = cr.cd
    rows = {i: {"eps": eps(M, i), "phi": phi(M, i), "eps*": eps_star(M, i), "phi*": phi_star(M, i)} for i in cd.index_set}
    lines = [f"{names.name(M)}: dim {M.dim}, weight {M.weight() if M.n else ()}"]
    for i, r in rows.items():
        lines.append(f"  i={i}: eps={r['eps']} phi={r['phi']} eps*={r['eps*']} phi*={r['phi*']}")
    _emit(cfg, {"name": names.name(M), "data": rows}, "\n".join(lines))
    return 0


def cmd_det(cfg: SessionConfig, args) -> int:
    cr = cfg.crystal()
    names = Names(cr)
    lam = tuple(int(x) for x in args.weight.split(","))
    if args.central:
        side = STAR if args.central == "star" else PLAIN
        M = Centrals(cr, args.i, side).module(lam)
    else:
        w = tuple(int(c) for c in args.w) if args.w else cr.cd.w0
        v = tuple(int(c) for c in args.v) if args.v else ()
        M = determinantial(cr, lam, w, v)
    _save(M, args.save)
    data = _module_summary(names, M)
    _emit(cfg, data, f"{data['name']} (dim {M.dim})")
    return 0


def cmd_rmat(cfg: SessionConfig, args) -> int:
    from .rmatrix import de, lam, lambdatilde

    cr = cfg.crystal()
    names = Names(cr)
    M, N = cr.path(_word(args.left)), cr.path(_word(args.right))
    data = {"pair": [names.name(M), names.name(N)], "Lambda(M,N)": lam(M, N, cfg.max_dim),
            "Lambda(N,M)": lam(N, M, cfg.max_dim), "d": de(M, N, cfg.max_dim), "Lambda~": lambdatilde(M, N, cfg.max_dim)}
    text = "\n".join(f"{k}: {v}" for k, v in data.items())
    _emit(cfg, data, text)
    return 0


def _invariant_rows(cfg: SessionConfig, args):
    from .affinization import affine_L
    from .polyres import render
    from .reflection import Reflection, de_table
    from .rmatrix import affine_invariants_stable, check_relaff

    cr = cfg.crystal()
    F = cr.F
    cd = cr.cd
    rows = []
    if args.pairs == "K":
        refl = Reflection(cr, args.i, cfg.max_dim)
        for (j, k), r in de_table(refl, cfg.order).items():
            rows.append({"pair": f"K{j},K{k}", "D": render(r["D"]), "expected": render(r["expected"]), "ok": r["ok"],
                         "order": r["report"]["order"], "stable": r["report"]["stable"],
                         "relaff": all(r["relaff"].values())})
    else:
        for j in cd.index_set:
            for k in cd.index_set:
                if j > k:
                    continue
                A, B = affine_L(cd, F, j, cfg.order, "z"), affine_L(cd, F, k, cfg.order, "w")
                inv, rep = affine_invariants_stable(A, B, cfg.max_dim)
                rows.append({"pair": f"L{j}_z,L{k}_w", "D": render(inv.D), "Lt": render(inv.Lt_MN),
                             "order": rep["order"], "stable": rep["stable"], "relaff": all(check_relaff(inv).values())})
    return rows


def cmd_invariants(cfg: SessionConfig, args) -> int:
    rows = _invariant_rows(cfg, args)
    text = "\n".join("  ".join(f"{k}={v}" for k, v in r.items()) for r in rows)
    _emit(cfg, rows, text)
    return 0 if all(r.get("ok", True) and r["stable"] and r["relaff"] for r in rows) else 1


def cmd_check(cfg: SessionConfig, args) -> int:
    if args.what == "relaff":
        args.pairs = args.pairs or "L"
        rows = _invariant_rows(cfg, args)
        ok = all(r["relaff"] for r in rows)
        _emit(cfg, rows, "\n".join(f"{r['pair']}: {'PASS' if r['relaff'] else 'FAIL'}" for r in rows))
        return 0 if ok else 1
    from .affinization import affine_L
    from .rmatrix import check_composite_law, yang_baxter

    cr = cfg.crystal()
    cd, F = cr.cd, cr.F
    colours = [int(c) for c in args.colours] if args.colours else list(cd.index_set)[:3]
    res = []
    for a in colours:
        for b in colours:
            for c in colours:
                L = [affine_L(cd, F, x, 3, v) for x, v in zip((a, b, c), ("z1", "z2", "z3"))]
                ok_u, msg_u = yang_baxter(*L, renormalized=False, max_dim=cfg.max_dim)
                ok_r, msg_r = yang_baxter(*L, renormalized=True, max_dim=cfg.max_dim)
                res.append({"triple": [a, b, c], "universal": ok_u, "renormalized": ok_r, "note": msg_u})
    ok = all(r["universal"] and r["renormalized"] for r in res)
    _emit(cfg, res, "\n".join(f"{r['triple']}: universal {'PASS' if r['universal'] else 'FAIL'}, "
                              f"renormalized {'PASS' if r['renormalized'] else 'FAIL'}" for r in res))
    return 0 if ok else 1


def cmd_reflect(cfg: SessionConfig, args) -> int:
    from .reflection import Reflection, read_table, reflect_table, table_path

    cr = cfg.crystal()
    refl = Reflection(cr, args.i, cfg.max_dim)
    if args.module:
        x = refl(refl.source(args.module))
        out = refl.render(x)
        _emit(cfg, {"source": args.module, "image": out}, f"{args.module} ↦ {out}")
        return 0
    tab = reflect_table(refl, cfg.cartan().name, read_table(table_path(cfg.cartan().name, args.i)))
    from .io import table_to_json

    _emit(cfg, table_to_json(tab), tab.text())
    return 0 if tab.ok else 1


def cmd_tables(cfg: SessionConfig, args) -> int:
    from .io import dump, table_to_json
    from .reflection import SUPPORTED, Reflection, read_table, reflect_table, table_path

    todo = [(t, i) for t, i in SUPPORTED if (args.type is None or t == args.type) and (args.i is None or i == args.i)]
    if not todo:
        print("no shipped table for this selection", file=sys.stderr)
        return 2
    status = 0
    reports = []
    cache = _cache_dir()
    F = make_field(cfg.field)
    for t, i in todo:
        cr = Crystal(build_cartan(t), F, cfg.max_dim)
        tab = reflect_table(Reflection(cr, i, cfg.max_dim), t, read_table(table_path(t, i)))
        reports.append(table_to_json(tab))
        if cache:
            dump(table_to_json(tab), cache / f"table_{t}_{i}.json")
        if cfg.format == "text":
            print(tab.text())
            print(f"{t} i={i}: {'PASS' if tab.ok else 'FAIL'} with {len(tab.rows)} rows")
        status |= 0 if tab.ok else 1
    if cfg.format == "json":
        print(json.dumps(reports, indent=1, ensure_ascii=False))
    return status


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON session config")
    common.add_argument("--type", dest="type", default=argparse.SUPPRESS, help="Cartan type such as A2, A3, C2")
    common.add_argument("--field", default=argparse.SUPPRESS, help="Q or F_<prime>")
    common.add_argument("--order", type=int, default=argparse.SUPPRESS, help="truncation order of affinizations")
    common.add_argument("--max-dim", dest="max_dim", type=int, default=argparse.SUPPRESS, help="dimension bound")
    common.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS)
    p = argparse.ArgumentParser(prog="klrloc", description="quiver Hecke module computations", parents=[common])
    sub = p.add_subparsers(dest="verb", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda name, **kw: _add(name, parents=[common], **kw)

    sub.add_parser("cartan")
    s = sub.add_parser("catalog")
    s.add_argument("--height", type=int)
    for verb in ("conv", "head", "rmat"):
        s = sub.add_parser(verb)
        s.add_argument("left")
        s.add_argument("right")
        if verb != "rmat":
            s.add_argument("--save")
    s = sub.add_parser("crystal")
    s.add_argument("word")
    s = sub.add_parser("det")
    s.add_argument("weight", help="dominant weight as comma separated coordinates")
    s.add_argument("--w", help="reduced word of w (default w0)")
    s.add_argument("--v", help="reduced word of v (default identity)")
    s.add_argument("--central", choices=("plain", "star"))
    s.add_argument("--i", type=int, default=1)
    s.add_argument("--save")
    s = sub.add_parser("invariants")
    s.add_argument("--pairs", choices=("K", "L"), default="L")
    s.add_argument("--i", type=int, default=1)
    s = sub.add_parser("check")
    s.add_argument("what", choices=("relaff", "yb"))
    s.add_argument("--pairs", choices=("K", "L"))
    s.add_argument("--i", type=int, default=1)
    s.add_argument("--colours", help="colours for Yang-Baxter triples, e.g. 12")
    s = sub.add_parser("reflect")
    s.add_argument("--i", type=int, default=1)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--all", action="store_true")
    g.add_argument("--module", help="source in bracket notation, e.g. '⟨21⟩'")
    s = sub.add_parser("tables")
    s.add_argument("--i", type=int)
    return p


VERBS = {
    "cartan": cmd_cartan, "catalog": cmd_catalog, "conv": cmd_conv, "head": cmd_head, "crystal": cmd_crystal,
    "det": cmd_det, "rmat": cmd_rmat, "invariants": cmd_invariants, "check": cmd_check, "reflect": cmd_reflect,
    "tables": cmd_tables,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for k in ("config", "type", "field", "order", "max_dim", "format"):
        if not hasattr(args, k):
            setattr(args, k, None)
    overrides = {"type": args.type, "field": args.field, "order": args.order, "max_dim": args.max_dim,
                 "format": args.format}
    if args.verb == "tables":
        overrides["type"] = None
    try:
        cfg = SessionConfig.load(args.config, overrides)
    except (ValueError, CartanError, OSError) as exc:
        parser.print_usage(sys.stderr)
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    try:
        return VERBS[args.verb](cfg, args)
    except DimensionBoundError as exc:
        print(f"dimension bound exceeded: {exc}", file=sys.stderr)
        return 3
    except (ModuleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
