"""operad-forge: compose, normalize, verify, count and render.

Exit codes: 0 success, 1 a verified property failed, 2 input did not parse
or validate, 3 arity or color mismatch.
"""
from __future__ import annotations

import argparse
import itertools
import json
import os
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import algebra_lab as al
from .geometry import (FULL, LittleDiscs, ParseError, SwissCheese, compose, config_from_dict,
                       config_to_dict, dumps, identify_half_lower, random_full_sample,
                       random_sc_sample, validate_config)
from .operad_core import ArityMismatch, ColorMismatch, check_operad_axioms
from .render import config_svg, report_figure, tree_svg
from .schinf import (NotEvaluable, NotInImage, SDElement, SemidirectOperad, WordTypeError,
                     chain_from_le, compose_schinf, rho_e, schinf_from_dict, schinf_to_dict,
                     word_concat, word_from_dict, word_normalize, word_to_dict)
from .trees import (WOperad, compose_le, e_operad, ed_arity_sampler, ed_label_sampler,
                    le_from_dict, le_to_dict, normalize_e, normalize_le, normalize_w,
                    random_level_sequence, random_wtree, tree_from_dict, tree_to_dict)

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_MISMATCH = 0, 1, 2, 3


class InvalidInput(Exception):
    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or []


@dataclass
class CommandConfig:
    command: str
    seed: int = 0
    cases: int = 200
    dim: int = 2
    prime: int = 2
    max_arity: int = 4
    out: str | None = None

    def validate(self):
        for name in ("cases", "dim", "max_arity"):
            if getattr(self, name) <= 0:
                raise InvalidInput(f"--{name.replace('_', '-')} must be positive")
        if not al.is_prime(self.prime):
            raise InvalidInput(f"--prime {self.prime} is not prime")


def threads() -> int:
    try:
        return max(1, int(os.environ.get("OPERAD_FORGE_THREADS", "1")))
    except ValueError:
        return 1


def run_cases(fn, count: int) -> list:
    """fn(case_id) for each case, results sorted by case id."""
    with ThreadPoolExecutor(max_workers=threads()) as pool:
        results = list(pool.map(fn, range(count)))
    return sorted(results, key=lambda r: r["case"])


# ---------------------------------------------------------------- input

def _load(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: invalid JSON: {exc}") from None


def _config(data, path="input"):
    try:
        cfg = config_from_dict(data)
    except ParseError as exc:
        raise InvalidInput(f"{path}: {exc}") from None
    bad = validate_config(cfg)
    if bad:
        raise InvalidInput(f"{path}: invalid configuration", bad)
    return cfg


def _decode_config(data):
    return _config(data)


def _tree(data, path="input"):
    try:
        return tree_from_dict(data, _decode_config)
    except ParseError as exc:
        raise InvalidInput(f"{path}: {exc}") from None


def _le(data, path="input"):
    try:
        return le_from_dict(data, _decode_config)
    except (ParseError, ValueError) as exc:
        raise InvalidInput(f"{path}: {exc}") from None


def _dim_of(cfgs) -> int:
    dims = {c.d for c in cfgs}
    if len(dims) > 1:
        raise InvalidInput("inputs mix dimensions")
    return dims.pop() if dims else 2


def _labels(t):
    from .trees import Edge, Leaf
    if isinstance(t, Leaf):
        return []
    out = [t.label]
    for ch in t.children:
        if isinstance(ch, Edge):
            out += _labels(ch.node)
    return out


def _sd_element(data, path):
    if not isinstance(data, dict) or data.get("color") not in ("f", "h"):
        raise InvalidInput(f"{path}: a semidirect element needs color f or h")
    if data["color"] == "f":
        return SDElement("f", _tree(data.get("tree"), path))
    return SDElement("h", data.get("schinf"))


def _sd_to_dict(x: SDElement) -> dict:
    if x.color == "f":
        return {"color": "f", "tree": tree_to_dict(x.value)}
    return {"color": "h", "schinf": schinf_to_dict(x.value)}


# ---------------------------------------------------------------- commands

def cmd_compose(inputs: list, mode: str) -> dict:
    """The first input is the outer element, the rest fill its slots in order."""
    if not inputs:
        raise InvalidInput("compose needs at least one input")
    raw = [_load(p) for p in inputs]
    if mode in ("full", "mixed"):
        cfgs = [_config(d, p) for d, p in zip(raw, inputs)]
        outer = cfgs[0]
        if (mode == "full") != (outer.target == FULL):
            raise ColorMismatch(f"mode {mode} does not match an outer {outer.target} target")
        return config_to_dict(compose(outer, cfgs[1:]))
    if mode == "le":
        seqs = [_le(d, p) for d, p in zip(raw, inputs)]
        ed = LittleDiscs(_dim_of([x for s in seqs for a in s.levels for x in a.parts]))
        out = seqs[0]
        for s in seqs[1:]:
            if out.n_in != s.n_out:
                raise ArityMismatch(f"{out.n_in} inputs against {s.n_out} outputs")
            out = compose_le(ed, out, s)
        return le_to_dict(normalize_le(ed, out))
    if mode == "schinf":
        trees = [_tree(d.get("tree") if isinstance(d, dict) else None, p)
                 for d, p in zip(raw, inputs)]
        sc = SwissCheese(_dim_of([x for t in trees for x in _labels(t)]))
        try:
            xs = [schinf_from_dict(sc, d) for d in raw]
        except (ParseError, NotInImage, ValueError) as exc:
            if isinstance(exc, (ArityMismatch, ColorMismatch)):
                raise
            raise InvalidInput(str(exc)) from None
        return schinf_to_dict(compose_schinf(sc, xs[0], xs[1:]))
    if mode == "semidirect":
        elems = [_sd_element(d, p) for d, p in zip(raw, inputs)]
        labels = []
        for e in elems:
            if e.color == "f":
                labels += _labels(e.value)
            else:
                labels += _labels(_tree((e.value or {}).get("tree"), "schinf"))
        d = _dim_of(labels)
        sc, ed = SwissCheese(d), LittleDiscs(d)
        try:
            elems = [e if e.color == "f" else SDElement("h", schinf_from_dict(sc, e.value))
                     for e in elems]
        except (ParseError, NotInImage) as exc:
            raise InvalidInput(str(exc)) from None
        op = SemidirectOperad(d, e_operad(ed), lambda o: rho_e(ed, o))
        try:
            return _sd_to_dict(op.compose(elems[0], elems[1:]))
        except NotEvaluable as exc:
            raise InvalidInput(f"composite outside the evaluable fragment: {exc}") from None
    raise InvalidInput(f"unknown mode {mode!r}")


def cmd_normalize(path: str, kind: str, seed: int | None = None) -> dict:
    data = _load(path)
    rng = random.Random(seed) if seed is not None else None
    if kind in ("w", "e"):
        t = _tree(data, path)
        labels = _labels(t)
        d = _dim_of(labels)
        op = SwissCheese(d) if any(getattr(x, "target", FULL) != FULL for x in labels) else LittleDiscs(d)
        t = normalize_w(op, t, rng) if kind == "w" else normalize_e(op, t, rng)
        return tree_to_dict(t)
    if kind == "le":
        s = _le(data, path)
        ed = LittleDiscs(_dim_of([x for a in s.levels for x in a.parts]))
        return le_to_dict(normalize_le(ed, s, rng))
    if kind == "word":
        try:
            w = word_from_dict(data)
        except ParseError as exc:
            raise InvalidInput(f"{path}: {exc}") from None
        parts = [x for tok in w.tokens if tok[0] == "act" for x in tok[1].parts]
        ed = LittleDiscs(_dim_of(parts))
        return word_to_dict(word_normalize(ed, w, rng))
    raise InvalidInput(f"unknown kind {kind!r}")


def cmd_count(what: str, cfg: CommandConfig, algebra: str | None = None) -> dict:
    p, n = cfg.prime, cfg.dim
    if what == "algebras":
        return {"p": p, "dim": n, "count": len(al.enumerate_algebras(p, n))}
    if what == "hochschild":
        u = [1] + [0] * (n - 1)
        res = al.hochschild_d1(al.e0_oalgebra(p, n, u), cfg.max_arity)
        return {"p": p, "dim_a": n, "dim": res.dim, "hom_dim": n * n,
                "identity_preserved": res.p_class_to_identity}
    B = _algebra(algebra, p) if algebra else al.field_algebra(p)
    if what == "modules":
        bij = al.module_map_bijection(B, n)
        return {"p": p, "dim_b": B.dim, "dim_a": n, "modules": len(bij.left),
                "maps": len(bij.right), "bijection": bij.ok}
    if what == "free-module":
        F = al.free_oa_module(al.assoc_oalgebra(B), cfg.max_arity)
        return {"p": p, "dim_a": B.dim, "dim_m": n, "dim": F.dim * n,
                "closed_form": al.free_assoc_dim_closed_form(B.dim, n)}
    raise InvalidInput(f"unknown count {what!r}")


def _algebra(path: str, p: int):
    data = _load(path)
    try:
        B = al.algebra_from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"{path}: {exc}") from None
    if B.p != p:
        raise InvalidInput(f"{path}: algebra is over F_{B.p}, --prime is {p}")
    return B


def cmd_render(path: str) -> str:
    data = _load(path)
    if isinstance(data, dict) and "discs" in data:
        cfg = _config(data, path)
        try:
            return config_svg(cfg)
        except ValueError as exc:
            raise InvalidInput(str(exc)) from None
    if isinstance(data, dict) and ("vertex" in data or "leaf" in data):
        return tree_svg(_tree(data, path))
    if isinstance(data, dict) and "tree" in data:
        return tree_svg(_tree(data["tree"], path))
    raise InvalidInput(f"{path}: expected a configuration or a tree")


# ---------------------------------------------------------------- verify suites

def _check(name, fn):
    t0 = time.perf_counter()
    res = fn()
    res["name"] = name
    res["ok"] = not res.get("counterexamples")
    res["_seconds"] = time.perf_counter() - t0
    return res


def suite_axioms(cfg: CommandConfig) -> list:
    out = []
    for name, op, sampler in (
            (f"E_{cfg.dim} axioms", LittleDiscs(cfg.dim),
             lambda rng: random_full_sample(rng, cfg.dim, min(cfg.max_arity, 3))),
            (f"SC_{cfg.dim} axioms", SwissCheese(cfg.dim),
             lambda rng: random_sc_sample(rng, cfg.dim, min(cfg.max_arity, 3)))):
        def run(op=op, sampler=sampler):
            rep = check_operad_axioms(op, sampler, cfg.cases, cfg.seed)
            return {"count": rep.checked, "counterexamples": rep.failures + rep.noncomposable}
        out.append(_check(name, run))
    return out


def suite_confluence(cfg: CommandConfig) -> list:
    d = cfg.dim
    ed = LittleDiscs(d)
    label = ed_label_sampler(d, 2)
    arity = ed_arity_sampler(d)

    def wtree_case(i):
        rng = random.Random(cfg.seed * 100003 + i)
        t = random_wtree(rng, ed, label, depth=3)
        a = normalize_w(ed, t, random.Random(i))
        b = normalize_w(ed, t, random.Random(i + 1))
        ok = a == b and normalize_w(ed, a) == a
        return {"case": i, "ok": ok}

    def le_case(i):
        rng = random.Random(cfg.seed * 100019 + i)
        s = random_level_sequence(rng, ed, arity, n_out=rng.randint(1, 2))
        a = normalize_le(ed, s, random.Random(i))
        b = normalize_le(ed, s, random.Random(i + 1))
        return {"case": i, "ok": a == b and normalize_le(ed, a) == a}

    def run(fn):
        res = run_cases(fn, cfg.cases)
        return {"count": len(res), "counterexamples": [r["case"] for r in res if not r["ok"]]}

    return [_check("W-tree confluence", lambda: run(wtree_case)),
            _check("level sequence confluence", lambda: run(le_case))]


def suite_relations(cfg: CommandConfig) -> list:
    d = cfg.dim
    ed = LittleDiscs(d)
    arity = ed_arity_sampler(d)

    def related(i):
        rng = random.Random(cfg.seed * 7919 + i)
        s = random_level_sequence(rng, ed, arity, n_out=rng.randint(1, 2))
        s2 = normalize_le(ed, s, rng)
        ok = word_normalize(ed, chain_from_le(s), rng) == word_normalize(ed, chain_from_le(s2))
        return {"case": i, "ok": ok}

    def spliced(i):
        rng = random.Random(cfg.seed * 7927 + i)
        while True:
            s2 = random_level_sequence(rng, ed, arity, n_out=rng.randint(1, 2))
            s1 = random_level_sequence(rng, ed, arity, n_out=1)
            if s1.n_in == s2.n_out:
                break
        c = compose_le(ed, s1, s2)
        ok = (word_normalize(ed, chain_from_le(c))
              == word_normalize(ed, word_concat(chain_from_le(s1), chain_from_le(s2))))
        return {"case": i, "ok": ok}

    def run(fn):
        res = run_cases(fn, cfg.cases)
        return {"count": len(res), "counterexamples": [r["case"] for r in res if not r["ok"]]}

    return [_check("related sequences give equal chains", lambda: run(related)),
            _check("chains of composites splice", lambda: run(spliced))]


def suite_d1_universal(cfg: CommandConfig) -> list:
    p, n = cfg.prime, cfg.dim

    def bijections():
        bad, count = [], 0
        for k in range(n + 1):
            for B in al.enumerate_algebras(p, k):
                for da in range(n + 1):
                    for u in itertools.product(range(p), repeat=da):
                        bij = al.sc1_bijection(B, da, u, cfg.max_arity)
                        count += 1
                        if not bij.ok:
                            bad.append({"B": al.algebra_to_dict(B), "dim_a": da, "u": list(u),
                                        "actions": len(bij.left), "maps": len(bij.right)})
        return {"count": count, "counterexamples": bad}

    def naturality():
        B, B2 = al.product_algebra(p), al.field_algebra(p)
        g = np.array([[1], [0]])
        bad = [] if al.naturality_check(B, B2, g, min(n, 2), [1] + [0] * (min(n, 2) - 1),
                                        cfg.max_arity) else [{"map": "k x k -> k"}]
        return {"count": 1, "counterexamples": bad}

    def semidirect():
        bad = []
        for kind in ("assoc", "unit"):
            for da in range(1, n + 1):
                B = al.product_algebra(p) if kind == "assoc" else 2
                r = al.universal_cheese_discrete(kind, B, da, [1] + [0] * (da - 1), p,
                                                 cfg.max_arity)
                if not r["bijection"]:
                    bad.append(r)
        return {"count": 2 * n, "counterexamples": bad}

    return [_check("SC_1 actions vs algebra maps", bijections),
            _check("naturality in B", naturality),
            _check("semidirect actions vs O-algebra maps", semidirect)]


def suite_monad(cfg: CommandConfig) -> list:
    p, n = cfg.prime, cfg.dim

    def monad():
        bad, count = [], 0
        for k in range(1, n + 1):
            for B in al.enumerate_algebras(p, k):
                F = al.free_oa_module(al.assoc_oalgebra(B), cfg.max_arity)
                fails = al.monad_law_failures(F)
                count += 1
                if fails or F.dim != al.free_assoc_dim_closed_form(B.dim, 1):
                    bad.append({"A": al.algebra_to_dict(B), "failures": fails, "dim": F.dim})
        return {"count": count, "counterexamples": bad}

    def mod_sc():
        bad, count = [], 0
        for da in range(n + 1):
            for u in itertools.product(range(p), repeat=da):
                for dm in range(n + 1):
                    got = al.mod_sc_leq1_count(al.e0_oalgebra(p, da, u), dm, cfg.max_arity)
                    count += 1
                    if got[0] != got[1] or got[0] != p ** (da * dm) or not got[2]:
                        bad.append({"dim_a": da, "u": list(u), "dim_m": dm, "counts": got[:2]})
        return {"count": count, "counterexamples": bad}

    def hochschild():
        bad = []
        for da in range(n + 2):
            res = al.hochschild_d1(al.e0_oalgebra(p, da, [1] + [0] * (da - 1) if da else []),
                                   cfg.max_arity)
            if res.dim != da * da or not res.p_class_to_identity:
                bad.append({"dim_a": da, "dim": res.dim})
        return {"count": n + 2, "counterexamples": bad}

    return [_check("free module monad laws", monad),
            _check("degree-1 data vs maps out of A^sc", mod_sc),
            _check("Hochschild object is hom(A, A)", hochschild)]


SUITES = {"axioms": suite_axioms, "confluence": suite_confluence, "relations": suite_relations,
          "d1-universal": suite_d1_universal, "monad": suite_monad}


def cmd_verify(suite: str, cfg: CommandConfig) -> tuple:
    """(report, timings); the report holds no timings so it is reproducible."""
    checks = SUITES[suite](cfg)
    timings = [{"name": c["name"], "ok": c["ok"], "seconds": c.pop("_seconds")} for c in checks]
    report = {"suite": suite, "seed": cfg.seed, "cases": cfg.cases, "dim": cfg.dim,
              "prime": cfg.prime, "max_arity": cfg.max_arity,
              "ok": all(c["ok"] for c in checks), "checks": checks}
    return report, timings


# ---------------------------------------------------------------- entry point

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="operad-forge", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cases", type=int, default=200)
    common.add_argument("--dim", type=int, default=2,
                        help="disc dimension d, or the vector space bound for algebra suites")
    common.add_argument("--prime", type=int, default=2)
    common.add_argument("--max-arity", type=int, default=4)
    common.add_argument("--out", default=None)
    sub = ap.add_subparsers(dest="command", required=True)
    c = sub.add_parser("compose", parents=[common])
    c.add_argument("--mode", choices=["full", "mixed", "le", "schinf", "semidirect"], default="full")
    c.add_argument("inputs", nargs="+")
    nm = sub.add_parser("normalize", parents=[common])
    nm.add_argument("--kind", choices=["w", "e", "le", "word"], default="w")
    nm.add_argument("input")
    v = sub.add_parser("verify", parents=[common])
    v.add_argument("--suite", choices=sorted(SUITES), default="axioms")
    ct = sub.add_parser("count", parents=[common])
    ct.add_argument("what", choices=["algebras", "modules", "free-module", "hochschild"])
    ct.add_argument("--algebra", default=None, help="algebra JSON file")
    r = sub.add_parser("render", parents=[common])
    r.add_argument("input")
    return ap


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    cfg = CommandConfig(args.command, args.seed, args.cases, args.dim, args.prime,
                        args.max_arity, args.out)
    try:
        cfg.validate()
        if args.command == "compose":
            _emit(dumps(cmd_compose(args.inputs, args.mode)), cfg.out)
        elif args.command == "normalize":
            _emit(dumps(cmd_normalize(args.input, args.kind)), cfg.out)
        elif args.command == "count":
            _emit(dumps(cmd_count(args.what, cfg, args.algebra)), cfg.out)
        elif args.command == "render":
            _emit(cmd_render(args.input), cfg.out)
        elif args.command == "verify":
            report, timings = cmd_verify(args.suite, cfg)
            _emit(dumps(report), cfg.out)
            if cfg.out:
                report_figure(timings, str(Path(cfg.out).with_suffix(".png")))
            return EXIT_OK if report["ok"] else EXIT_FAIL
        return EXIT_OK
    except InvalidInput as exc:
        sys.stdout.write(dumps({"error": "invalid input", "message": str(exc),
                                "details": exc.details}))
        return EXIT_INVALID
    except (ArityMismatch, ColorMismatch) as exc:
        sys.stdout.write(dumps({"error": "mismatch", "message": str(exc)}))
        return EXIT_MISMATCH
    except (ParseError, WordTypeError) as exc:
        sys.stdout.write(dumps({"error": "invalid input", "message": str(exc), "details": []}))
        return EXIT_INVALID
    except al.EnumerationBound as exc:
        sys.stdout.write(dumps({"error": "enumeration bound", "message": str(exc)}))
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
