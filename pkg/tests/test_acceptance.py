"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest -s tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``.
"""
import itertools
import random
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from swisscheese import algebra_lab as al
from swisscheese.cli import cmd_compose, cmd_render
from swisscheese.geometry import (
    FULL, HALF, LittleDiscs, compose, compose_full, config_to_json, dumps,
    identify_half_lower, is_valid, random_config, random_full_sample, random_sc_sample,
)
from swisscheese.operad_core import check_operad_axioms
from swisscheese.schinf import chain_from_le, word_concat, word_normalize
from swisscheese.trees import (
    collapse_lengths, compose_le, e_compose, ed_arity_sampler, ed_label_sampler,
    normalize_le, normalize_w, random_e_element, random_level_sequence, random_wtree,
    single_vertex, tree_input_colors, tree_to_dict,
)

GOLDEN = Path(__file__).parent / "golden"
LINES: list = []  # shown in the terminal summary by conftest.py


def report(number: int, title: str, ok: bool, seconds: float, limit: float | None, detail=""):
    within = limit is None or seconds < limit
    status = "PASS" if ok and within else "FAIL"
    bound = f" (limit {limit:g}s)" if limit else ""
    line = f"[{status}] criterion {number}: {title} in {seconds:.2f}s{bound} {detail}".rstrip()
    LINES.append(line)
    print(line)
    return ok and within


def timed(fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    return ok, detail, time.perf_counter() - t0


# ---------------------------------------------------------------- 1

def criterion_1():
    bad = []
    for d in (1, 2, 3):
        rep = check_operad_axioms(LittleDiscs(d), lambda r, d=d: random_full_sample(r, d, 3),
                                  1000, seed=d)
        if not rep.ok or rep.checked != 1000:
            bad.append((d, rep.failures[:3], rep.noncomposable[:3]))
    return not bad, f"3000 cases, failures {bad}" if bad else "3000 cases"


def test_criterion_1_ed_axioms():
    ok, detail, s = timed(criterion_1)
    assert report(1, "E_d axioms for d=1,2,3", ok, s, 10, detail)


# ---------------------------------------------------------------- 2

def criterion_2():
    rng = random.Random(2)
    bad = []
    for case in range(500):
        d = 1 + case % 3
        x, ys, _ = random_sc_sample(rng, d, 3)
        z = compose(x, ys)
        if not is_valid(z):
            bad.append((case, "invalid"))
        if z.n != sum(y.n for y in ys) or z.m != sum(y.m for y in ys[x.n:]):
            bad.append((case, "counts"))
        if d >= 2:
            # half-only part: identify with E_{d-1}
            h = random_config(rng, d, HALF, 0, rng.randint(0, 3))
            hs = [random_config(rng, d, HALF, 0, rng.randint(0, 2)) for _ in range(h.m)]
            lhs = identify_half_lower(compose(h, hs))
            rhs = compose_full(identify_half_lower(h), [identify_half_lower(y) for y in hs])
            if lhs != rhs:
                bad.append((case, "intertwining"))
    return not bad, f"500 cases, failures {bad[:5]}" if bad else "500 cases"


def test_criterion_2_swiss_cheese():
    ok, detail, s = timed(criterion_2)
    assert report(2, "swiss cheese mixed composition", ok, s, 10, detail)


# ---------------------------------------------------------------- 3

def criterion_3():
    ed = LittleDiscs(2)
    label = ed_label_sampler(2, 2)
    arity = ed_arity_sampler(2)
    bad = []
    for i in range(500):
        t = random_wtree(random.Random(10_000 + i), ed, label, depth=3)
        a = normalize_w(ed, t, random.Random(2 * i))
        b = normalize_w(ed, t, random.Random(2 * i + 1))
        if a != b or normalize_w(ed, a) != a:
            bad.append(("W", i))
        rng = random.Random(20_000 + i)
        s = random_level_sequence(rng, ed, arity, n_out=rng.randint(1, 2))
        a = normalize_le(ed, s, random.Random(2 * i))
        b = normalize_le(ed, s, random.Random(2 * i + 1))
        if a != b or normalize_le(ed, a) != a:
            bad.append(("LE", i))
    return not bad, f"500 W-trees + 500 sequences, failures {bad[:5]}" if bad else \
        "500 W-trees + 500 sequences"


def test_criterion_3_confluence():
    ok, detail, s = timed(criterion_3)
    assert report(3, "rewrite confluence", ok, s, 30, detail)


# ---------------------------------------------------------------- 4

def criterion_4():
    ed = LittleDiscs(2)
    arity = ed_arity_sampler(2)
    bad = []
    for i in range(200):
        rng = random.Random(30_000 + i)
        s = random_level_sequence(rng, ed, arity, n_out=rng.randint(1, 2))
        related = normalize_le(ed, s, rng)
        if word_normalize(ed, chain_from_le(s), rng) != word_normalize(ed, chain_from_le(related)):
            bad.append(("relation", i))
        while True:
            s2 = random_level_sequence(rng, ed, arity, n_out=rng.randint(1, 2))
            s1 = random_level_sequence(rng, ed, arity, n_out=1)
            if s1.n_in == s2.n_out:
                break
        c = compose_le(ed, s1, s2)
        if (word_normalize(ed, chain_from_le(c))
                != word_normalize(ed, word_concat(chain_from_le(s1), chain_from_le(s2)))):
            bad.append(("splice", i))
    return not bad, f"200 relations + 200 splices, failures {bad[:5]}" if bad else \
        "200 relations + 200 splices"


def test_criterion_4_chains_well_defined():
    ok, detail, s = timed(criterion_4)
    assert report(4, "chains of level sequences well defined", ok, s, 10, detail)


# ---------------------------------------------------------------- 5

def criterion_5():
    ed = LittleDiscs(2)
    arity = ed_arity_sampler(2)
    rng = random.Random(5)
    bad = []
    for i in range(200):
        a = random_e_element(rng, ed, arity)
        bs = [random_e_element(rng, ed, arity) for _ in tree_input_colors(a)]
        lhs = collapse_lengths(ed, e_compose(ed, a, bs))
        rhs = compose_full(collapse_lengths(ed, a), [collapse_lengths(ed, b) for b in bs])
        if lhs != rhs:
            bad.append(i)
    return not bad, f"200 composites, failures {bad[:5]}" if bad else "200 composites"


def test_criterion_5_collapse_morphism():
    ok, detail, s = timed(criterion_5)
    assert report(5, "collapse_lengths is a morphism", ok, s, None, detail)


# ---------------------------------------------------------------- 6

def criterion_6():
    p = 2
    bad, pairs = [], 0
    for k in range(3):
        for B in al.enumerate_algebras(p, k):
            for da in range(3):
                for u in itertools.product(range(p), repeat=da):
                    bij = al.sc1_bijection(B, da, u, 4)
                    pairs += 1
                    # the count on the map side is an independent enumeration
                    maps = len(al.module_map_bijection(B, da).right)
                    if not bij.ok or len(bij.left) != maps:
                        bad.append((k, da, u))
    nat = al.naturality_check(al.product_algebra(p), al.field_algebra(p),
                              np.array([[1], [0]]), 2, [1, 0], 4)
    ok = not bad and nat
    return ok, f"{pairs} (B, A, u) cases, naturality {nat}" + (f", failures {bad[:5]}" if bad else "")


def test_criterion_6_d1_universal_property():
    ok, detail, s = timed(criterion_6)
    assert report(6, "d=1 universal property", ok, s, 60, detail)


# ---------------------------------------------------------------- 7

def criterion_7():
    bad, count = [], 0
    for p in (2, 3):
        for da in range(4):
            for u in itertools.product(range(p), repeat=da):
                res = al.hochschild_d1(al.e0_oalgebra(p, da, list(u)))
                count += 1
                if res.dim != da * da or not res.p_class_to_identity:
                    bad.append((p, da, u, res.dim))
    return not bad, f"{count} algebras" + (f", failures {bad[:5]}" if bad else "")


def test_criterion_7_hochschild():
    ok, detail, s = timed(criterion_7)
    assert report(7, "Hochschild object is hom(A, A)", ok, s, None, detail)


# ---------------------------------------------------------------- 8

def criterion_8():
    p, bad, count = 2, [], 0
    for k in (1, 2):
        for B in al.enumerate_algebras(p, k):
            F_ = al.free_oa_module(al.assoc_oalgebra(B), 4)
            count += 1
            if al.monad_law_failures(F_) or F_.dim != al.free_assoc_dim_closed_form(k, 1):
                bad.append(("monad", k))
    for da in range(3):
        for u in itertools.product(range(p), repeat=da):
            for dm in range(3):
                n_data, n_maps, ok = al.mod_sc_leq1_count(al.e0_oalgebra(p, da, u), dm, 4)
                count += 1
                if not ok or n_data != n_maps or n_maps != p ** (da * dm):
                    bad.append(("mod_sc", da, u, dm))
    return not bad, f"{count} checks" + (f", failures {bad[:5]}" if bad else "")


def test_criterion_8_free_module_monad():
    ok, detail, s = timed(criterion_8)
    assert report(8, "free O-A module monad and degree <= 1 count", ok, s, None, detail)


# ---------------------------------------------------------------- 9

def golden_inputs(directory: Path, seed: int = 9) -> dict:
    rng = random.Random(seed)
    x = random_config(rng, 2, HALF, 2, 1)
    files = {
        "x.json": config_to_json(x),
        "f0.json": config_to_json(random_config(rng, 2, FULL, 1)),
        "f1.json": config_to_json(random_config(rng, 2, FULL, 0)),
        "h0.json": config_to_json(random_config(rng, 2, HALF, 1, 1)),
        "tree.json": dumps(tree_to_dict(single_vertex(LittleDiscs(2),
                                                      random_config(rng, 2, FULL, 3)))),
    }
    paths = {}
    for name, text in files.items():
        (directory / name).write_text(text)
        paths[name] = str(directory / name)
    return paths


def golden_outputs(paths: dict) -> dict:
    return {
        "compose.json": dumps(cmd_compose([paths["x.json"], paths["f0.json"], paths["f1.json"],
                                           paths["h0.json"]], "mixed")),
        "render_x.svg": cmd_render(paths["x.json"]),
        "render_tree.svg": cmd_render(paths["tree.json"]),
    }


def criterion_9(tmp: Path):
    runs = []
    for r in range(2):
        d = tmp / f"run{r}"
        d.mkdir()
        runs.append(golden_outputs(golden_inputs(d)))
    stable = runs[0] == runs[1]
    stored = {name: (GOLDEN / name).read_text() for name in runs[0] if (GOLDEN / name).exists()}
    matches = stored == runs[0]
    return stable and matches, f"{len(runs[0])} outputs, two runs equal {stable}, golden files equal {matches}"


def test_criterion_9_determinism(tmp_path):
    ok, detail, s = timed(lambda: criterion_9(tmp_path))
    assert report(9, "compose/render byte stable", ok, s, None, detail)


if __name__ == "__main__":
    import tempfile
    if sys.argv[1:] == ["--write-golden"]:
        GOLDEN.mkdir(exist_ok=True)
        with tempfile.TemporaryDirectory() as tmp:
            for name, text in golden_outputs(golden_inputs(Path(tmp))).items():
                (GOLDEN / name).write_text(text)
        sys.exit(0)
    sys.exit(pytest.main([__file__, "-q", "-s"]))
