import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from swisscheese.geometry import FULL, INF, LittleDiscs, SwissCheese, random_config
from swisscheese.operad_core import (
    ArityMismatch, MultiHom, UnitOperad, check_operad_axioms, multihom_compose,
)
from swisscheese.schinf import (
    IOTA, P, FormalWord, NotEvaluable, SCh1Element, SDElement, SemidirectOperad,
    WordTypeError, act, apply_end, assemble, chain_from_le, clamp, compose_schinf,
    embed_leq1, end_arity, end_compose, end_identity, eval_word, evaluate_end, f_count,
    from_composition_order, h, iota, random_sch1, random_schinf, random_word, rho_e,
    rho_unit, sch1_to_lower, schinf_from_dict, schinf_identity, schinf_to_dict,
    to_composition_order, word, word_concat, word_from_dict, word_normalize, word_to_dict,
)
from swisscheese.trees import (
    Leaf, WOperad, compose_le, e_compose, e_from_le, e_operad, ed_arity_sampler, graft,
    make_level_sequence, normalize_le, normalize_w, random_e_element, random_level_sequence,
    tree_input_colors,
)

D = 2
SC = SwissCheese(D)
ED = LittleDiscs(D)
SAMP = ed_arity_sampler(D)


def _hom(seed, n_in):
    """A single-output level with n_in inputs."""
    return MultiHom(n_in, (0,) * n_in, (random_config(random.Random(seed), D, FULL, n_in),))


# ---------------------------------------------------------------- SC^{h,inf}

def test_identity_and_generators():
    one = schinf_identity()
    assert one.degree == 0 and one.m == 1
    rng = random.Random(0)
    g = random_sch1(rng, D, 1)
    assert embed_leq1(g).degree == 1
    assert embed_leq1(SCh1Element(0, Leaf("h", 0))) == one


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_iota_is_a_morphism(seed):
    rng = random.Random(seed)
    x = random_schinf(rng, D)
    assert assemble(x.pieces()) == x.tree and iota(SC, x) == x.tree
    assert x.degree == f_count(iota(SC, x))
    ys = [random_schinf(rng, D) for _ in range(x.m)]
    z = compose_schinf(SC, x, ys)
    assert z.degree == x.degree + sum(y.degree for y in ys)
    grafted = graft(SC, iota(SC, x), [Leaf("f", 0)] * x.n + [iota(SC, y) for y in ys])
    assert iota(SC, z) == normalize_w(SC, grafted)


def test_unit_law():
    rng = random.Random(2)
    for _ in range(30):
        x = random_schinf(rng, D)
        assert compose_schinf(SC, schinf_identity(), [x]) == x
        assert compose_schinf(SC, x, [schinf_identity()] * x.m) == x


def test_degree_one_composites_stay_free():
    rng = random.Random(3)
    done = 0
    while done < 20:
        x = random_schinf(rng, D, max_degree=1)
        if x.degree != 1 or x.m == 0:
            continue
        y = random_schinf(rng, D, max_degree=1)
        while y.degree != 1:
            y = random_schinf(rng, D, max_degree=1)
        ys = [schinf_identity()] * x.m
        ys[0] = y
        z = compose_schinf(SC, x, ys)
        assert z.degree == 2 and len(z.pieces().kids) >= 1
        done += 1


def test_degree_zero_matches_lower_w():
    rng = random.Random(1)
    lower = WOperad(LittleDiscs(D - 1))
    for _ in range(100):
        x = random_sch1(rng, D, 0)
        ys = [random_sch1(rng, D, 0) for _ in range(x.arity)]
        z = compose_schinf(SC, embed_leq1(x), [embed_leq1(y) for y in ys])
        expect = lower.compose(sch1_to_lower(x), [sch1_to_lower(y) for y in ys])
        assert sch1_to_lower(SCh1Element(0, z.tree)) == expect


def test_compose_arity_mismatch():
    with pytest.raises(ArityMismatch):
        compose_schinf(SC, schinf_identity(), [])


def test_schinf_json_roundtrip():
    rng = random.Random(7)
    for _ in range(20):
        x = random_schinf(rng, D)
        assert schinf_from_dict(SC, schinf_to_dict(x)) == x


# ---------------------------------------------------------------- words

def test_word_example():
    alpha, beta = _hom(1, 2), MultiHom(2, (0, 1), (random_config(random.Random(2), D, FULL, 1),
                                                    random_config(random.Random(3), D, FULL, 1)))
    w = word(("S", 1), IOTA, P, IOTA, act(alpha), h(F(0)), act(beta), P)
    expect = word(("S", 1), IOTA, act(multihom_compose(ED, alpha, beta)), P)
    assert word_normalize(ED, w) == word_normalize(ED, expect)
    assert len(word_normalize(ED, w).tokens) == 3


def test_defining_relations():
    assert word_normalize(ED, word(("W", 2), h(INF))).tokens == (P, IOTA)
    assert word_normalize(ED, word(("S", 2), IOTA, P)).tokens == ()
    assert word_normalize(ED, word(("W", 2), h(F(0)))).tokens == ()
    # read right to left, the same relations are h_inf = iota p and p iota = id
    assert to_composition_order(word_normalize(ED, word(("W", 1), h(INF)))) == (IOTA, P)
    assert word_normalize(ED, from_composition_order(("S", 1), (P, IOTA))).tokens == ()


def test_finite_time_is_opaque():
    w = word(("W", 1), h(F(1, 2)))
    assert word_normalize(ED, w) == w


def test_word_typing():
    with pytest.raises(WordTypeError):
        word(("S", 1), P)
    with pytest.raises(WordTypeError):
        word(("W", 1), act(_hom(1, 2)), act(_hom(1, 2)))
    with pytest.raises(WordTypeError):
        word_concat(word(("S", 1), IOTA), word(("S", 1), IOTA))


def test_chain_base_case():
    alpha = _hom(4, 3)
    s = make_level_sequence([alpha], [])
    assert chain_from_le(s).tokens == (IOTA, act(alpha), P)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_related_sequences_give_equal_words(seed):
    rng = random.Random(seed)
    s = random_level_sequence(rng, ED, SAMP, n_out=rng.randint(1, 2))
    a = word_normalize(ED, chain_from_le(s), rng)
    assert a == word_normalize(ED, chain_from_le(normalize_le(ED, s)))
    assert word_normalize(ED, a) == a


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_chains_splice(seed):
    rng = random.Random(seed)
    s2 = random_level_sequence(rng, ED, SAMP, n_out=rng.randint(1, 2))
    s1 = random_level_sequence(rng, ED, SAMP, n_out=1)
    while s1.n_in != s2.n_out:
        s1 = random_level_sequence(rng, ED, SAMP, n_out=1)
    c = compose_le(ED, s1, s2)
    assert (word_normalize(ED, chain_from_le(c))
            == word_normalize(ED, word_concat(chain_from_le(s1), chain_from_le(s2))))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_word_normalize_confluent_and_sound(seed):
    rng = random.Random(seed)
    x = random_schinf(rng, D, max_degree=3, grafts=4)
    w = random_word(rng, D, ("S", x.degree), length=rng.randint(0, 9))
    a = word_normalize(ED, w, random.Random(seed + 1))
    assert a == word_normalize(ED, w, random.Random(seed + 2)) == word_normalize(ED, w)
    try:
        v = eval_word(SC, w, x)
    except NotEvaluable:
        return
    assert eval_word(SC, a, x) == v


def test_p_outside_image_not_evaluable():
    rng = random.Random(5)
    x = random_schinf(rng, D, max_degree=2)
    while x.degree < 1:
        x = random_schinf(rng, D, max_degree=2)
    w = word(("S", x.degree), IOTA, h(F(1, 2)), P)
    with pytest.raises(NotEvaluable):
        eval_word(SC, w, x)


def test_clamp_endpoints():
    rng = random.Random(8)
    for _ in range(30):
        s = random_level_sequence(rng, ED, SAMP, n_out=1)
        w = chain_from_le(s)
        assert clamp(w, INF) == w
        no_h = FormalWord(w.dom, tuple(t for t in w.tokens if t[0] != "h"))
        assert word_normalize(ED, clamp(w, F(0))) == word_normalize(ED, no_h)


def test_word_json_roundtrip():
    rng = random.Random(9)
    for _ in range(20):
        s = random_level_sequence(rng, ED, SAMP, n_out=2)
        w = chain_from_le(s)
        assert word_from_dict(word_to_dict(w)) == w


# ---------------------------------------------------------------- End and semidirect

def _small_e(rng):
    lengths = (F(0), INF)
    t = e_from_le(ED, random_level_sequence(rng, ED, SAMP, max_levels=3, max_width=1,
                                            lengths=lengths))
    if rng.random() < 0.5 and len(tree_input_colors(t)) == 1:
        g = e_from_le(ED, random_level_sequence(rng, ED, SAMP, max_levels=3, max_width=1,
                                                lengths=lengths))
        t = e_compose(ED, t, [g])
    return t


def _degree_one(rng):
    while True:
        x = random_schinf(rng, D, max_degree=1)
        if x.degree == 1:
            return x


def test_end_units_and_evaluation():
    rng = random.Random(3)
    for _ in range(60):
        f = rho_e(ED, _small_e(rng))
        gs = [rho_e(ED, _small_e(rng)) for _ in range(end_arity(f))]
        assert end_compose(ED, f, [end_identity()] * end_arity(f)) == f
        assert end_compose(ED, end_identity(), [f]) == f
        x = _degree_one(rng)
        assert evaluate_end(SC, end_compose(ED, f, gs), x) == apply_end(SC, evaluate_end(SC, f, x), gs)


def test_rho_matches_e_composition():
    rng = random.Random(4)
    for _ in range(60):
        a = random_e_element(rng, ED, SAMP)
        bs = [random_e_element(rng, ED, SAMP) for _ in tree_input_colors(a)]
        assert rho_e(ED, e_compose(ED, a, bs)) == end_compose(ED, rho_e(ED, a), [rho_e(ED, b) for b in bs])


def test_semidirect_with_e():
    SD = SemidirectOperad(D, e_operad(ED), lambda o: rho_e(ED, o))

    def elem(rng, color):
        if color == "f":
            return SDElement("f", _small_e(rng))
        return SDElement("h", random_schinf(rng, D, max_degree=2, grafts=2))

    def sampler(rng):
        x = elem(rng, "h" if rng.random() < 0.8 else "f")
        ys = [elem(rng, c) for c in SD.input_colors(x)]
        zss = [[elem(rng, c) for c in SD.input_colors(y)] for y in ys]
        return x, ys, zss

    rep = check_operad_axioms(SD, sampler, 60, seed=1)
    assert rep.ok, rep.failures[:3]


def test_semidirect_with_unit_reduces_to_schinf():
    U = SemidirectOperad(D, UnitOperad(), rho_unit)
    rng = random.Random(6)
    for _ in range(30):
        x = random_schinf(rng, D, grafts=2)
        ys = [random_schinf(rng, D, grafts=1) for _ in range(x.m)]
        got = U.compose(SDElement("h", x),
                        [SDElement("f", UnitOperad.POINT)] * x.n + [SDElement("h", y) for y in ys])
        assert got == SDElement("h", compose_schinf(SC, x, ys))
    assert U.compose(SDElement("f", "1"), [SDElement("f", "1")]) == SDElement("f", "1")
