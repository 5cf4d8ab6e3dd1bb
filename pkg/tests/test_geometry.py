import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from swisscheese.geometry import (
    FULL, HALF, INF, LittleDiscs, ParseError, SwissCheese, compose, compose_full,
    compose_mixed, config_from_dict, config_from_json, config_to_dict, config_to_json,
    empty_config, format_ext, format_scalar, identify_half_lower, identity_config,
    is_valid, lift_half_lower, make_config, parse_ext, parse_scalar, pi0_invariant_d1,
    project_forget_full, random_config, random_sc_sample, render_svg, sigma_act,
    validate_config,
)
from swisscheese.operad_core import ArityMismatch, ColorMismatch, check_operad_axioms


def test_identity_is_valid():
    assert validate_config(make_config(2, FULL, full=[(1, (0, 0))])) == []


def test_tangent_discs_rejected():
    cfg = make_config(2, FULL, full=[(F(1, 2), (F(1, 2), 0)), (F(1, 2), (F(-1, 2), 0))])
    assert any("tangent" in v for v in validate_config(cfg))


def test_tangent_oracle_matches_distance():
    # |c1 - c2| = r1 + r2 exactly at the boundary; shrink one radius and the violation disappears
    cfg = make_config(2, FULL, full=[(F(1, 2), (F(1, 2), 0)), (F(1, 3), (F(-1, 2), 0))])
    assert validate_config(cfg) == []


def test_unanchored_half_disc():
    cfg = make_config(2, HALF, half=[(F(1, 2), (0, F(1, 4)))])
    assert any("not anchored" in v for v in validate_config(cfg))


def test_full_disc_must_stay_above_boundary():
    cfg = make_config(2, HALF, full=[(F(1, 4), (0, F(1, 8)))])
    assert any("crosses" in v for v in validate_config(cfg))


@pytest.mark.parametrize("d,target,ncoords", [(2, FULL, 2), (1, HALF, 0), (3, HALF, 2)])
def test_identity_config(d, target, ncoords):
    cfg = identity_config(d, target)
    discs = cfg.full + cfg.half
    assert len(discs) == 1 and discs[0].r == 1
    assert discs[0].c == (F(0),) * ncoords
    assert is_valid(cfg)


def test_compose_full_affine_oracle():
    outer = make_config(1, FULL, full=[(F(1, 2), (F(1, 2),))])
    inner = make_config(1, FULL, full=[(F(1, 2), (F(-1, 2),))])
    out = compose_full(outer, [inner])
    # x -> 1/2 (1/2 x - 1/2) + 1/2 = x/4 + 1/4
    assert out.full[0].r == F(1, 4) and out.full[0].c == (F(1, 4),)


def test_compose_with_identity_outer():
    rng = random.Random(5)
    x = random_config(rng, 2, FULL, 3)
    assert compose_full(identity_config(2, FULL), [x]) == x


def test_compose_mixed_example():
    outer = make_config(1, HALF, full=[(F(1, 8), (F(1, 2),))], half=[(F(1, 4), ())])
    half_in = make_config(1, HALF, half=[(F(1, 2), ())])
    out = compose_mixed(outer, [identity_config(1, FULL)], [half_in])
    assert out.half[0].r == F(1, 8)
    assert out.full[0].r == F(1, 8) and out.full[0].c == (F(1, 2),)


def test_compose_mixed_identity_outer():
    rng = random.Random(1)
    x = random_config(rng, 2, HALF, 2, 2)
    assert compose(identity_config(2, HALF), [x]) == x


def test_compose_arity_mismatch():
    outer = random_config(random.Random(0), 2, FULL, 2)
    with pytest.raises(ArityMismatch):
        compose_full(outer, [identity_config(2, FULL)])


def test_compose_color_mismatch():
    outer = make_config(2, HALF, half=[(F(1, 2), (0,))])
    with pytest.raises(ColorMismatch):
        compose(outer, [identity_config(2, FULL)])


def test_sigma_act_identity_and_swap():
    cfg = make_config(1, FULL, full=[(F(1, 4), (F(-1, 2),)), (F(1, 4), (F(1, 2),))])
    assert sigma_act(cfg, (0, 1)) == cfg
    assert sigma_act(sigma_act(cfg, (1, 0)), (1, 0)) == cfg


def test_identify_half_lower_example():
    cfg = make_config(2, HALF, half=[(F(1, 2), (F(-1, 4),)), (F(1, 4), (F(1, 2),))])
    low = identify_half_lower(cfg)
    assert low.d == 1 and low.target == FULL
    assert [(x.r, x.c) for x in low.full] == [(F(1, 2), (F(-1, 4),)), (F(1, 4), (F(1, 2),))]
    assert lift_half_lower(low) == cfg


def test_project_forget_full():
    cfg = make_config(2, HALF, full=[(F(1, 4), (0, F(1, 2)))])
    assert project_forget_full(cfg) == empty_config(1, FULL)
    cfg = make_config(2, HALF, full=[(F(1, 4), (0, F(1, 2)))],
                      half=[(F(1, 4), (F(-1, 2),)), (F(1, 4), (F(1, 2),))])
    low = project_forget_full(cfg)
    assert [(x.r, x.c) for x in low.full] == [(F(1, 4), (F(-1, 2),)), (F(1, 4), (F(1, 2),))]


def test_project_forget_full_needs_one_full_disc():
    with pytest.raises(ValueError):
        project_forget_full(identity_config(2, HALF))


def test_pi0_orderings():
    cfg = make_config(1, FULL, full=[(F(1, 4), (F(-1, 2),)), (F(1, 4), (F(1, 2),))])
    assert pi0_invariant_d1(cfg) == (("f", 0), ("f", 1))
    assert pi0_invariant_d1(sigma_act(cfg, (1, 0))) == (("f", 1), ("f", 0))
    sc = make_config(1, HALF, full=[(F(1, 8), (F(3, 4),)), (F(1, 8), (F(1, 2),))],
                     half=[(F(1, 4), ())])
    assert pi0_invariant_d1(sc) == (("h", 0), ("f", 1), ("f", 0))


def test_scalar_parsing():
    assert parse_scalar("3/6") == F(1, 2)
    assert parse_scalar(2) == 2
    assert format_scalar(F(1)) == "1/1"
    for bad in ("1/0", "abc", "1.5", None):
        with pytest.raises(ParseError):
            parse_scalar(bad)
    assert parse_ext("inf") is INF and format_ext(INF) == "inf"


@given(st.fractions())
def test_scalar_roundtrip(x):
    assert parse_scalar(format_scalar(x)) == x


def test_json_roundtrip_and_canonical():
    rng = random.Random(2)
    for _ in range(20):
        cfg = random_config(rng, 2, HALF, rng.randint(0, 2), rng.randint(0, 2))
        text = config_to_json(cfg)
        assert config_from_json(text) == cfg
        assert config_to_json(config_from_json(text)) == text


def test_json_rejects_malformed():
    with pytest.raises(ParseError):
        config_from_dict({"d": 2})
    with pytest.raises(ParseError):
        config_from_json("{")


def test_render_identity_half_disc():
    svg = render_svg(identity_config(2, HALF))
    assert svg.count('class="half"') == 1 and 'class="boundary"' in svg


def test_render_empty_config():
    svg = render_svg(empty_config(2, FULL))
    assert 'class="boundary"' in svg and 'class="full"' not in svg and 'class="half"' not in svg


def test_render_is_deterministic():
    cfg = random_config(random.Random(9), 2, HALF, 2, 1)
    assert render_svg(cfg) == render_svg(config_from_dict(config_to_dict(cfg)))


def test_render_rejects_d3():
    with pytest.raises(ValueError):
        render_svg(identity_config(3, FULL))


# ---------------------------------------------------------------- properties

def _full_triple(d):
    def sampler(rng):
        from swisscheese.geometry import random_full_sample
        return random_full_sample(rng, d, 3)
    return sampler


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_composites_are_valid(seed, d):
    rng = random.Random(seed)
    x, ys, zss = random_sc_sample(rng, d, 3)
    z = compose(x, ys)
    assert is_valid(z)
    assert z.n == sum(y.n for y in ys) and z.m == sum(y.m for y in ys[x.n:])


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_operad_axioms_property(seed, d):
    assert check_operad_axioms(LittleDiscs(d), _full_triple(d), 5, seed).ok
    rep = check_operad_axioms(SwissCheese(d), lambda r: random_sc_sample(r, d, 3), 5, seed)
    assert rep.ok and not rep.noncomposable


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_half_only_composition_matches_lower_dimension(seed):
    rng = random.Random(seed)
    x = random_config(rng, 2, HALF, 0, rng.randint(0, 3))
    ys = [random_config(rng, 2, HALF, 0, rng.randint(0, 2)) for _ in range(x.m)]
    lhs = identify_half_lower(compose(x, ys))
    rhs = compose_full(identify_half_lower(x), [identify_half_lower(y) for y in ys])
    assert lhs == rhs
