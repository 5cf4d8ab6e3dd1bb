import itertools
import json
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swisscheese import algebra_lab as al
from swisscheese.geometry import FULL, HALF, compose, random_config


# ---------------------------------------------------------------- scalars and linear algebra

def test_field_scalar():
    a = al.FieldScalar(5, 3)
    assert a.value == 2
    assert int(a * a) == 1 and int(a + 1) == 0 and int(-a) == 1
    assert int(a.inverse() * a) == 1
    with pytest.raises(ZeroDivisionError):
        al.FieldScalar(0, 5).inverse()
    with pytest.raises(ValueError):
        al.FieldScalar(1, 4)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(0, 10**6))
def test_nullspace_and_inverse(p, seed):
    rng = np.random.default_rng(seed)
    M = rng.integers(0, p, size=(3, 4))
    N = al.nullspace_mod(M, p, 4)
    assert len(N) == 4 - al.rank_mod(M, p)
    if len(N):
        assert not ((M @ N.T) % p).any()
    S = rng.integers(0, p, size=(3, 3))
    if al.rank_mod(S, p) == 3:
        assert np.array_equal((S @ al.inv_mod(S, p)) % p, np.eye(3, dtype=np.int64))


def test_quotient():
    q = al.quotient(2, 3, [np.array([1, 1, 0])])
    assert q.dim == 2
    assert np.array_equal(q.proj[0], q.proj[1])


# ---------------------------------------------------------------- algebras

def _count_algebras_plain(p, n):
    """Independent count with Python integers only."""
    total = 0
    for flat in itertools.product(range(p), repeat=n ** 3):
        c = lambda i, j, k: flat[(i * n + j) * n + k]

        def mul(x, y):
            return tuple(sum(x[i] * y[j] * c(i, j, k) for i in range(n) for j in range(n)) % p
                         for k in range(n))
        basis = [tuple(int(i == t) for i in range(n)) for t in range(n)]
        assoc = all(mul(mul(a, b), e) == mul(a, mul(b, e))
                    for a in basis for b in basis for e in basis)
        if not assoc:
            continue
        for u in itertools.product(range(p), repeat=n):
            if all(mul(u, b) == b and mul(b, u) == b for b in basis):
                total += 1
                break
    return total


def test_algebra_enumeration_matches_plain_count():
    assert len(al.enumerate_algebras(2, 1)) == _count_algebras_plain(2, 1) == 1
    assert len(al.enumerate_algebras(2, 2)) == _count_algebras_plain(2, 2)
    assert len(al.enumerate_algebras(2, 0)) == 1


def test_end_algebra():
    assert al.end_algebra(2, 1) == al.field_algebra(2)
    E = al.end_algebra(2, 2)
    assert E.dim == 4 and 2 ** E.dim == 16
    # the product agrees with matrix multiplication on all 16 x 16 pairs
    for x in itertools.product(range(2), repeat=4):
        for y in itertools.product(range(2), repeat=4):
            X, Y = np.array(x).reshape(2, 2), np.array(y).reshape(2, 2)
            assert np.array_equal(E.product(np.array(x), np.array(y)), ((X @ Y) % 2).reshape(4))


def test_make_algebra_rejects_nonassociative():
    mul = np.zeros((2, 2, 2), dtype=np.int64)
    mul[0, 0, 1] = 1
    with pytest.raises(ValueError):
        al.make_algebra(2, mul, [1, 0])


def test_algebra_json_roundtrip():
    for B in al.enumerate_algebras(3, 2, limit=1 << 20)[:10]:
        assert al.algebra_from_dict(json.loads(json.dumps(al.algebra_to_dict(B)))) == B


@pytest.mark.parametrize("make,expect", [
    (al.field_algebra, 1), (al.dual_numbers, 1), (al.product_algebra, 2)])
def test_module_map_bijection_examples(make, expect):
    bij = al.module_map_bijection(make(2), 1)
    assert len(bij.left) == len(bij.right) == expect and bij.ok


def test_module_map_bijection_exhaustive():
    for n in (1, 2):
        for B in al.enumerate_algebras(2, n):
            for da in (0, 1, 2):
                assert al.module_map_bijection(B, da).ok


def test_make_module():
    B = al.field_algebra(2)
    assert al.make_module(B, [[[1]]]).dim_a == 1
    with pytest.raises(ValueError):
        al.make_module(B, [[[0]]])


# ---------------------------------------------------------------- word operads

@pytest.mark.parametrize("make", [al.assoc_operad, al.e0_operad, al.pi0_sc1, al.semidirect_unit_d1])
def test_discrete_operad_axioms(make):
    assert al.check_discrete_operad(make(), 4) == []


def test_orbit_representatives():
    op = al.pi0_sc1()
    for x in al.all_components(op, 4):
        rep, sigma = op.canon(x)
        assert op.act(rep, sigma) == x
    assert len(op.components("h", 3, 1)) == 6 and len(op.reps("h", 3, 1)) == 1


def test_words_match_configurations():
    op = al.pi0_sc1()
    rng = random.Random(0)
    for _ in range(200):
        x = random_config(rng, 1, HALF, rng.randint(0, 2), 1)
        ys = [random_config(rng, 1, FULL, rng.randint(0, 2)) for _ in range(x.n)]
        ys += [random_config(rng, 1, HALF, rng.randint(0, 2), rng.randint(0, 1)) for _ in range(x.m)]
        got = op.compose(al.word_of_config(x), [al.word_of_config(y) for y in ys])
        assert got == al.word_of_config(compose(x, ys))


def test_table_roundtrip():
    op = al.pi0_sc1()
    data = json.loads(json.dumps(al.discrete_operad_to_dict(op, 3)))
    assert set(data) >= {"arity_components", "composition"}
    table = al.discrete_operad_from_dict(data)
    for x in al.all_components(op, 3):
        for i, c in enumerate(op.input_colors(x)):
            for y in al.all_components(op, 3):
                if y.color == c and op.arity(x) + op.arity(y) - 1 <= 3:
                    z = op.partial_compose(x, i, y)
                    assert table.partial_compose(al.word_name(x), i, al.word_name(y)) == al.word_name(z)
    with pytest.raises(ValueError):
        al.discrete_operad_from_dict({"max_arity": 1, "arity_components": {}, "composition": [["x", 0, "y", "z"]]})


# ---------------------------------------------------------------- actions

def _regular_pair(B, u):
    rho = B.mul.copy()  # B acting on itself from the right
    return al.PairAlgebra(B.p, B.dim, B.dim, B.mul, B.unit, np.array(u), rho)


def test_action_diagrams_pass_for_module():
    B = al.dual_numbers(2)
    assert al.check_action_diagrams(al.pi0_sc1(), _regular_pair(B, [1, 0])) == []


def test_action_diagrams_detect_mutation():
    B = al.dual_numbers(2)
    alg = _regular_pair(B, [1, 0])
    alg.rho = alg.rho.copy()
    alg.rho[1, 1, 0] ^= 1
    alg._cache.clear()
    assert al.check_action_diagrams(al.pi0_sc1(), alg)


def test_action_on_zero_space():
    B = al.product_algebra(2)
    alg = al.PairAlgebra(2, 2, 0, B.mul, B.unit, np.zeros(0, dtype=np.int64),
                         np.zeros((0, 2, 0), dtype=np.int64))
    assert al.check_action_diagrams(al.pi0_sc1(), alg) == []


def test_sc1_bijection_and_naturality():
    for B in al.enumerate_algebras(2, 2):
        for u in itertools.product(range(2), repeat=1):
            bij = al.sc1_bijection(B, 1, u)
            assert bij.ok
            assert len(bij.left) == len(al.module_map_bijection(B, 1).left)
    g = np.array([[1], [0]])
    assert al.naturality_check(al.product_algebra(2), al.field_algebra(2), g, 2, [1, 0])
    with pytest.raises(ValueError):
        al.naturality_check(al.product_algebra(2), al.field_algebra(2), np.array([[1], [1]]), 1, [1])


def test_enumeration_bound():
    with pytest.raises(al.EnumerationBound):
        al.module_map_bijection(al.end_algebra(2, 2), 2, limit=1 << 8)


# ---------------------------------------------------------------- O-A modules

def test_free_module_over_unit_operad_is_identity():
    F = al.free_oa_module(al.unit_oalgebra(2, 2), 3)
    assert F.dim == 1 and al.monad_law_failures(F) == []


def test_free_assoc_module():
    for n in (1, 2):
        for B in al.enumerate_algebras(2, n):
            alg = al.assoc_oalgebra(B)
            F = al.free_oa_module(alg, 4)
            assert al.monad_law_failures(F) == []
            assert F.dim == al.free_assoc_dim_closed_form(B.dim, 1)
            # universal property: module maps F(k) -> A match linear maps k -> A
            N = al.regular_module(alg)
            assert len(al.hom_oa(F.module(1), N, 3)) == N.dim
    B = al.field_algebra(3)
    assert al.free_oa_module(al.assoc_oalgebra(B), 4).dim == 1


def test_module_axioms():
    B = al.dual_numbers(2)
    alg = al.assoc_oalgebra(B)
    assert al.module_axiom_failures(al.regular_module(alg), 3) == []
    F = al.free_oa_module(alg, 4)
    assert al.module_axiom_failures(F.module(1), 3) == []


def test_hom_oa_matches_brute_force():
    for B in (al.dual_numbers(2), al.product_algebra(2), al.field_algebra(3)):
        M = al.regular_module(al.assoc_oalgebra(B))
        basis = al.hom_oa(M, M, 3)
        assert B.p ** len(basis) == al.hom_oa_brute_force(M, M, 3)


def test_hochschild_small():
    for p in (2, 3):
        for da, u in ((0, []), (1, [1]), (2, [1, 0]), (2, [0, 0])):
            res = al.hochschild_d1(al.e0_oalgebra(p, da, u))
            assert res.dim == da * da and res.p_class_to_identity


def test_a_sc_is_natural():
    p = 2
    src = al.a_sc_discrete(al.e0_oalgebra(p, 2, [1, 0]))
    tgt = al.a_sc_discrete(al.e0_oalgebra(p, 1, [1]))
    g = np.array([[1], [0]])  # sends u to u
    induced = al.a_sc_functor(src, tgt, g)
    # p_A is natural: p o A^{sc}(g) = g o p
    assert np.array_equal((induced @ tgt.p_matrix) % p, (src.p_matrix @ g) % p)


def test_mod_sc_count():
    for p in (2, 3):
        alg = al.e0_oalgebra(p, 1, [1])
        n_data, n_maps, ok = al.mod_sc_leq1_count(alg, 1)
        assert n_data == n_maps == p and ok
    n_data, n_maps, ok = al.mod_sc_leq1_count(al.e0_oalgebra(2, 2, [0, 1]), 2)
    assert n_data == n_maps == 16 and ok


# ---------------------------------------------------------------- universal cheese

def test_universal_cheese_assoc():
    r = al.universal_cheese_discrete("assoc", al.product_algebra(2), 2, [1, 0], 2, 4,
                                     target=al.field_algebra(2), g=[[1], [0]])
    assert r["bijection"] and r["naturality"] and r["actions"] == r["maps"] == 8


def test_universal_cheese_unit_operad():
    r = al.universal_cheese_discrete("unit", 1, 2, [1, 0], 2, 4)
    # all linear maps F_2 -> hom(A, A)
    assert r["bijection"] and r["actions"] == r["maps"] == 2 ** 4
    with pytest.raises(ValueError):
        al.universal_cheese_discrete("lie", 1, 1, [1])
