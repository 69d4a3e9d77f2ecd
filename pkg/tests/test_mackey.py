import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import BURNSIDE, group_invariants
from realhh.algebra import dual_numbers, gaussian_like, ground_field, group_algebra_c2
from realhh.linalg import F2, ZZ, CoeffRing, FgModule, SchemaError
from realhh.mackey import (
    GradedMackeyC2,
    MackeyMap,
    SignConvention,
    box,
    box_many,
    burnside,
    burnside_green,
    change_basis,
    constant_z,
    esigma_from_json,
    esigma_to_json,
    find_isomorphism,
    fixed_point_esigma,
    free_functor,
    g_twist,
    graded_box,
    green_from_json,
    green_to_json,
    mackey_from_json,
    mackey_to_json,
    norm_e_C2,
    random_mackey,
    random_unimodular,
    regular_action,
    rotation,
    test_functors as shipped_functors,
    unitor,
    validate,
)

seeds = st.integers(0, 2**32 - 1)


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_random_functors_are_valid(seed):
    m = random_mackey(np.random.default_rng(seed))
    assert m.check() == []


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_box_of_random_functors(seed):
    rng = np.random.default_rng(seed)
    a, b = random_mackey(rng, max_blocks=1), random_mackey(rng, max_blocks=1)
    ab, ba = box(a, b), box(b, a)
    assert validate(ab) == []
    assert ab.invariants() == ba.invariants()


@given(seeds)
@settings(max_examples=15, deadline=None)
def test_threefold_box_matches_iterated(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_mackey(rng, max_blocks=1) for _ in range(3))
    t = box_many([a, b, c]).mackey
    assert validate(t) == []
    assert t.invariants() == box(box(a, b), c).invariants() == box(a, box(b, c)).invariants()
    assert box_many([], ZZ).mackey.invariants() == burnside().invariants()


@pytest.mark.parametrize("idx", range(5))
def test_free_functor_box_formula(idx):
    # for the functor represented by the free orbit: bottom M(e)^2, top M(e)
    m = shipped_functors()[idx]
    b = box(free_functor(), m)
    r, t = m.bottom.invariants()
    assert b.bottom.invariants() == (2 * r, tuple(sorted(t + t)))
    assert b.top.invariants() == (r, t)


@pytest.mark.parametrize("idx", range(5))
def test_unitor_is_an_isomorphism(idx):
    m = shipped_functors()[idx]
    u = unitor(m)
    assert u.check() == []
    assert u.is_isomorphism()


def test_find_isomorphism_after_basis_change():
    rng = np.random.default_rng(7)
    m = shipped_functors()[4]
    pb, pbi = random_unimodular(rng, ZZ, m.bottom.ngens)
    pt, pti = random_unimodular(rng, ZZ, m.top.ngens)
    m2 = change_basis(m, pb, pbi, pt, pti)
    f = find_isomorphism(m, m2)
    assert f is not None and f.is_isomorphism()


def test_non_isomorphic_functors_rejected():
    assert find_isomorphism(constant_z(), burnside()) is None


def test_axiom_violation_is_reported():
    m = constant_z()
    bad = type(m)(m.bottom, m.top, m.w, m.res, m.tr * 3, "bad")
    assert any("res∘tr" in v for v in bad.check())


def _top_vec(nd, raw_index):
    raw = nd.raw
    v = raw.ring.zeros(raw.top.ngens, 1)
    v[raw_index, 0] = 1
    return nd.raw.ring.matmul(nd.pres.to.top, v)[:, 0]


def test_norm_of_integers_has_burnside_tables():
    nd = norm_e_C2(FgModule.free(ZZ, 1), ZZ.eye(1), np.ones((1, 1, 1), dtype=object), ZZ.array([[1]])[:, 0])
    g = nd.green
    assert g.check() == []
    n1, t = _top_vec(nd, 0), _top_vec(nd, 1)
    top = nd.mackey.top
    basis = {0: n1, 1: t}
    # the symbols n(1), tr(1 ⊗ 1) form a basis of the top level
    assert top.invariants() == (2, ())
    assert abs(int(np.linalg.det(np.array(np.column_stack([n1, t]), dtype=float)))) == 1
    for (i, j), coeffs in BURNSIDE["top_mul"].items():
        expect = coeffs[0] * basis[0] + coeffs[1] * basis[1]
        assert top.equal(g.mul.t(basis[i], basis[j]).reshape(-1, 1), expect.reshape(-1, 1))
    for i, img in BURNSIDE["res"].items():
        got = ZZ.matmul(nd.mackey.res, basis[i].reshape(-1, 1))
        assert nd.mackey.bottom.equal(got, ZZ.array([img]))
    tr = ZZ.matmul(nd.mackey.tr, ZZ.eye(1))[:, 0]
    assert top.equal(tr.reshape(-1, 1), t.reshape(-1, 1))
    assert top.equal(g.unit.reshape(-1, 1), n1.reshape(-1, 1))
    assert find_isomorphism(nd.mackey, burnside_green().mackey) is not None


def test_norm_of_z_mod_2():
    r = FgModule.cyclic(ZZ, 2)
    nd = norm_e_C2(r, ZZ.eye(1), np.ones((1, 1, 1), dtype=object), ZZ.array([[1]])[:, 0])
    assert nd.mackey.bottom.invariants() == (0, (2,))
    assert nd.mackey.top.invariants() == (0, (4,))
    raw_rels = [[int(x) for x in nd.raw.top.rels[:, c]] for c in range(nd.raw.top.rels.shape[1])]
    assert group_invariants(nd.raw.top.ngens, raw_rels) == (0, (4,))
    n1, t = _top_vec(nd, 0), _top_vec(nd, 1)
    assert nd.mackey.top.equal(t.reshape(-1, 1), (2 * n1).reshape(-1, 1))
    assert nd.green.check() == []


@pytest.mark.parametrize("d", [1, 2, 3])
def test_norm_rank_counts_orbits(d):
    # top of the norm of Z^d (trivial w) is free on d norms plus d(d+1)/2 orbit sums
    nd = norm_e_C2(FgModule.free(ZZ, d), ZZ.eye(d))
    assert nd.mackey.bottom.invariants() == (d * d, ())
    assert nd.mackey.top.invariants() == (d + d * (d + 1) // 2, ())
    assert nd.mackey.check() == []


def test_norm_rank_with_swapping_w():
    w = ZZ.array([[0, 1], [1, 0]])
    nd = norm_e_C2(FgModule.free(ZZ, 2), w)
    assert nd.mackey.top.invariants() == (5, ())


@pytest.mark.parametrize("alg", [group_algebra_c2(ZZ), gaussian_like(ZZ), dual_numbers(F2), group_algebra_c2(CoeffRing(3))])
def test_norm_green_functors_valid(alg):
    nd = norm_e_C2(alg.module(), alg.w, alg.mul, alg.unit)
    assert nd.green.check() == []


def test_g_twist_is_an_involution():
    a = gaussian_like(ZZ)
    g = norm_e_C2(a.module(), a.w, a.mul, a.unit).green
    act = regular_action(g)
    once = g_twist(g, act)
    assert not np.array_equal(once.bottom, act.bottom)
    twice = g_twist(g, once)
    assert np.array_equal(np.asarray(twice.bottom, dtype=object), np.asarray(act.bottom, dtype=object))


@pytest.mark.parametrize("alg", [ground_field(F2), dual_numbers(F2), dual_numbers(F2, 1), group_algebra_c2(F2), gaussian_like(ZZ), group_algebra_c2(ZZ)])
def test_fixed_point_esigma_rings_valid(alg):
    e = fixed_point_esigma(alg)
    assert e.check() == []


def test_burnside_green_valid():
    assert burnside_green().check() == []


def test_json_round_trips():
    g = burnside_green()
    g2 = green_from_json(json.loads(json.dumps(green_to_json(g))))
    assert g2.check() == [] and np.array_equal(g2.mul.top, g.mul.top)
    m = shipped_functors()[4]
    m2 = mackey_from_json(json.loads(json.dumps(mackey_to_json(m))))
    assert MackeyMap.identity(m).check() == [] and m2.invariants() == m.invariants()
    e = fixed_point_esigma(dual_numbers(F2))
    e2 = esigma_from_json(json.loads(json.dumps(esigma_to_json(e))))
    assert e2.check() == []


def test_json_schema_errors():
    with pytest.raises(SchemaError) as err:
        mackey_from_json({"bottom": {"ring": "Z", "gens": 1, "rels": []}}, "$")
    assert "$.top" in str(err.value)
    obj = mackey_to_json(constant_z())
    obj["res"] = [[1, 2]]
    with pytest.raises(SchemaError) as err:
        mackey_from_json(obj)
    assert "res" in str(err.value)


def test_sign_conventions():
    k = SignConvention("koszul")
    assert k(1, 1) == -1 and k(2, 1) == 1
    assert SignConvention("none")(1, 1) == 1
    assert k.problems([0, 1, 2]) == []
    bad = SignConvention.from_json({"pairs": [[1, 2, -1]], "default": 1})
    assert bad.problems([1, 2])
    with pytest.raises(SchemaError):
        SignConvention.from_json({"pairs": [[1, 2, 3]]})


def test_graded_rotation_squares_to_identity():
    a = fixed_point_esigma(dual_numbers(F2, 1)).m
    ga = GradedMackeyC2(a, SignConvention("koszul"))
    r1 = rotation(ga, ga)
    assert r1.check() == [] and r1.is_isomorphism()
    assert (r1 @ r1).equals(MackeyMap.identity(r1.source))
    assert graded_box(ga, ga).mackey.check() == []
    pieces = ga.pieces()
    assert set(pieces) == {0, 1}
