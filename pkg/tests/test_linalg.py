import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import fp_rank, group_invariants
from realhh.linalg import (
    F2,
    ZZ,
    ChainComplex,
    CoeffRing,
    FgModule,
    ModuleMap,
    SchemaError,
    direct_sum,
    kernel,
    module_from_json,
    module_to_json,
    presented_quotient,
    rank,
    smith_normal_form,
    solve,
    tensor,
)

small_int = st.integers(-4, 4)


def int_matrix(rows, cols):
    return st.lists(st.lists(small_int, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


@st.composite
def relation_sets(draw):
    g = draw(st.integers(0, 4))
    r = draw(st.integers(0, 4))
    return g, draw(int_matrix(r, g))


@given(relation_sets())
@settings(max_examples=150, deadline=None)
def test_invariants_match_determinantal_divisors(data):
    g, rels = data
    m = presented_quotient(ZZ, g, rels)
    assert m.invariants() == group_invariants(g, rels)


@given(relation_sets())
@settings(max_examples=100, deadline=None)
def test_simplify_is_inverse_pair(data):
    g, rels = data
    m = presented_quotient(ZZ, g, rels)
    s, to, lift = m.simplify()
    assert ModuleMap(m, s, to).is_isomorphism()
    assert ModuleMap(s, m, lift).is_well_defined()
    assert s.equal(ZZ.matmul(to, lift), ZZ.eye(s.ngens))
    assert s.invariants() == m.invariants()


@given(int_matrix(3, 4))
@settings(max_examples=80, deadline=None)
def test_smith_normal_form_shape(rows):
    s, u, v = smith_normal_form(rows)
    prod = np.array(u, dtype=object).dot(np.array(rows, dtype=object)).dot(np.array(v, dtype=object))
    assert prod.tolist() == s
    diag = [s[i][i] for i in range(3)]
    nz = [d for d in diag if d]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert all(d >= 0 for d in diag)


@pytest.mark.parametrize("p", [2, 3, 5])
@given(data=st.data())
@settings(max_examples=40, deadline=None)
def test_fp_rank_and_kernel(p, data):
    ring = CoeffRing(p)
    rows = data.draw(int_matrix(4, 5))
    a = ring.array(rows)
    assert rank(ring, a) == fp_rank(rows, p)
    k = kernel(ring, a)
    assert k.shape[1] == 5 - fp_rank(rows, p)
    assert not np.any(ring.matmul(a, k) % p)


@given(int_matrix(3, 3), st.lists(small_int, min_size=3, max_size=3))
@settings(max_examples=80, deadline=None)
def test_solve_over_z(rows, x):
    a = ZZ.array(rows)
    b = ZZ.matmul(a, ZZ.array([[v] for v in x]))
    y = solve(ZZ, a, b)
    assert y is not None
    assert (ZZ.matmul(a, y) == b).all()


def test_solve_reports_no_integral_solution():
    assert solve(ZZ, ZZ.array([[2]]), ZZ.array([[1]])) is None


@pytest.mark.parametrize("m,n", [(2, 3), (4, 6), (0, 5), (6, 9), (0, 0)])
def test_tensor_of_cyclic_groups(m, n):
    t = tensor(FgModule.cyclic(ZZ, m), FgModule.cyclic(ZZ, n))
    from math import gcd

    d = gcd(m, n)
    expected = (1, ()) if d == 0 else ((0, ()) if d == 1 else (0, (d,)))
    assert t.invariants() == expected


def test_direct_sum_invariants():
    s = direct_sum(FgModule.cyclic(ZZ, 2), FgModule.cyclic(ZZ, 3), FgModule.free(ZZ, 1))
    assert s.invariants() == (1, (6,))


def test_chain_complex_rejects_bad_square():
    objs = {0: FgModule.free(ZZ, 1), 1: FgModule.free(ZZ, 1), 2: FgModule.free(ZZ, 1)}
    with pytest.raises(ValueError):
        ChainComplex(ZZ, objs, {1: ZZ.array([[1]]), 2: ZZ.array([[1]])})


def test_chain_complex_homology_of_multiplication_by_two():
    objs = {0: FgModule.free(ZZ, 1), 1: FgModule.free(ZZ, 1)}
    c = ChainComplex(ZZ, objs, {1: ZZ.array([[2]])})
    assert c.homology(0).module.invariants() == (0, (2,))
    assert c.homology(1).module.invariants() == (0, ())


def test_ring_parse():
    assert CoeffRing.parse("Z") == ZZ
    assert CoeffRing.parse("F2") == F2
    assert CoeffRing.parse("Fp:7").p == 7
    for bad in ("Q", "F4", "Fp:x"):
        with pytest.raises(ValueError):
            CoeffRing.parse(bad)


def test_module_json_round_trip():
    m = presented_quotient(ZZ, 2, [[2, 4]]).with_degrees((0, 1))
    back = module_from_json(json.loads(json.dumps(module_to_json(m))))
    assert back.invariants() == m.invariants()
    assert back.degrees == m.degrees


def test_module_json_errors_name_the_field():
    with pytest.raises(SchemaError) as e:
        module_from_json({"ring": "Z", "gens": 2, "rels": [[1]]}, "$.bottom")
    assert "$.bottom" in str(e.value)


@given(relation_sets())
@settings(max_examples=100, deadline=None)
def test_two_oracles_agree(data):
    from oracles import diagonal_invariants, divisor_invariants

    g, rels = data
    rows = [r for r in rels if any(r)]
    assert diagonal_invariants(g, rows) == divisor_invariants(g, rows)


@given(st.integers(5, 9), st.integers(3, 9), st.data())
@settings(max_examples=60, deadline=None)
def test_larger_presentations_against_diagonal_oracle(g, r, data):
    # sparse, mostly unit entries: the shape box-product presentations have
    from oracles import diagonal_invariants

    entries = st.sampled_from([0, 0, 0, 1, -1, 2, 3])
    rels = data.draw(st.lists(st.lists(entries, min_size=g, max_size=g), min_size=r, max_size=r))
    m = presented_quotient(ZZ, g, rels)
    assert m.invariants() == diagonal_invariants(g, [x for x in rels if any(x)])
    s, to, lift = m.simplify()
    assert ModuleMap(m, s, to).is_isomorphism()
