import json
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import simplicial_homology
from realhh.hopf import build_models
from realhh.linalg import F2, ZZ, SchemaError
from realhh.simplicial import (
    FinSimpSet,
    RealStructure,
    SimpMap,
    chain_map,
    circle,
    delta1,
    finsimp_from_json,
    finsimp_to_json,
    homology_invariants,
    point,
    sq,
    validate_structure,
)

V = lambda c: ((0,), c)  # noqa: E731
E = lambda c: ((0, 1), c)  # noqa: E731


def delta2() -> FinSimpSet:
    return FinSimpSet(
        {0: ("0", "1", "2"), 1: ("01", "02", "12"), 2: ("012",)},
        {"01": (V("1"), V("0")), "02": (V("2"), V("0")), "12": (V("2"), V("1")), "012": (E("12"), E("02"), E("01"))},
        name="delta2",
    )


def boundary_delta2() -> FinSimpSet:
    d = delta2()
    return FinSimpSet({0: d.cells[0], 1: d.cells[1]}, {k: v for k, v in d.faces.items() if k != "012"}, name="dDelta2")


def oracle(x: FinSimpSet) -> dict:
    faces = {c: [f[1] for f in fs] for c, fs in x.faces.items()}
    cells = {n: list(cs) for n, cs in x.cells.items()}
    return simplicial_homology(cells, faces)


def models():
    m = build_models()
    return {"point": point(), "interval": delta1(), "circle": circle(), "o2": m.o2, "d_o2": m.d_o2, "delta2": delta2(), "triangle": boundary_delta2()}


@pytest.mark.parametrize("name", sorted(models()))
def test_homology_matches_oracle(name):
    x = models()[name]
    assert homology_invariants(x) == oracle(x)


@pytest.mark.parametrize("name", sorted(models()))
def test_subdivision_preserves_homology(name):
    x = models()[name]
    y, _ = sq(x)
    assert homology_invariants(y) == homology_invariants(x) == oracle(y)


def test_subdivision_level_sizes():
    # sq X_k = X_{2k+1}; the circle has n + 1 simplices in level n
    y, _ = sq(circle(), cap=3)
    levels = y.to_levels(3).levels
    assert [len(levels[k]) for k in range(4)] == [2 * k + 2 for k in range(4)]
    # Delta^2 has C(n + 3, 2) simplices in level n
    z, _ = sq(delta2(), cap=2)
    assert [len(z.to_levels(2).levels[k]) for k in range(3)] == [comb(2 * k + 4, 2) for k in range(3)]


def test_inherited_involution_is_an_involution():
    x = delta1()
    s = RealStructure({"0": V("1"), "1": V("0"), "01": E("01")})
    assert validate_structure(x, s) == []
    y, perm = sq(x, s)
    assert perm is not None
    assert all(perm[perm[c]] == c for c in perm)
    assert sorted(perm) == sorted(y.dim_of)
    # the subdivided midpoint vertex is fixed, the ends are swapped
    assert perm["0"] == "1"


def test_o2_homology_is_free_of_rank_two():
    m = build_models()
    for x in (m.o2, m.d_o2):
        assert homology_invariants(x) == {0: (2, ()), 1: (2, ())}


def test_bad_faces_rejected():
    with pytest.raises(ValueError):
        FinSimpSet({0: ("a",), 1: ("e",)}, {"e": (V("a"),)})
    with pytest.raises(ValueError):
        FinSimpSet({0: ("a",), 1: ("e",)}, {"e": (V("a"), V("zz"))})


def test_identity_chain_map():
    x = circle()
    f = SimpMap.identity(x)
    assert f.check() == []
    cm = chain_map(f)
    assert all((cm[n] == ZZ.eye(len(x.cells_in(n)))).all() for n in cm)


def test_mod_two_homology():
    assert homology_invariants(delta2(), F2)[0] == (1, ())


@given(st.integers(1, 4))
@settings(max_examples=4, deadline=None)
def test_polygon_homology(k):
    # a k-gon of edges has the homology of a circle, and so does its subdivision
    vs = [f"v{i}" for i in range(k)]
    es = [f"e{i}" for i in range(k)]
    x = FinSimpSet({0: tuple(vs), 1: tuple(es)}, {f"e{i}": (V(vs[(i + 1) % k]), V(vs[i])) for i in range(k)})
    assert homology_invariants(x) == {0: (1, ()), 1: (1, ())}
    assert homology_invariants(sq(x)[0]) == {0: (1, ()), 1: (1, ())}


def test_json_round_trip():
    x = delta2()
    x2, s = finsimp_from_json(json.loads(json.dumps(finsimp_to_json(x))))
    assert s is None
    assert homology_invariants(x2) == homology_invariants(x)
    assert x2.faces == x.faces


def test_json_errors_name_the_field():
    with pytest.raises(SchemaError) as e:
        finsimp_from_json({"cells": {"0": ["a"], "1": ["e"]}, "faces": {"e": [[[], "a"], [[], "b"]]}})
    assert "faces.e[1]" in str(e.value)
