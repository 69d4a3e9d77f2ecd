import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import complex_dims_fp, complex_homology
from realhh.algebra import Refusal, algebra_from_json, dual_numbers, ground_field, group_algebra_c2
from realhh.linalg import F2, ZZ, ChainComplex, FgModule
from realhh.spectral import FilteredComplex, bokstedt_shadow, pages, random_filtered_complex, strip_private, twisted_shadow

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "realhh" / "fixtures"


def rows_of(m: np.ndarray) -> list[list[int]]:
    return [[int(x) for x in m[:, j]] for j in range(m.shape[1])]


def graded_piece(f: FilteredComplex, p: int):
    c = f.complex
    dims, d = {}, {}
    for n in range(c.lo, c.hi + 1):
        dims[n] = sum(1 for x in f.filt[n] if x == p)
    for n in range(c.lo + 1, c.hi + 1):
        cols = [j for j, x in enumerate(f.filt[n]) if x == p]
        rows = [i for i, x in enumerate(f.filt[n - 1]) if x == p]
        sub = c.d(n)[np.ix_(rows, cols)] if rows and cols else np.zeros((len(rows), len(cols)), dtype=object)
        d[n] = rows_of(sub) if cols and rows else []
    return dims, d


@pytest.mark.parametrize("ring", [ZZ, F2], ids=["Z", "F2"])
@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_random_filtered_complexes(ring, seed):
    f = random_filtered_complex(np.random.default_rng(seed), ring)
    rep = pages(f)
    assert rep.ok, (rep.step_mismatches, rep.stable_mismatches)
    # E^1 against the oracle homology of each graded piece
    lo, hi = f.bounds()
    e1 = rep.page(1)
    for p in range(lo, hi + 1):
        dims, d = graded_piece(f, p)
        if ring is ZZ:
            want = complex_homology(dims, d)
            got = {n: e1.entries[(p, n - p)].module.invariants() for n in dims}
        else:
            want = complex_dims_fp(dims, d, 2)
            got = {n: e1.entries[(p, n - p)].module.invariants()[0] for n in dims}
        assert got == want


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_abutment_dimension_over_f2(seed):
    f = random_filtered_complex(np.random.default_rng(seed), F2)
    c = f.complex
    dims = {n: c.obj(n).ngens for n in range(c.lo, c.hi + 1)}
    d = {n: rows_of(c.d(n)) for n in range(c.lo + 1, c.hi + 1) if c.obj(n).ngens and c.obj(n - 1).ngens}
    want = complex_dims_fp(dims, d, 2)
    last = pages(f).pages[-1]
    for n in dims:
        assert sum(e.module.invariants()[0] for (p, q), e in last.entries.items() if p + q == n) == want[n]


def test_two_column_extension():
    obj = json.loads((FIXTURES / "filtered_two_column.json").read_text())
    from realhh.cli import filtered_from_json

    f = filtered_from_json(obj)
    rep = pages(f)
    assert rep.ok
    assert f.complex.homology(0).module.invariants() == (0, (4,))
    assert rep.graded[(0, 0)] == (0, (2,)) and rep.graded[(1, -1)] == (0, (2,))


def test_filtration_must_not_rise():
    objs = {0: FgModule.free(ZZ, 1), 1: FgModule.free(ZZ, 1)}
    f = FilteredComplex(ChainComplex(ZZ, objs, {1: ZZ.array([[1]])}), {0: (1,), 1: (0,)})
    assert f.check()
    with pytest.raises(ValueError):
        pages(f)


def test_filtered_complexes_must_be_free():
    objs = {0: FgModule.cyclic(ZZ, 2), 1: FgModule.free(ZZ, 1)}
    with pytest.raises(ValueError):
        FilteredComplex(ChainComplex(ZZ, objs, {1: ZZ.array([[1]])}), {0: (0,), 1: (0,)})


def test_shadow_refuses_integers():
    with pytest.raises(Refusal) as e:
        bokstedt_shadow(group_algebra_c2(ZZ))
    assert "flatness" in str(e.value)
    with pytest.raises(Refusal):
        twisted_shadow(group_algebra_c2(ZZ))


def test_shadow_report_serializes():
    out = strip_private(bokstedt_shadow(ground_field(F2), 2))
    json.dumps(out)
    assert out["comparison"]["matched"] and out["checks_passed"]


def test_dg_shadow_bottom_only():
    a = algebra_from_json(json.loads((FIXTURES / "algebra_dga_f2.json").read_text()))
    out = strip_private(bokstedt_shadow(a, 2))
    assert set(out["levels"]) == {"bottom"}
    assert out["notes"]
    assert out["comparison"]["matched"] and out["checks_passed"]


def test_twisted_shadow_dual_numbers():
    out = strip_private(twisted_shadow(dual_numbers(F2), None, 3))
    assert out["comparison"]["matched"] and out["checks_passed"]
