"""Acceptance suite: one check per criterion, each printing a PASS or FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` or ``python scripts/run_acceptance.py``.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np
import pytest

from oracles import BURNSIDE, complex_dims_fp, complex_homology, det, group_invariants, periodic_hh_dual_numbers, simplicial_homology
from realhh.algebra import algebra_from_json, dual_numbers, gaussian_like, ground_field, group_algebra_c2
from realhh.hochschild import hh_homology
from realhh.hopf import build_maps, build_models, report_passed, run_mutations, verify_all
from realhh.linalg import F2, ZZ, CoeffRing
from realhh.mackey import (
    box,
    burnside_green,
    change_basis,
    fixed_point_esigma,
    find_isomorphism,
    norm_e_C2,
    random_mackey,
    random_unimodular,
    test_functors as shipped_functors,
    unitor,
    validate,
)
from realhh.simplicial import finsimp_from_json, homology_invariants, sq
from realhh.spectral import bokstedt_shadow, pages, random_filtered_complex, twisted_shadow

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "realhh" / "fixtures"


def fixture(name: str):
    return json.loads((FIXTURES / name).read_text())


# ---------------------------------------------------------------------------


def criterion_1() -> str:
    bad = []
    for seed in range(200):
        rng = np.random.default_rng(seed)
        ring = F2 if seed % 5 == 4 else ZZ
        a, b = random_mackey(rng, ring), random_mackey(rng, ring)
        v = validate(box(a, b))
        if v:
            bad.append((seed, "box", v[:2]))
        n = norm_e_C2(a.bottom, a.w)
        v = validate(n.mackey)
        if v:
            bad.append((seed, "norm", v[:2]))
    rings = [group_algebra_c2(ZZ), gaussian_like(ZZ), dual_numbers(F2), dual_numbers(ZZ), group_algebra_c2(CoeffRing(3))]
    for alg in rings:
        v = validate(norm_e_C2(alg.module(), alg.w, alg.mul, alg.unit).green)
        if v:
            bad.append((alg.name, "green norm", v[:2]))
    assert not bad, bad
    return f"200 random pairs, 400 outputs plus {len(rings)} Green norms, 0 violations"


def criterion_2() -> str:
    rng = np.random.default_rng(2)
    for m in shipped_functors():
        b = box(burnside_green().mackey, m)
        assert b.invariants() == m.invariants(), m.name
        u = unitor(m)
        assert u.check() == [] and u.is_isomorphism(), m.name
        # the same functor in a scrambled basis, found by search
        pb, pbi = random_unimodular(rng, ZZ, m.bottom.ngens)
        pt, pti = random_unimodular(rng, ZZ, m.top.ngens)
        f = find_isomorphism(b, change_basis(m, pb, pbi, pt, pti), [])
        assert f is not None and f.check() == [] and f.is_isomorphism(), m.name
    return "5 functors: invariants equal, unitor and searched isomorphism commute with res, tr, w"


def _norm_fixture(name: str):
    from realhh.cli import _norm_input

    r, w, mul, unit = _norm_input(fixture(name), name)
    return norm_e_C2(r, w, mul, unit)


def _raw_symbol(nd, i: int) -> np.ndarray:
    v = nd.raw.ring.zeros(nd.raw.top.ngens, 1)
    v[i, 0] = 1
    return nd.raw.ring.matmul(nd.pres.to.top, v)


def criterion_3() -> str:
    nd = _norm_fixture("norm_z.json")
    g, top, bottom = nd.green, nd.mackey.top, nd.mackey.bottom
    raw_rels = [[int(x) for x in nd.raw.top.rels[:, c]] for c in range(nd.raw.top.rels.shape[1])]
    assert group_invariants(nd.raw.top.ngens, raw_rels) == (2, ())
    assert top.invariants() == (2, ())
    basis = [_raw_symbol(nd, 0), _raw_symbol(nd, 1)]  # n(1), tr(1 ⊗ 1)
    assert abs(det([[int(basis[j][i, 0]) for j in range(2)] for i in range(2)])) == 1
    for (i, j), c in BURNSIDE["top_mul"].items():
        want = c[0] * basis[0] + c[1] * basis[1]
        assert top.equal(g.mul.t(basis[i][:, 0], basis[j][:, 0]).reshape(-1, 1), want)
    for i, img in BURNSIDE["res"].items():
        assert bottom.equal(ZZ.matmul(nd.mackey.res, basis[i]), ZZ.array([img]))
    assert top.equal(nd.mackey.tr, basis[1])
    assert top.equal(g.unit.reshape(-1, 1), basis[0])
    assert bottom.equal(nd.mackey.w, ZZ.eye(1))
    assert g.check() == []

    nd2 = _norm_fixture("norm_z2.json")
    raw_rels = [[int(x) for x in nd2.raw.top.rels[:, c]] for c in range(nd2.raw.top.rels.shape[1])]
    assert group_invariants(nd2.raw.top.ngens, raw_rels) == (0, (4,))
    assert nd2.mackey.top.invariants() == (0, (4,))
    n1, t = _raw_symbol(nd2, 0), _raw_symbol(nd2, 1)
    assert nd2.mackey.top.equal(t, 2 * n1)
    assert nd2.green.check() == []
    return "norm(Z) matches Burnside mul/res/tr/unit/w; norm(Z/2) top Z/4 with tr = 2n"


def criterion_4() -> str:
    from realhh.hopf import build_models

    xs = {}
    for name in ("point", "interval", "circle", "o2"):
        xs[name] = finsimp_from_json(fixture(f"simplicial_{name}.json"))
    parts = []
    for name, (x, s) in xs.items():
        y, _ = sq(x, s)
        hx, hy = homology_invariants(x), homology_invariants(y)
        ox = simplicial_homology({n: list(c) for n, c in x.cells.items()}, {c: [f[1] for f in fs] for c, fs in x.faces.items()})
        assert hx == hy == ox, (name, hx, hy, ox)
        parts.append(f"{name} {hx}")
    # the O(2) fixture is the verifier's model
    assert homology_invariants(build_models().o2) == homology_invariants(xs["o2"][0])
    return "; ".join(parts)


def criterion_5() -> str:
    want = periodic_hh_dual_numbers(2, range(4))
    assert want == {0: 2, 1: 2, 2: 2, 3: 2}
    h = hh_homology(dual_numbers(F2), cap=5)
    got = {n: h[n].invariants()[0] for n in range(4)}
    assert got == want, got
    return f"dims {got} equal the periodic-resolution oracle"


def _graded_piece(f, p: int):
    c = f.complex
    dims = {n: sum(1 for x in f.filt[n] if x == p) for n in range(c.lo, c.hi + 1)}
    d = {}
    for n in range(c.lo + 1, c.hi + 1):
        cols = [j for j, x in enumerate(f.filt[n]) if x == p]
        rows = [i for i, x in enumerate(f.filt[n - 1]) if x == p]
        if rows and cols:
            sub = c.d(n)[np.ix_(rows, cols)]
            d[n] = [[int(v) for v in sub[:, j]] for j in range(len(cols))]
    return dims, d


def criterion_6() -> str:
    spots = 0
    for ring in (ZZ, F2):
        for seed in range(50):
            f = random_filtered_complex(np.random.default_rng(1000 + seed), ring)
            rep = pages(f)
            assert not rep.step_mismatches, (ring.name, seed, rep.step_mismatches)
            assert not rep.stable_mismatches, (ring.name, seed, rep.stable_mismatches)
            spots += sum(len(pg.entries) for pg in rep.pages)
            # E^1 and the abutment against the oracle
            lo, hi = f.bounds()
            for p in range(lo, hi + 1):
                dims, d = _graded_piece(f, p)
                for n in dims:
                    e = rep.page(1).entries[(p, n - p)].module.invariants()
                    want = complex_homology(dims, d)[n] if ring is ZZ else (complex_dims_fp(dims, d, 2)[n], ())
                    assert e == want, (ring.name, seed, p, n)
    return f"100 complexes, {spots} page entries, E^(r+1) = H(E^r) and E^inf = gr H"


def _shadow_ok(rep: dict) -> bool:
    return rep["comparison"]["matched"] and rep["checks_passed"]


def criterion_7() -> str:
    esig = fixture("esigma_fixed_point_f2.json")
    assert esig and fixed_point_esigma(ground_field(F2)).check() == []
    out = []
    for a in (ground_field(F2), dual_numbers(F2), group_algebra_c2(F2)):
        assert a.w is not None
        rep = bokstedt_shadow(a, 3)
        assert rep["trust_window"] == [0, 2]
        assert _shadow_ok(rep), (a.name, rep["comparison"])
        out.append(a.name)
    return "E^2 = HR for p+q <= 2 at both levels: " + ", ".join(out)


def _page_differential_vanishes(level: dict, r: int, window: int) -> bool:
    rep = level["_report"]
    a, b = rep.page(r), rep.page(r + 1)
    return all(a.entries[k].module.invariants() == b.entries[k].module.invariants() for k in a.entries if sum(k) <= window)


def criterion_8() -> str:
    dga = algebra_from_json(fixture("algebra_dga_f2.json"))
    for a in (ground_field(F2), dual_numbers(F2), group_algebra_c2(F2), dga):
        rep = twisted_shadow(a, None, 3, green=False)
        assert _shadow_ok(rep), (a.name, rep["comparison"])
    a = group_algebra_c2(F2)
    rep = twisted_shadow(a, a.w, 3)
    assert set(rep["levels"]) == {"ring", "green_bottom", "green_top"}
    assert _shadow_ok(rep), rep["comparison"]
    for name, level in rep["levels"].items():
        assert level["checks"]["moore_d_squared_zero"], name
        assert _page_differential_vanishes(level, 2, 2), name
    return "g = id: E^2 = HH(H r) for 4 algebras; inversion on F2[C2]: d^2 = 0 and E^2 matches the nerve at both levels"


def criterion_9() -> str:
    m = build_models()
    rep = verify_all(m, build_maps(m))
    assert report_passed(rep)
    counts = {k: len(v) for k, v in rep.items()}
    muts = run_mutations(m)
    missed = [(r["map"], r["cell"], r["image"]) for r in muts if not r["caught_by"]]
    assert not missed, missed[:5]
    return f"checks {counts} all pass; {len(muts) - len(missed)}/{len(muts)} mutations caught"


def criterion_10() -> str:
    m = build_models()
    for x in (m.o2, m.d_o2):
        oracle = simplicial_homology({n: list(c) for n, c in x.cells.items()}, {c: [f[1] for f in fs] for c, fs in x.faces.items()})
        assert oracle == {0: (2, ()), 1: (2, ())}, (x.name, oracle)
        assert {n: v for n, v in homology_invariants(x).items() if n <= 1} == oracle
    entries = {e["name"]: e for e in verify_all(m, build_maps(m))["homotopy"]}
    for n in (0, 1):
        e = entries[f"H_{n}(pi) is invertible over Z"]
        assert e["passed"] and abs(det(e["witness"])) == 1, e
    return "H0 = H1 = Z^2 for O(2) and dO(2); det H(pi) = +-1 in degrees 0, 1"


CRITERIA = [
    (1, "Mackey axioms on box and norm outputs", criterion_1),
    (2, "Burnside unit for the shipped functors", criterion_2),
    (3, "norm oracles", criterion_3),
    (4, "subdivision invariance", criterion_4),
    (5, "HH of dual numbers over F2", criterion_5),
    (6, "spectral engine soundness", criterion_6),
    (7, "Real Bokstedt shadow", criterion_7),
    (8, "twisted shadow", criterion_8),
    (9, "Hopf verifier and mutation coverage", criterion_9),
    (10, "O(2) model homology", criterion_10),
]


def run_criterion(num: int, title: str, fn) -> tuple[bool, str]:
    t = time.perf_counter()
    try:
        detail, ok = fn(), True
    except AssertionError as e:
        detail, ok = f"assertion failed: {e}", False
    line = f"criterion {num:2d} {'PASS' if ok else 'FAIL'} [{time.perf_counter() - t:5.1f}s] {title}: {detail}"
    return ok, line


@pytest.mark.parametrize("num,title,fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(num, title, fn, capsys):
    ok, line = run_criterion(num, title, fn)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line
