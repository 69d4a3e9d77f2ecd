import numpy as np
import pytest

from oracles import periodic_hh_dual_numbers, twisted_hh0
from realhh.algebra import (
    FinAlgebra,
    Refusal,
    algebra_from_table,
    dual_numbers,
    exterior,
    gaussian_like,
    ground_field,
    group_algebra_c2,
    upper_triangular,
)
from realhh.hochschild import (
    MAX_LEVEL_RANK,
    constant_green,
    dihedral_bar,
    graded_twisted_nerve,
    hh_complex,
    hh_homology,
    hh_rel_e,
    hochschild_bar,
    hr_bar,
    hr_bar_graded,
    twisted_cyclic_complex,
)
from realhh.linalg import F2, ZZ, CoeffRing
from realhh.mackey import fixed_point_esigma

F3 = CoeffRing(3)


def oracle_mul(a: FinAlgebra):
    d = a.dim

    def mul(x, y):
        out = [0] * d
        for i in range(d):
            for j in range(d):
                if x[i] and y[j]:
                    for k in range(d):
                        out[k] += x[i] * y[j] * int(a.mul[i, j, k])
        return out

    return mul


def oracle_map(a: FinAlgebra, g):
    def apply(v):
        return [sum(int(g[k, i]) * v[i] for i in range(a.dim)) for k in range(a.dim)]

    return apply


@pytest.mark.parametrize("p", [2, 3, 5])
def test_dual_numbers_against_periodic_resolution(p):
    a = dual_numbers(CoeffRing(p))
    h = hh_homology(a, cap=5)
    want = periodic_hh_dual_numbers(p, range(4))
    assert {n: h[n].invariants()[0] for n in range(4)} == want


def test_dual_numbers_over_integers():
    h = hh_homology(dual_numbers(ZZ), cap=5)
    assert [h[n].invariants() for n in range(4)] == [(2, ()), (1, (2,)), (1, ()), (1, (2,))]


@pytest.mark.parametrize(
    "alg,p",
    [(upper_triangular(ZZ), None), (group_algebra_c2(ZZ), None), (gaussian_like(ZZ), None), (dual_numbers(F3), 3), (group_algebra_c2(F2), 2)],
)
def test_hh0_is_commutator_quotient(alg, p):
    h0 = hh_homology(alg, cap=2)[0]
    ident = oracle_map(alg, np.eye(alg.dim, dtype=int))
    want = twisted_hh0(alg.dim, oracle_mul(alg), ident, p)
    got = h0.invariants() if p is None else h0.invariants()[0]
    assert got == want


def test_upper_triangular_higher_vanish():
    h = hh_homology(upper_triangular(ZZ), cap=3)
    assert h[1].invariants() == (0, ()) and h[2].invariants() == (0, ())


def _c2_sign_automorphism(ring):
    return ring.array([[1, 0], [0, -1]])


@pytest.mark.parametrize(
    "alg,g,p",
    [
        (gaussian_like(ZZ), "w", None),
        (group_algebra_c2(ZZ), "sign", None),
        (group_algebra_c2(F3), "sign", 3),
        (dual_numbers(F3), "minus_x", 3),
    ],
)
def test_twisted_hh0_oracle(alg, g, p):
    if g == "w":
        gm = alg.w
    elif g == "sign":
        gm = alg.ring.reduce(_c2_sign_automorphism(alg.ring))
    else:
        gm = alg.ring.reduce(alg.ring.array([[1, 0], [0, -1]]))
    c = twisted_cyclic_complex(alg, gm, 2)
    got = c.homology(0).module.invariants()
    want = twisted_hh0(alg.dim, oracle_mul(alg), oracle_map(alg, gm), p)
    assert (got if p is None else got[0]) == want


@pytest.mark.parametrize("alg", [dual_numbers(F2), group_algebra_c2(ZZ), exterior(ZZ)])
def test_twisted_with_identity_is_hochschild(alg):
    a = twisted_cyclic_complex(alg, None, 3)
    b = hh_complex(alg, None, 3)
    for n in range(1, 4):
        assert np.array_equal(np.asarray(a.d(n), dtype=object), np.asarray(b.d(n), dtype=object))


def test_bar_level_sizes_and_identities():
    a = group_algebra_c2(ZZ)
    bar = hochschild_bar(a, cap=3)
    assert [lv.ngens for lv in bar.levels] == [2 ** (k + 1) for k in range(4)]
    assert bar.check() == []


@pytest.mark.parametrize("alg", [group_algebra_c2(ZZ), gaussian_like(ZZ), dual_numbers(F2, 1)])
def test_dihedral_bar_is_real(alg):
    bar = dihedral_bar(alg, cap=3)
    assert bar.W is not None and bar.check() == []


def test_dihedral_requires_involution():
    with pytest.raises(ValueError):
        dihedral_bar(upper_triangular(ZZ), cap=2)


def test_exterior_graded_hochschild():
    # Lambda[x] over Z with |x| = 1: each HH_n has rank 2, split over two internal degrees
    h = hh_homology(exterior(ZZ), cap=4)
    assert all(h[n].invariants() == (2, ()) for n in range(3))


def test_hr_of_ground_field():
    bar = hr_bar(fixed_point_esigma(ground_field(F2)), 3)
    assert bar.check() == []
    h = [bar.homology(n) for n in range(3)]
    assert h[0].invariants() == {"bottom": (1, ()), "top": (1, ())}
    assert all(x.invariants() == {"bottom": (0, ()), "top": (0, ())} for x in h[1:])
    assert all(x.check() == [] for x in h)


def test_hr_dual_numbers_bottom_is_hochschild():
    a = dual_numbers(F2)
    bar = hr_bar(fixed_point_esigma(a), 3)
    want = periodic_hh_dual_numbers(2, range(3))
    for n in range(3):
        hn = bar.homology(n)
        assert hn.bottom.invariants()[0] == want[n]
        assert hn.check() == []


def test_trust_window_enforced():
    bar = hr_bar(fixed_point_esigma(ground_field(F2)), 2)
    with pytest.raises(ValueError):
        bar.homology(2)


def test_graded_hr_refuses_integers():
    with pytest.raises(Refusal):
        hr_bar_graded(fixed_point_esigma(gaussian_like(ZZ)), 2)


def test_level_guard():
    big = algebra_from_table(F2, [f"e{i}" for i in range(12)], {(f"e{i}", f"e{i}"): {f"e{i}": 1} for i in range(12)}, "e0")
    assert 12**4 > MAX_LEVEL_RANK
    with pytest.raises(Refusal):
        hochschild_bar(big, cap=3)


@pytest.mark.parametrize("alg", [group_algebra_c2(F2), gaussian_like(ZZ)])
def test_relative_twisted_nerve(alg):
    nb = hh_rel_e(alg, 3)
    assert nb.check() == []
    for n in range(3):
        assert nb.homology(n).check() == []


def test_graded_twisted_nerve_with_koszul_signs():
    from realhh.mackey import SignConvention

    nb = graded_twisted_nerve(constant_green(exterior(ZZ)), SignConvention("koszul"), 3)
    assert nb.check() == []
