"""C2-Mackey functors, Dress pairings, Green functors, norms and box products.

Every level is a presented module (``FgModule``); structure maps are
matrices on generators acting on columns.  ``bottom`` is the value at C2/e,
``top`` the value at C2/C2.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Callable, Sequence

import numpy as np

from .algebra import FinAlgebra, Refusal, Slot, add_deg, koszul_sign, multilinear_matrix, no_sign, _deg_parity
from .linalg import (
    CoeffRing,
    FgModule,
    ModuleMap,
    SchemaError,
    ZZ,
    direct_sum,
    int_matrix_from_json,
    kernel,
    module_from_json,
    module_to_json,
    presented_quotient,
    ring_from_json,
    solve,
    tensor,
)


def _mat(ring: CoeffRing, m) -> np.ndarray:
    return ring.coerce(np.asarray(m, dtype=object).reshape(len(m), -1) if len(m) else np.zeros((0, 0), dtype=object))


def _degs(m: FgModule) -> tuple:
    return m.degrees if m.degrees is not None else (0,) * m.ngens


def _graded(*mods: FgModule) -> bool:
    return any(m.degrees is not None for m in mods)


# ---------------------------------------------------------------------------
# Mackey functors and maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MackeyC2:
    bottom: FgModule
    top: FgModule
    w: np.ndarray  # bottom x bottom
    res: np.ndarray  # bottom x top
    tr: np.ndarray  # top x bottom
    name: str = ""

    @property
    def ring(self) -> CoeffRing:
        return self.bottom.ring

    def shape_problems(self) -> list[str]:
        b, t = self.bottom.ngens, self.top.ngens
        out = []
        for key, m, shape in (("w", self.w, (b, b)), ("res", self.res, (b, t)), ("tr", self.tr, (t, b))):
            if m.shape != shape:
                out.append(f"{key} has shape {m.shape}, expected {shape}")
        if self.bottom.ring != self.top.ring:
            out.append("levels use different coefficient rings")
        return out

    def check(self) -> list[str]:
        """Violated Mackey axioms (empty iff valid)."""
        out = self.shape_problems()
        if out:
            return out
        r, B, T = self.ring, self.bottom, self.top
        for key, src, tgt, m in (("w", B, B, self.w), ("res", T, B, self.res), ("tr", B, T, self.tr)):
            if not ModuleMap(src, tgt, m).is_well_defined():
                out.append(f"{key} does not respect relations")
        if out:
            return out
        if not B.equal(r.matmul(self.w, self.w), r.eye(B.ngens)):
            out.append("w∘w ≠ id")
        if not B.equal(r.matmul(self.res, self.tr), r.reduce(r.eye(B.ngens) + self.w)):
            out.append("res∘tr ≠ id + w")
        if not T.equal(r.matmul(self.tr, self.w), self.tr):
            out.append("tr∘w ≠ tr")
        if not B.equal(r.matmul(self.w, self.res), self.res):
            out.append("w∘res ≠ res")
        return out

    def invariants(self) -> dict:
        return {"bottom": self.bottom.invariants(), "top": self.top.invariants()}

    def simplify(self) -> "Presentation":
        bm, bto, blift = self.bottom.simplify()
        tm, tto, tlift = self.top.simplify()
        r = self.ring
        m = MackeyC2(
            bm,
            tm,
            r.matmul(bto, r.matmul(self.w, blift)),
            r.matmul(bto, r.matmul(self.res, tlift)),
            r.matmul(tto, r.matmul(self.tr, blift)),
            self.name,
        )
        return Presentation(m, MackeyMap(self, m, bto, tto), MackeyMap(m, self, blift, tlift))

    def with_name(self, name: str) -> "MackeyC2":
        return MackeyC2(self.bottom, self.top, self.w, self.res, self.tr, name)


@dataclass(frozen=True, eq=False)
class MackeyMap:
    source: MackeyC2
    target: MackeyC2
    bottom: np.ndarray
    top: np.ndarray

    def check(self) -> list[str]:
        s, t, r = self.source, self.target, self.source.ring
        out = []
        if not ModuleMap(s.bottom, t.bottom, self.bottom).is_well_defined():
            out.append("bottom map does not respect relations")
        if not ModuleMap(s.top, t.top, self.top).is_well_defined():
            out.append("top map does not respect relations")
        if out:
            return out
        if not t.bottom.equal(r.matmul(self.bottom, s.w), r.matmul(t.w, self.bottom)):
            out.append("does not commute with w")
        if not t.bottom.equal(r.matmul(self.bottom, s.res), r.matmul(t.res, self.top)):
            out.append("does not commute with res")
        if not t.top.equal(r.matmul(self.top, s.tr), r.matmul(t.tr, self.bottom)):
            out.append("does not commute with tr")
        return out

    def __matmul__(self, other: "MackeyMap") -> "MackeyMap":
        r = self.source.ring
        return MackeyMap(other.source, self.target, r.matmul(self.bottom, other.bottom), r.matmul(self.top, other.top))

    def equals(self, other: "MackeyMap") -> bool:
        t = self.target
        return t.bottom.equal(self.bottom, other.bottom) and t.top.equal(self.top, other.top)

    def is_isomorphism(self) -> bool:
        return (
            not self.check()
            and ModuleMap(self.source.bottom, self.target.bottom, self.bottom).is_isomorphism()
            and ModuleMap(self.source.top, self.target.top, self.top).is_isomorphism()
        )

    @classmethod
    def identity(cls, m: MackeyC2) -> "MackeyMap":
        return cls(m, m, m.ring.eye(m.bottom.ngens), m.ring.eye(m.top.ngens))


@dataclass(frozen=True, eq=False)
class Presentation:
    """A simplified functor with mutually inverse comparison maps to the raw one."""

    mackey: MackeyC2
    to: MackeyMap  # raw -> mackey
    lift: MackeyMap  # mackey -> raw


def zero_mackey(ring: CoeffRing) -> MackeyC2:
    z = ring.zeros(0, 0)
    return MackeyC2(FgModule.free(ring, 0), FgModule.free(ring, 0), z, z, z, "0")


def direct_sum_mackey(*ms: MackeyC2) -> MackeyC2:
    ring = ms[0].ring

    def block(mats, rows, cols):
        out = ring.zeros(sum(rows), sum(cols))
        r0 = c0 = 0
        for m, a, b in zip(mats, rows, cols):
            out[r0 : r0 + a, c0 : c0 + b] = m
            r0, c0 = r0 + a, c0 + b
        return out

    bs = [m.bottom.ngens for m in ms]
    ts = [m.top.ngens for m in ms]
    return MackeyC2(
        direct_sum(*[m.bottom for m in ms]),
        direct_sum(*[m.top for m in ms]),
        block([m.w for m in ms], bs, bs),
        block([m.res for m in ms], bs, ts),
        block([m.tr for m in ms], ts, bs),
        "+".join(m.name for m in ms),
    )


def mod_n(m: MackeyC2, n: int) -> MackeyC2:
    """Levelwise tensor with Z/n (integral functors only)."""
    r = m.ring
    if r.p:
        raise ValueError("mod_n expects integral coefficients")

    def add(mod: FgModule) -> FgModule:
        rels = r.hstack(mod.rels, r.reduce(n * r.eye(mod.ngens)))
        return FgModule(r, mod.ngens, rels, mod.degrees)

    return MackeyC2(add(m.bottom), add(m.top), m.w, m.res, m.tr, f"{m.name}/{n}")


def change_basis(m: MackeyC2, pb: np.ndarray, pbi: np.ndarray, pt: np.ndarray, pti: np.ndarray) -> MackeyC2:
    """Conjugate by invertible level matrices (columns of ``pb`` are new coordinates of old generators)."""
    r = m.ring
    bottom = FgModule(r, m.bottom.ngens, r.matmul(pb, m.bottom.rels), m.bottom.degrees)
    top = FgModule(r, m.top.ngens, r.matmul(pt, m.top.rels), m.top.degrees)
    return MackeyC2(
        bottom,
        top,
        r.matmul(pb, r.matmul(m.w, pbi)),
        r.matmul(pb, r.matmul(m.res, pti)),
        r.matmul(pt, r.matmul(m.tr, pbi)),
        m.name,
    )


# ---------------------------------------------------------------------------
# Small named functors
# ---------------------------------------------------------------------------


def burnside(ring: CoeffRing = ZZ) -> MackeyC2:
    """Bottom Z with trivial w; top Z{1, c} with res(1)=1, res(c)=2, tr(1)=c."""
    return MackeyC2(
        FgModule.free(ring, 1),
        FgModule.free(ring, 2),
        ring.eye(1),
        ring.array([[1, 2]]),
        ring.array([[0], [1]]),
        "A",
    )


def constant_z(ring: CoeffRing = ZZ) -> MackeyC2:
    return MackeyC2(FgModule.free(ring, 1), FgModule.free(ring, 1), ring.eye(1), ring.eye(1), ring.array([[2]]), "Z")


def dual_constant_z(ring: CoeffRing = ZZ) -> MackeyC2:
    return MackeyC2(FgModule.free(ring, 1), FgModule.free(ring, 1), ring.eye(1), ring.array([[2]]), ring.eye(1), "Z*")


def free_functor(ring: CoeffRing = ZZ) -> MackeyC2:
    """Induced from the trivial group: bottom Z[C2], top Z."""
    return MackeyC2(FgModule.free(ring, 2), FgModule.free(ring, 1), ring.array([[0, 1], [1, 0]]), ring.array([[1], [1]]), ring.array([[1, 1]]), "Z[C2]")


def sign_functor(ring: CoeffRing = ZZ) -> MackeyC2:
    """Bottom Z with w = -1, top the coinvariants Z/2."""
    top = FgModule(ring, 1, ring.array([[2]]))
    return MackeyC2(FgModule.free(ring, 1), top, ring.reduce(-ring.eye(1)), ring.zeros(1, 1), ring.eye(1), "Z-")


def top_only(ring: CoeffRing = ZZ, order: int = 0) -> MackeyC2:
    top = FgModule.free(ring, 1) if order == 0 else FgModule.cyclic(ring, order)
    return MackeyC2(FgModule.free(ring, 0), top, ring.zeros(0, 0), ring.zeros(0, 1), ring.zeros(1, 0), "I" if not order else f"I/{order}")


def fixed_point_functor(ring: CoeffRing, w: np.ndarray, degrees=None) -> MackeyC2:
    """Bottom a free module with involution w; top its fixed points; res inclusion, tr = 1 + w."""
    d = w.shape[0]
    degs = degrees if degrees is not None else (0,) * d
    cols = []
    tdegs = []
    for deg in sorted(set(degs), key=_deg_sort):
        idx = [i for i in range(d) if degs[i] == deg]
        sub = ring.reduce(w[np.ix_(idx, idx)] - ring.eye(len(idx)))
        k = kernel(ring, sub)
        for c in range(k.shape[1]):
            v = ring.zeros(d, 1)[:, 0]
            v[idx] = k[:, c]
            cols.append(v)
            tdegs.append(deg)
    K = ring.zeros(d, len(cols))
    for c, v in enumerate(cols):
        K[:, c] = v
    tr = solve(ring, K, ring.reduce(ring.eye(d) + w))
    if tr is None:
        raise ValueError("1 + w does not land in the fixed points")
    graded = degrees is not None
    return MackeyC2(
        FgModule.free(ring, d, degs if graded else None),
        FgModule.free(ring, len(cols), tdegs if graded else None),
        ring.reduce(w.copy()),
        K,
        ring.reduce(tr),
        "fixed",
    )


def _deg_sort(d):
    return d if not isinstance(d, tuple) else d


def test_functors(ring: CoeffRing = ZZ) -> list[MackeyC2]:
    """Five small integral test functors used by the unit and symmetry checks."""
    return [
        constant_z(ring),
        dual_constant_z(ring),
        free_functor(ring),
        sign_functor(ring),
        direct_sum_mackey(mod_n(constant_z(ring), 6), top_only(ring, 3)).with_name("Z/6+I/3"),
    ]


def random_mackey(rng: np.random.Generator, ring: CoeffRing = ZZ, max_blocks: int = 2) -> MackeyC2:
    """Random valid functor: sums of elementary blocks, optional torsion, random basis change."""
    blocks = [burnside, constant_z, dual_constant_z, free_functor, sign_functor, lambda r: top_only(r)]
    k = int(rng.integers(1, max_blocks + 1))
    parts = []
    for _ in range(k):
        m = blocks[int(rng.integers(len(blocks)))](ring)
        if not ring.p and rng.random() < 0.4:
            m = mod_n(m, int(rng.choice([2, 3, 6])))
        parts.append(m)
    m = direct_sum_mackey(*parts) if len(parts) > 1 else parts[0]
    pb, pbi = random_unimodular(rng, ring, m.bottom.ngens)
    pt, pti = random_unimodular(rng, ring, m.top.ngens)
    return change_basis(m, pb, pbi, pt, pti).with_name("random")


def random_unimodular(rng: np.random.Generator, ring: CoeffRing, n: int, steps: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """A product of elementary matrices together with its inverse."""
    p, pi = ring.eye(n), ring.eye(n)
    if n < 2:
        return p, pi
    for _ in range(steps):
        i, j = rng.choice(n, 2, replace=False)
        c = int(rng.integers(-2, 3)) or 1
        e, ei = ring.eye(n), ring.eye(n)
        e[i, j], ei[i, j] = c, -c
        p, pi = ring.reduce(ring.matmul(e, p)), ring.reduce(ring.matmul(pi, ei))
    return p, pi


# ---------------------------------------------------------------------------
# Dress pairings and Green functors
# ---------------------------------------------------------------------------


def bilinear(ring: CoeffRing, t: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sum of x_i y_j t[i, j, :]."""
    if t.shape[0] == 0 or t.shape[1] == 0:
        return ring.zeros(t.shape[2], 1)[:, 0]
    v = np.tensordot(np.tensordot(t, y, axes=([1], [0])), x, axes=([0], [0]))
    out = ring.zeros(t.shape[2], 1)[:, 0]
    out[:] = v
    return ring.reduce(out)


def _e(ring: CoeffRing, n: int, i: int) -> np.ndarray:
    v = ring.zeros(n, 1)[:, 0]
    v[i] = 1
    return v


def _empty_table(ring: CoeffRing, a: int, b: int, c: int) -> np.ndarray:
    return np.zeros((a, b, c), dtype=object if ring.dtype is object else np.int64)


@dataclass(frozen=True, eq=False)
class Pairing:
    """A Dress pairing left x right -> target: bilinear at each level, res-compatible, Frobenius."""

    left: MackeyC2
    right: MackeyC2
    target: MackeyC2
    bottom: np.ndarray  # (bl, br, bt)
    top: np.ndarray  # (tl, tr, tt)

    def b(self, x, y):
        return bilinear(self.target.ring, self.bottom, x, y)

    def t(self, a, c):
        return bilinear(self.target.ring, self.top, a, c)

    def check(self, equivariant: bool = True) -> list[str]:
        L, R, T, r = self.left, self.right, self.target, self.target.ring
        bl, br, tl, trr = L.bottom.ngens, R.bottom.ngens, L.top.ngens, R.top.ngens
        out = []
        if self.bottom.shape != (bl, br, T.bottom.ngens) or self.top.shape != (tl, trr, T.top.ngens):
            return ["pairing tables have the wrong shape"]
        # well-defined on relations, both arguments, both levels
        for lvl, A, Bm, tab, tgt, f in (
            ("bottom", L.bottom, R.bottom, self.bottom, T.bottom, self.b),
            ("top", L.top, R.top, self.top, T.top, self.t),
        ):
            for c in range(A.rels.shape[1]):
                for j in range(Bm.ngens):
                    if not tgt.is_zero(f(A.rels[:, c], _e(r, Bm.ngens, j))):
                        out.append(f"{lvl} pairing ignores a left relation")
                        break
            for c in range(Bm.rels.shape[1]):
                for i in range(A.ngens):
                    if not tgt.is_zero(f(_e(r, A.ngens, i), Bm.rels[:, c])):
                        out.append(f"{lvl} pairing ignores a right relation")
                        break
        for i in range(tl):
            a = _e(r, tl, i)
            for j in range(trr):
                c = _e(r, trr, j)
                lhs = r.matmul(T.res, self.t(a, c).reshape(-1, 1))[:, 0]
                rhs = self.b(L.res[:, i], R.res[:, j])
                if not T.bottom.equal(lhs, rhs):
                    out.append("res is not compatible with the pairing")
            for y in range(br):
                lhs = self.t(a, R.tr[:, y])
                rhs = r.matmul(T.tr, self.b(L.res[:, i], _e(r, br, y)).reshape(-1, 1))[:, 0]
                if not T.top.equal(lhs, rhs):
                    out.append("Frobenius a·tr(y) = tr(res(a)·y) fails")
        for x in range(bl):
            for j in range(trr):
                lhs = self.t(L.tr[:, x], _e(r, trr, j))
                rhs = r.matmul(T.tr, self.b(_e(r, bl, x), R.res[:, j]).reshape(-1, 1))[:, 0]
                if not T.top.equal(lhs, rhs):
                    out.append("Frobenius tr(x)·b = tr(x·res(b)) fails")
        if equivariant:
            for x in range(bl):
                for y in range(br):
                    lhs = r.matmul(T.w, self.b(_e(r, bl, x), _e(r, br, y)).reshape(-1, 1))[:, 0]
                    rhs = self.b(L.w[:, x], R.w[:, y])
                    if not T.bottom.equal(lhs, rhs):
                        out.append("bottom pairing is not w-equivariant")
        return sorted(set(out))

    def transported(self, left: Presentation, right: Presentation, target: Presentation) -> "Pairing":
        """The same pairing in simplified coordinates."""
        r = self.target.ring
        return Pairing(
            left.mackey,
            right.mackey,
            target.mackey,
            _transport_table(r, self.bottom, left.lift.bottom, right.lift.bottom, target.to.bottom),
            _transport_table(r, self.top, left.lift.top, right.lift.top, target.to.top),
        )


def _transport_table(r: CoeffRing, t: np.ndarray, la: np.ndarray, lb: np.ndarray, to: np.ndarray) -> np.ndarray:
    na, nb, nt = la.shape[1], lb.shape[1], to.shape[0]
    out = _empty_table(r, na, nb, nt)
    for i in range(na):
        for j in range(nb):
            v = bilinear(r, t, la[:, i], lb[:, j])
            out[i, j] = r.matmul(to, v.reshape(-1, 1))[:, 0]
    return out


@dataclass(frozen=True, eq=False)
class GreenC2:
    """A Mackey functor with an associative unital Dress pairing into itself."""

    mackey: MackeyC2
    mul: Pairing
    unit: np.ndarray  # top coordinates

    @property
    def ring(self):
        return self.mackey.ring

    def bottom_unit(self) -> np.ndarray:
        return self.ring.matmul(self.mackey.res, self.unit.reshape(-1, 1))[:, 0]

    def check(self) -> list[str]:
        m, r = self.mackey, self.ring
        out = m.check()
        if out:
            return out
        out += self.mul.check(equivariant=True)
        for lvl, mod, f, u in (
            ("bottom", m.bottom, self.mul.b, self.bottom_unit()),
            ("top", m.top, self.mul.t, self.unit),
        ):
            n = mod.ngens
            for i in range(n):
                ei = _e(r, n, i)
                if not mod.equal(f(u, ei), ei) or not mod.equal(f(ei, u), ei):
                    out.append(f"{lvl} unit fails")
                    break
            for i, j, k in itertools.product(range(n), repeat=3):
                ei, ej, ek = _e(r, n, i), _e(r, n, j), _e(r, n, k)
                if not mod.equal(f(f(ei, ej), ek), f(ei, f(ej, ek))):
                    out.append(f"{lvl} product is not associative")
                    break
        return out

    def simplify(self) -> tuple["GreenC2", Presentation]:
        p = self.mackey.simplify()
        mul = self.mul.transported(p, p, p)
        unit = self.ring.matmul(p.to.top, self.unit.reshape(-1, 1))[:, 0]
        return GreenC2(p.mackey, mul, unit), p


def burnside_green(ring: CoeffRing = ZZ) -> GreenC2:
    """Burnside ring at the top (c^2 = 2c), Z at the bottom."""
    a = burnside(ring)
    bt = _empty_table(ring, 1, 1, 1)
    bt[0, 0, 0] = 1
    tt = _empty_table(ring, 2, 2, 2)
    tt[0, 0] = [1, 0]
    tt[0, 1] = [0, 1]
    tt[1, 0] = [0, 1]
    tt[1, 1] = [0, 2]
    return GreenC2(a, Pairing(a, a, a, ring.reduce(bt), ring.reduce(tt)), _e(ring, 2, 0))


def module_action(r: GreenC2, m: MackeyC2, bottom: np.ndarray, top: np.ndarray) -> Pairing:
    return Pairing(r.mackey, m, m, bottom, top)


def check_left_module(r: GreenC2, act: Pairing) -> list[str]:
    """Pairing and unit/associativity for a left action r x m -> m."""
    out = act.check(equivariant=False)
    m, ring = act.right, r.ring
    for lvl, mod, rmod, f, g, u in (
        ("bottom", m.bottom, r.mackey.bottom, act.b, r.mul.b, r.bottom_unit()),
        ("top", m.top, r.mackey.top, act.t, r.mul.t, r.unit),
    ):
        for k in range(mod.ngens):
            ek = _e(ring, mod.ngens, k)
            if not mod.equal(f(u, ek), ek):
                out.append(f"{lvl} action is not unital")
            for i, j in itertools.product(range(rmod.ngens), repeat=2):
                ei, ej = _e(ring, rmod.ngens, i), _e(ring, rmod.ngens, j)
                if not mod.equal(f(g(ei, ej), ek), f(ei, f(ej, ek))):
                    out.append(f"{lvl} action is not associative")
                    break
    return sorted(set(out))


def g_twist(r: GreenC2, act: Pairing) -> Pairing:
    """Precompose the ring argument with the Weyl action at the bottom; top unchanged."""
    problems = check_left_module(r, act)
    if problems:
        raise ValueError("not a module: " + "; ".join(problems))
    ring = r.ring
    w = r.mackey.w
    n = act.bottom.shape[0]
    bt = _empty_table(ring, *act.bottom.shape)
    for i in range(n):
        for j in range(act.bottom.shape[1]):
            bt[i, j] = bilinear(ring, act.bottom, w[:, i], _e(ring, act.bottom.shape[1], j))
    return Pairing(act.left, act.right, act.target, bt, act.top.copy())


def regular_action(r: GreenC2) -> Pairing:
    return r.mul


# ---------------------------------------------------------------------------
# Box products
# ---------------------------------------------------------------------------


def _radix_index(idx: Sequence[int], dims: Sequence[int]) -> int:
    k = 0
    for i, d in zip(idx, dims):
        k = k * d + i
    return k


@dataclass(frozen=True, eq=False)
class BoxData:
    """The n-fold box of ``factors`` on top tuples plus orbit symbols, and its simplification."""

    factors: tuple[MackeyC2, ...]
    raw: MackeyC2
    ntuples: int  # number of top tuples; orbit symbols follow
    pres: Presentation

    @property
    def mackey(self) -> MackeyC2:
        return self.pres.mackey


def box_many(factors: Sequence[MackeyC2], ring: CoeffRing | None = None, simplify: bool = True) -> BoxData:
    """Iterated box product; the empty product is the Burnside functor."""
    factors = tuple(factors)
    if ring is None:
        if not factors:
            raise ValueError("ring required for the empty box product")
        ring = factors[0].ring
    if any(f.ring != ring for f in factors):
        raise ValueError("box: coefficient ring mismatch")
    graded = any(_graded(f.bottom, f.top) for f in factors)
    n = len(factors)
    bdims = [f.bottom.ngens for f in factors]
    tdims = [f.top.ngens for f in factors]
    Q = int(np.prod(bdims, dtype=np.int64)) if n else 1
    P = int(np.prod(tdims, dtype=np.int64)) if n else 1

    if n == 0:
        bottom = FgModule.free(ring, 1, (0,) if graded else None)
    else:
        fbs = [f.bottom if not graded or f.bottom.degrees is not None else f.bottom.with_degrees((0,) * f.bottom.ngens) for f in factors]
        bottom = fbs[0]
        for fb in fbs[1:]:
            bottom = tensor(bottom, fb)
    W = multilinear_matrix(ring, bdims, bdims, [Slot.map(i, f.w) for i, f in enumerate(factors)])

    tdeg = [_degs(f.top) for f in factors]
    bdeg = [_degs(f.bottom) for f in factors]
    top_degs: list = [0] * (P + Q)
    if graded:
        for k, idx in enumerate(itertools.product(*[range(d) for d in tdims])):
            d = None
            for i, j in enumerate(idx):
                d = add_deg(d, tdeg[i][j])
            top_degs[k] = 0 if d is None else d
        for k, idx in enumerate(itertools.product(*[range(d) for d in bdims])):
            d = None
            for i, j in enumerate(idx):
                d = add_deg(d, bdeg[i][j])
            top_degs[P + k] = 0 if d is None else d

    cols: list[dict[int, int]] = []
    # (a) relations of each top factor
    for pos, f in enumerate(factors):
        for c in range(f.top.rels.shape[1]):
            rel = {int(i): int(f.top.rels[i, c]) for i in np.flatnonzero(f.top.rels[:, c])}
            others = [range(d) if i != pos else [0] for i, d in enumerate(tdims)]
            for idx in itertools.product(*others):
                col = {}
                for i, v in rel.items():
                    j = list(idx)
                    j[pos] = i
                    col[_radix_index(j, tdims)] = v
                cols.append(col)
    # (b) orbit copies of bottom relations
    for c in range(bottom.rels.shape[1]):
        cols.append({P + int(i): int(bottom.rels[i, c]) for i in np.flatnonzero(bottom.rels[:, c])})
    # (c) orbit symbols are Weyl invariant
    seen = set()
    for z in range(Q):
        col = {P + z: 1}
        for i in np.flatnonzero(W[:, z]):
            col[P + int(i)] = col.get(P + int(i), 0) - int(W[i, z])
        col = {k: v for k, v in col.items() if v % (ring.p or 1 << 62) != 0} if ring.p else {k: v for k, v in col.items() if v}
        key = tuple(sorted(col.items()))
        if col and key not in seen:
            seen.add(key)
            cols.append(col)
    # (d) Frobenius at each position
    res_cols = [[{int(i): int(f.res[i, a]) for i in np.flatnonzero(f.res[:, a])} for a in range(f.top.ngens)] for f in factors]
    tr_cols = [[{int(i): int(f.tr[i, y]) for i in np.flatnonzero(f.tr[:, y])} for y in range(f.bottom.ngens)] for f in factors]
    for pos, f in enumerate(factors):
        for y in range(bdims[pos]):
            others = [range(d) if i != pos else [0] for i, d in enumerate(tdims)]
            for idx in itertools.product(*others):
                col: dict[int, int] = {}
                for a, v in tr_cols[pos][y].items():
                    j = list(idx)
                    j[pos] = a
                    k = _radix_index(j, tdims)
                    col[k] = col.get(k, 0) + v
                acc = {0: 1}
                for i in range(n):
                    comp = {y: 1} if i == pos else res_cols[i][idx[i]]
                    acc = {q * bdims[i] + k: c * x for q, c in acc.items() for k, x in comp.items()}
                for k, v in acc.items():
                    col[P + k] = col.get(P + k, 0) - v
                cols.append(col)
    rels = ring.zeros(P + Q, len(cols))
    for c, col in enumerate(cols):
        for k, v in col.items():
            rels[k, c] += v
    top = FgModule(ring, P + Q, ring.reduce(rels), tuple(top_degs) if graded else None)

    res = ring.zeros(Q, P + Q)
    res[:, :P] = multilinear_matrix(ring, tdims, bdims, [Slot.map(i, f.res) for i, f in enumerate(factors)])
    res[:, P:] = ring.reduce(ring.eye(Q) + W)
    tr = ring.zeros(P + Q, Q)
    tr[P:, :] = ring.eye(Q)
    raw = MackeyC2(bottom, top, W, ring.reduce(res), tr, " □ ".join(f.name for f in factors) or "A")
    if simplify:
        pres = raw.simplify()
    else:
        pres = Presentation(raw, MackeyMap.identity(raw), MackeyMap.identity(raw))
    return BoxData(factors, raw, P, pres)


def box(m: MackeyC2, n: MackeyC2) -> MackeyC2:
    return box_many([m, n]).mackey


@dataclass(frozen=True)
class MSlot:
    """Target slot of a map between boxes: a Mackey map, a pairing, or a constant top element."""

    kind: str
    sources: tuple[int, ...]
    data: object

    @staticmethod
    def ident(i: int) -> "MSlot":
        return MSlot("id", (i,), None)

    @staticmethod
    def map(i: int, f: MackeyMap) -> "MSlot":
        return MSlot("map", (i,), f)

    @staticmethod
    def pair(i: int, j: int, p: Pairing) -> "MSlot":
        return MSlot("pair", (i, j), p)

    @staticmethod
    def unit(m: MackeyC2, u: np.ndarray) -> "MSlot":
        return MSlot("unit", (), (m, u))


def box_map(src: BoxData, tgt: BoxData, plan: Sequence[MSlot], sign: Callable = no_sign, raw: bool = False) -> MackeyMap:
    """The map of boxes induced slotwise by ``plan`` (with a permutation sign)."""
    ring = src.raw.ring
    sf, tf = src.factors, tgt.factors
    bplan, tplan = [], []
    for s in plan:
        if s.kind == "id":
            f = sf[s.sources[0]]
            bplan.append(Slot.map(s.sources[0], ring.eye(f.bottom.ngens)))
            tplan.append(Slot.map(s.sources[0], ring.eye(f.top.ngens)))
        elif s.kind == "map":
            bplan.append(Slot.map(s.sources[0], s.data.bottom))
            tplan.append(Slot.map(s.sources[0], s.data.top))
        elif s.kind == "pair":
            bplan.append(Slot.pair(*s.sources, s.data.bottom))
            tplan.append(Slot.pair(*s.sources, s.data.top))
        else:
            m, u = s.data
            bplan.append(Slot.unit(ring.matmul(m.res, u.reshape(-1, 1))[:, 0]))
            tplan.append(Slot.unit(u))
    bdims = [f.bottom.ngens for f in sf]
    tdims = [f.top.ngens for f in sf]
    bt = [f.bottom.ngens for f in tf]
    tt = [f.top.ngens for f in tf]
    bdeg = [_degs(f.bottom) for f in sf]
    tdeg = [_degs(f.top) for f in sf]
    B = multilinear_matrix(ring, bdims, bt, bplan, bdeg, sign)
    Tt = multilinear_matrix(ring, tdims, tt, tplan, tdeg, sign)
    Ps, Pt = src.ntuples, tgt.ntuples
    T = ring.zeros(tgt.raw.top.ngens, src.raw.top.ngens)
    T[:Pt, :Ps] = Tt
    T[Pt:, Ps:] = B
    f = MackeyMap(src.raw, tgt.raw, B, T)
    if raw:
        return f
    return tgt.pres.to @ f @ src.pres.lift


def unitor(m: MackeyC2) -> MackeyMap:
    """A □ M -> M: (a, x) -> a·x on top tuples, orbit symbols -> tr."""
    ring = m.ring
    a = burnside(ring)
    bd = box_many([a, m])
    # Burnside action on M: 1 acts as identity, c acts as tr∘res
    bt = _empty_table(ring, 1, m.bottom.ngens, m.bottom.ngens)
    for j in range(m.bottom.ngens):
        bt[0, j] = _e(ring, m.bottom.ngens, j)
    tt = _empty_table(ring, 2, m.top.ngens, m.top.ngens)
    trres = ring.matmul(m.tr, m.res)
    for j in range(m.top.ngens):
        tt[0, j] = _e(ring, m.top.ngens, j)
        tt[1, j] = trres[:, j]
    act = Pairing(a, m, m, bt, tt)
    tgt = box_many([m])
    f = box_map(bd, tgt, [MSlot.pair(0, 1, act)], raw=True)
    # one-factor box is isomorphic to m itself via projection onto top tuples
    proj = MackeyMap(tgt.raw, m, ring.eye(m.bottom.ngens), ring.hstack(ring.eye(m.top.ngens), m.tr))
    return proj @ f @ bd.pres.lift


# ---------------------------------------------------------------------------
# Isomorphism search
# ---------------------------------------------------------------------------


def _vec_kron(ring, c, a):
    """Matrix of X -> a X c on column-major vec(X)."""
    from .algebra import kron_all

    return kron_all(ring, [c.T.copy(), a])


def hom_basis(m: MackeyC2, n: MackeyC2) -> list[MackeyMap]:
    """A basis of the Hom module of Mackey maps m -> n (as level matrices)."""
    r = m.ring
    nb, nt, mb, mt = n.bottom.ngens, n.top.ngens, m.bottom.ngens, m.top.ngens
    Rb, Rt = n.bottom.rels, n.top.rels
    xb, xt = nb * mb, nt * mt
    blocks = []  # list of (rows, [coef for B, coef for T, aux])
    eqs = []

    def I(k):
        return r.eye(k)

    # each equation: coefB (rows x xb), coefT (rows x xt), relmat (target rels), ncols
    def add(coefB, coefT, rel, width):
        rows = coefB.shape[0] if coefB is not None else coefT.shape[0]
        if coefB is None:
            coefB = r.zeros(rows, xb)
        if coefT is None:
            coefT = r.zeros(rows, xt)
        aux = _vec_kron(r, I(width), rel) if rel.shape[1] else r.zeros(rows, 0)
        eqs.append((coefB, coefT, aux))

    add(_vec_kron(r, m.bottom.rels, I(nb)), None, Rb, m.bottom.rels.shape[1])
    add(None, _vec_kron(r, m.top.rels, I(nt)), Rt, m.top.rels.shape[1])
    add(r.reduce(_vec_kron(r, m.w, I(nb)) - _vec_kron(r, I(mb), n.w)), None, Rb, mb)
    add(_vec_kron(r, m.res, I(nb)), r.reduce(-_vec_kron(r, I(mt), n.res)), Rb, mt)
    add(r.reduce(-_vec_kron(r, I(mb), n.tr)), _vec_kron(r, m.tr, I(nt)), Rt, mb)
    rows = sum(e[0].shape[0] for e in eqs)
    naux = sum(e[2].shape[1] for e in eqs)
    big = r.zeros(rows, xb + xt + naux)
    r0, a0 = 0, xb + xt
    for cb, ct, aux in eqs:
        k = cb.shape[0]
        big[r0 : r0 + k, :xb] = cb
        big[r0 : r0 + k, xb : xb + xt] = ct
        big[r0 : r0 + k, a0 : a0 + aux.shape[1]] = r.reduce(-aux)
        r0, a0 = r0 + k, a0 + aux.shape[1]
    from .linalg import span_basis

    K = kernel(r, big)
    proj = span_basis(r, K[: xb + xt, :].copy()) if K.shape[1] else r.zeros(xb + xt, 0)
    out = []
    for c in range(proj.shape[1]):
        v = proj[:, c]
        B = v[:xb].reshape(mb, nb).T.copy()
        T = v[xb:].reshape(mt, nt).T.copy()
        out.append(MackeyMap(m, n, r.reduce(B), r.reduce(T)))
    return out


def find_isomorphism(m: MackeyC2, n: MackeyC2, candidates: Sequence[MackeyMap] = (), max_l1: int = 3, limit: int = 50000) -> MackeyMap | None:
    """An isomorphism m -> n or None: candidates first, then a deterministic Hom-lattice search."""
    if m.invariants() != n.invariants():
        return None
    for f in candidates:
        if f.is_isomorphism():
            return f
    basis = hom_basis(m, n)
    r = m.ring
    d = len(basis)
    if d == 0:
        return f0 if (f0 := MackeyMap(m, n, r.zeros(n.bottom.ngens, m.bottom.ngens), r.zeros(n.top.ngens, m.top.ngens))).is_isomorphism() else None
    tried = 0
    for l1 in range(1, max_l1 + 1):
        for support in _supports(d, l1):
            for vals in _signed_parts(l1, len(support), r):
                B = r.zeros(n.bottom.ngens, m.bottom.ngens)
                T = r.zeros(n.top.ngens, m.top.ngens)
                for i, v in zip(support, vals):
                    B = B + v * basis[i].bottom
                    T = T + v * basis[i].top
                f = MackeyMap(m, n, r.reduce(B), r.reduce(T))
                tried += 1
                if f.is_isomorphism():
                    return f
                if tried >= limit:
                    return None
    return None


def _supports(d: int, l1: int):
    for k in range(1, min(l1, d) + 1):
        yield from itertools.combinations(range(d), k)


def _signed_parts(l1: int, k: int, r: CoeffRing):
    """Nonzero coefficient tuples of length k with absolute sum l1."""
    for parts in itertools.product(range(1, l1 + 1), repeat=k):
        if sum(parts) != l1:
            continue
        for signs in itertools.product((1, -1), repeat=k):
            vals = tuple(p * s for p, s in zip(parts, signs))
            if r.p and any(v % r.p == 0 for v in vals):
                continue
            if r.p == 2 and any(s < 0 for s in signs):
                continue
            yield vals


def isomorphic(m: MackeyC2, n: MackeyC2, candidates: Sequence[MackeyMap] = ()) -> bool:
    return find_isomorphism(m, n, candidates) is not None


# ---------------------------------------------------------------------------
# Norms from the trivial group
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NormData:
    """Raw norm presentation (symbols n(g_i), then tr(z)) and its simplification."""

    r: FgModule
    w: np.ndarray
    raw: MackeyC2
    pres: Presentation
    green: GreenC2 | None
    raw_green: GreenC2 | None
    mul: np.ndarray | None

    @property
    def mackey(self) -> MackeyC2:
        return self.pres.mackey

    def n_expand(self, v: np.ndarray) -> np.ndarray:
        return _n_expand(self.r, self.w, v, self.raw.ring)


def _n_expand(r: FgModule, w: np.ndarray, v, ring: CoeffRing) -> np.ndarray:
    """Raw top coordinates of n(sum c_i g_i) from the exponential relation."""
    d = r.ngens
    out = np.zeros(d + d * d, dtype=object)
    c = [int(x) for x in v]
    wc = [[int(x) for x in w[:, i]] for i in range(d)]
    for i in range(d):
        if c[i] == 0:
            continue
        out[i] += c[i]
        k = comb(c[i], 2) if c[i] >= 0 else (c[i] * (c[i] - 1)) // 2
        if k:
            for j in range(d):
                out[d + i * d + j] += k * wc[i][j]
    for i in range(d):
        for l in range(i + 1, d):
            if c[i] and c[l]:
                for j in range(d):
                    out[d + i * d + j] += c[i] * c[l] * wc[l][j]
    return out


def norm_e_C2(r: FgModule, w: np.ndarray, mul: np.ndarray | None = None, unit: np.ndarray | None = None, coeff: CoeffRing | None = None) -> NormData:
    """The norm with generators n(g), tr(z); a Green functor when ``mul`` is given.

    All structure constants are built over Z from integer lifts and then
    reduced into ``coeff`` (default: the ring of ``r``).
    """
    ring = coeff or r.ring
    d = r.ngens
    graded = r.degrees is not None
    degs = _degs(r)
    if graded and ring.p != 2 and any(_deg_parity(x) for x in degs):
        raise Refusal("norm of odd-degree generators needs characteristic 2 (sign rules not modelled)")
    Z = ZZ
    wz = Z.coerce(w)
    if not FgModule(ring, d, ring.coerce(r.rels)).equal(ring.matmul(ring.coerce(w), ring.coerce(w)), ring.eye(d)):
        raise ValueError("w is not an involution")
    rz = FgModule(Z, d, Z.coerce(r.rels), r.degrees)
    bottom_z = tensor(rz, rz)
    # W = swap ∘ (w ⊗ w)
    W = Z.zeros(d * d, d * d)
    for a in range(d):
        for b in range(d):
            for i in np.flatnonzero(wz[:, a]):
                for j in np.flatnonzero(wz[:, b]):
                    W[int(j) * d + int(i), a * d + b] += wz[i, a] * wz[j, b]
    ntop = d + d * d
    cols = []
    for c in range(bottom_z.rels.shape[1]):
        col = np.zeros(ntop, dtype=object)
        col[d:] = bottom_z.rels[:, c]
        cols.append(col)
    for z in range(d * d):
        col = np.zeros(ntop, dtype=object)
        col[d + z] += 1
        col[d:] -= W[:, z]
        if any(col):
            cols.append(col)
    for c in range(rz.rels.shape[1]):
        cols.append(_n_expand(rz, wz, rz.rels[:, c], Z))
    rels = ring.zeros(ntop, len(cols))
    for k, col in enumerate(cols):
        for i in range(ntop):
            rels[i, k] = col[i]
    tdegs = None
    if graded:
        tdegs = tuple(add_deg(x, x) for x in degs) + tuple(add_deg(a, b) for a in degs for b in degs)
    top = FgModule(ring, ntop, ring.reduce(rels), tdegs)
    bottom = FgModule(ring, d * d, ring.coerce(bottom_z.rels), bottom_z.degrees)
    res = Z.zeros(d * d, ntop)
    for i in range(d):
        for j in range(d):
            res[i * d + j, i] = wz[j, i]
    res[:, d:] = Z.eye(d * d) + W
    tr = Z.zeros(ntop, d * d)
    tr[d:, :] = Z.eye(d * d)
    raw = MackeyC2(bottom, top, ring.coerce(W), ring.coerce(res), ring.coerce(tr), "N(r)")
    pres = raw.simplify()
    green = raw_green = None
    mz = None
    if mul is not None:
        mz = np.empty((d, d, d), dtype=object)
        for i in range(d):
            for j in range(d):
                mz[i, j] = [int(x) for x in mul[i, j]]
        # bottom: (a⊗b)(c⊗e) = ac ⊗ eb
        bt = np.zeros((d * d, d * d, d * d), dtype=object)
        for a, b, c, e in itertools.product(range(d), repeat=4):
            ac, eb = mz[a, c], mz[e, b]
            for i in np.flatnonzero(ac):
                for j in np.flatnonzero(eb):
                    bt[a * d + b, c * d + e, int(i) * d + int(j)] += ac[i] * eb[j]

        def bprod(x, y):
            return np.tensordot(np.tensordot(bt, y, axes=([1], [0])), x, axes=([0], [0]))

        def trv(z):
            out = np.zeros(ntop, dtype=object)
            out[d:] = z
            return out

        def gwg(i):
            v = np.zeros(d * d, dtype=object)
            for j in range(d):
                v[i * d + j] = wz[j, i]
            return v

        tt = np.zeros((ntop, ntop, ntop), dtype=object)
        for i in range(d):
            for j in range(d):
                tt[i, j] = _n_expand(rz, wz, mz[i, j], Z)
        for i in range(d):
            for z in range(d * d):
                ez = np.zeros(d * d, dtype=object)
                ez[z] = 1
                tt[i, d + z] = trv(bprod(gwg(i), ez))
                tt[d + z, i] = trv(bprod(ez, gwg(i)))
        for z in range(d * d):
            ez = np.zeros(d * d, dtype=object)
            ez[z] = 1
            for z2 in range(d * d):
                e2 = np.zeros(d * d, dtype=object)
                e2[z2] = 1
                tt[d + z, d + z2] = trv(bprod(ez, e2 + W[:, z2]))
        u = unit if unit is not None else _e(Z, d, 0)
        uraw = _n_expand(rz, wz, u, Z)
        raw_green = GreenC2(raw, Pairing(raw, raw, raw, ring.reduce(_to_ring(ring, bt)), ring.reduce(_to_ring(ring, tt))), ring.reduce(_vec_to_ring(ring, uraw)))
        green = GreenC2(
            pres.mackey,
            raw_green.mul.transported(pres, pres, pres),
            ring.matmul(pres.to.top, raw_green.unit.reshape(-1, 1))[:, 0],
        )
    return NormData(FgModule(ring, d, ring.coerce(r.rels), r.degrees), ring.coerce(w), raw, pres, green, raw_green, mz)


def _to_ring(ring: CoeffRing, t: np.ndarray) -> np.ndarray:
    out = np.zeros(t.shape, dtype=object if ring.dtype is object else np.int64)
    for idx, v in np.ndenumerate(t):
        out[idx] = int(v) % ring.p if ring.p else int(v)
    return out


def _vec_to_ring(ring, v):
    out = ring.zeros(len(v), 1)[:, 0]
    for i, x in enumerate(v):
        out[i] = int(x) % ring.p if ring.p else int(x)
    return out


# ---------------------------------------------------------------------------
# Discrete E_sigma rings
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ESigmaRing:
    """A Mackey functor whose bottom is a ring with anti-involution, with norm actions.

    ``psi_L[i, a]`` is the top coordinate vector of n(g_i)·a and
    ``psi_R[a, i]`` of a·n(g_i).  Transfer symbols act through Frobenius.
    """

    m: MackeyC2
    mul: np.ndarray  # bottom structure constants (d, d, d)
    unit: np.ndarray  # top coordinates
    psi_L: np.ndarray  # (d, t, t)
    psi_R: np.ndarray  # (t, d, t)
    name: str = ""

    @property
    def ring(self):
        return self.m.ring

    @cached_property
    def norm(self) -> NormData:
        u = self.ring.matmul(self.m.res, self.unit.reshape(-1, 1))[:, 0]
        return norm_e_C2(self.m.bottom, self.m.w, self.mul, u)

    def bottom_unit(self) -> np.ndarray:
        return self.ring.matmul(self.m.res, self.unit.reshape(-1, 1))[:, 0]

    def bottom_product(self, x, y):
        return bilinear(self.ring, self.mul, x, y)

    def _raw_pairings(self) -> tuple[Pairing, Pairing]:
        ring, m = self.ring, self.m
        N = self.norm.raw
        d, t = m.bottom.ngens, m.top.ngens
        # bottom: (u⊗v)·x = u x v and x·(u⊗v) = v x u
        bl = _empty_table(ring, d * d, d, d)
        br = _empty_table(ring, d, d * d, d)
        for u, v, x in itertools.product(range(d), repeat=3):
            eu, ev, ex = _e(ring, d, u), _e(ring, d, v), _e(ring, d, x)
            bl[u * d + v, x] = self.bottom_product(self.bottom_product(eu, ex), ev)
            br[x, u * d + v] = self.bottom_product(self.bottom_product(ev, ex), eu)
        ntop = N.top.ngens
        tl = _empty_table(ring, ntop, t, t)
        trt = _empty_table(ring, t, ntop, t)
        for i in range(d):
            for a in range(t):
                tl[i, a] = self.psi_L[i, a]
                trt[a, i] = self.psi_R[a, i]
        for z in range(d * d):
            ez = _e(ring, d * d, z)
            for a in range(t):
                ra = m.res[:, a]
                tl[d + z, a] = ring.matmul(m.tr, bilinear(ring, bl, ez, ra).reshape(-1, 1))[:, 0]
                trt[a, d + z] = ring.matmul(m.tr, bilinear(ring, br, ra, ez).reshape(-1, 1))[:, 0]
        return Pairing(N, m, m, bl, tl), Pairing(m, N, m, br, trt)

    @cached_property
    def pairings(self) -> tuple[Pairing, Pairing]:
        """(psi_L, psi_R) in the simplified coordinates of the norm."""
        pl, pr = self._raw_pairings()
        npres = self.norm.pres
        ident = Presentation(self.m, MackeyMap.identity(self.m), MackeyMap.identity(self.m))
        return pl.transported(npres, ident, ident), pr.transported(ident, npres, ident)

    def check(self) -> list[str]:
        out = self.m.check()
        if out:
            return out
        ring, m = self.ring, self.m
        d = m.bottom.ngens
        B = m.bottom
        if self.mul.shape != (d, d, d):
            return ["bottom_mul has the wrong shape"]
        u = self.bottom_unit()
        for i in range(d):
            ei = _e(ring, d, i)
            if not B.equal(self.bottom_product(u, ei), ei) or not B.equal(self.bottom_product(ei, u), ei):
                out.append("res(unit) is not a two-sided unit of the bottom ring")
                break
        for i, j, k in itertools.product(range(d), repeat=3):
            ei, ej, ek = _e(ring, d, i), _e(ring, d, j), _e(ring, d, k)
            if not B.equal(self.bottom_product(self.bottom_product(ei, ej), ek), self.bottom_product(ei, self.bottom_product(ej, ek))):
                out.append("bottom product is not associative")
                break
        degs = _degs(B)
        for i in range(d):
            for j in range(d):
                lhs = ring.matmul(m.w, self.mul[i, j].reshape(-1, 1))[:, 0]
                rhs = koszul_sign(degs[i], degs[j]) * self.bottom_product(m.w[:, j], m.w[:, i])
                if not B.equal(lhs, ring.reduce(rhs)):
                    out.append("w is not an anti-homomorphism of the bottom ring")
        if out:
            return out
        try:
            norm = self.norm
        except Refusal as e:
            return [str(e)]
        g = norm.raw_green
        gp = g.check()
        out += [f"norm: {p}" for p in gp]
        pl, pr = self._raw_pairings()
        out += [f"psi_L: {p}" for p in pl.check(equivariant=False)]
        out += [f"psi_R: {p}" for p in pr.check(equivariant=False)]
        if out:
            return out
        out += _module_axioms(g, pl, pr, m)
        return out


def _module_axioms(g: GreenC2, pl: Pairing, pr: Pairing, m: MackeyC2) -> list[str]:
    """Unit and associativity of both actions, and that they commute."""
    out = []
    ring = m.ring
    for lvl, mod, nmod, fl, fr, gm, u in (
        ("bottom", m.bottom, g.mackey.bottom, pl.b, pr.b, g.mul.b, g.bottom_unit()),
        ("top", m.top, g.mackey.top, pl.t, pr.t, g.mul.t, g.unit),
    ):
        nn = nmod.ngens
        for k in range(mod.ngens):
            ek = _e(ring, mod.ngens, k)
            if not mod.equal(fl(u, ek), ek):
                out.append(f"{lvl}: left norm action is not unital")
            if not mod.equal(fr(ek, u), ek):
                out.append(f"{lvl}: right norm action is not unital")
            for i in range(nn):
                ei = _e(ring, nn, i)
                for j in range(nn):
                    ej = _e(ring, nn, j)
                    if not mod.equal(fl(gm(ei, ej), ek), fl(ei, fl(ej, ek))):
                        out.append(f"{lvl}: left norm action is not associative")
                    if not mod.equal(fr(ek, gm(ei, ej)), fr(fr(ek, ei), ej)):
                        out.append(f"{lvl}: right norm action is not associative")
                    if not mod.equal(fr(fl(ei, ek), ej), fl(ei, fr(ek, ej))):
                        out.append(f"{lvl}: left and right norm actions do not commute")
    return sorted(set(out))


def fixed_point_esigma(a: FinAlgebra) -> ESigmaRing:
    """Fixed-point functor of a ring with anti-involution: n(x)·a = x a w(x), a·n(x) = w(x) a x."""
    if a.w is None:
        raise ValueError("algebra needs an anti-involution")
    ring = a.ring
    m = fixed_point_functor(ring, a.w, a.degrees)
    K = m.res
    d, t = a.dim, m.top.ngens

    def fix(v):
        s = solve(ring, K, v.reshape(-1, 1))
        if s is None:
            raise ValueError("element is not Weyl fixed")
        return s[:, 0]

    pl = _empty_table(ring, d, t, t)
    pr = _empty_table(ring, t, d, t)
    for i in range(d):
        gi, wgi = a.basis(i), a.w[:, i]
        for c in range(t):
            x = K[:, c]
            pl[i, c] = fix(a.product(a.product(gi, x), wgi))
            pr[c, i] = fix(a.product(a.product(wgi, x), gi))
    unit = fix(a.unit)
    m = m.with_name(f"fix({a.name})")
    return ESigmaRing(m, a.mul, unit, pl, pr, f"fix({a.name})")


# ---------------------------------------------------------------------------
# Graded functors and sign conventions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SignConvention:
    """A symmetric-compatible sign rule on pairs of degrees."""

    name: str = "koszul"
    table: tuple = ()  # ((a, b, sign), ...) for name == "file"
    default: int = 1

    def __call__(self, a, b) -> int:
        if self.name == "koszul":
            return koszul_sign(a, b)
        if self.name == "none":
            return 1
        key = (_norm_deg(a), _norm_deg(b))
        for x, y, s in self.table:
            if (x, y) == key:
                return s
        return self.default

    def problems(self, degrees: Sequence) -> list[str]:
        out = []
        for a in degrees:
            for b in degrees:
                if self(a, b) * self(b, a) != 1:
                    out.append(f"sign({a},{b})·sign({b},{a}) ≠ 1")
        return sorted(set(out))

    @classmethod
    def parse(cls, text: str) -> "SignConvention":
        if text in ("koszul", "none"):
            return cls(text)
        if text.startswith("file:"):
            path = text[5:]
            try:
                with open(path) as fh:
                    obj = json.load(fh)
            except (OSError, json.JSONDecodeError) as e:
                raise SchemaError(path, f"cannot read sign table: {e}") from None
            return cls.from_json(obj, path)
        raise SchemaError("--sign", f"unknown sign convention {text!r}")

    @classmethod
    def from_json(cls, obj, path: str = "$") -> "SignConvention":
        if not isinstance(obj, dict) or not isinstance(obj.get("pairs"), list):
            raise SchemaError(path, 'expected {"pairs": [[a, b, sign], ...], "default": 1}')
        rows = []
        for i, row in enumerate(obj["pairs"]):
            if not isinstance(row, list) or len(row) != 3 or row[2] not in (1, -1):
                raise SchemaError(f"{path}.pairs[{i}]", "expected [degree, degree, ±1]")
            rows.append((_norm_deg(row[0]), _norm_deg(row[1]), row[2]))
        default = obj.get("default", 1)
        if default not in (1, -1):
            raise SchemaError(f"{path}.default", "expected ±1")
        return cls("file", tuple(rows), default)


def _norm_deg(d):
    if isinstance(d, list):
        return tuple(d)
    return d


@dataclass(frozen=True, eq=False)
class GradedMackeyC2:
    """A Mackey functor whose generators carry Z or Z^2 degrees, with a sign rule."""

    mackey: MackeyC2
    convention: SignConvention = field(default_factory=SignConvention)

    def pieces(self) -> dict:
        """Degree -> the homogeneous sub-functor."""
        m = self.mackey
        bdeg, tdeg = _degs(m.bottom), _degs(m.top)
        out = {}
        for d in sorted(set(bdeg) | set(tdeg), key=lambda x: x if not isinstance(x, tuple) else x):
            bi = [i for i, x in enumerate(bdeg) if x == d]
            ti = [i for i, x in enumerate(tdeg) if x == d]
            out[d] = MackeyC2(
                m.bottom.submodule_block(bi).with_degrees(None),
                m.top.submodule_block(ti).with_degrees(None),
                m.w[np.ix_(bi, bi)],
                m.res[np.ix_(bi, ti)],
                m.tr[np.ix_(ti, bi)],
                f"{m.name}[{d}]",
            )
        return out


def graded_box(m: GradedMackeyC2, n: GradedMackeyC2) -> GradedMackeyC2:
    if m.convention != n.convention:
        raise ValueError("graded_box: sign convention mismatch")
    return GradedMackeyC2(box(m.mackey, n.mackey), m.convention)


def rotation(m: GradedMackeyC2, n: GradedMackeyC2) -> MackeyMap:
    """The symmetry box(m, n) -> box(n, m) with the convention's signs."""
    if m.convention != n.convention:
        raise ValueError("rotation: sign convention mismatch")
    s = box_many([m.mackey, n.mackey])
    t = box_many([n.mackey, m.mackey])
    return box_map(s, t, [MSlot.ident(1), MSlot.ident(0)], sign=m.convention)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _images_to_matrix(ring, obj, nsrc, ntgt, path):
    """JSON maps list the image of each source generator as a row."""
    rows = int_matrix_from_json(obj, nsrc, ntgt, path)
    m = ring.zeros(ntgt, nsrc)
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            m[j, i] = v
    return ring.reduce(m)


def _matrix_to_images(m: np.ndarray) -> list[list[int]]:
    return [[int(v) for v in m[:, i]] for i in range(m.shape[1])]


def mackey_from_json(obj, path: str = "$", ring: CoeffRing | None = None) -> MackeyC2:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected a Mackey functor object")
    for key in ("bottom", "top", "w", "res", "tr"):
        if key not in obj:
            raise SchemaError(f"{path}.{key}", "missing")
    if ring is None and "ring" in obj:
        ring = ring_from_json(obj["ring"], f"{path}.ring")
    bottom = module_from_json(obj["bottom"], f"{path}.bottom", ring)
    top = module_from_json(obj["top"], f"{path}.top", bottom.ring)
    r = bottom.ring
    b, t = bottom.ngens, top.ngens
    m = MackeyC2(
        bottom,
        top,
        _images_to_matrix(r, obj["w"], b, b, f"{path}.w"),
        _images_to_matrix(r, obj["res"], t, b, f"{path}.res"),
        _images_to_matrix(r, obj["tr"], b, t, f"{path}.tr"),
        str(obj.get("name", "")),
    )
    return m


def mackey_to_json(m: MackeyC2) -> dict:
    return {
        "name": m.name,
        "bottom": module_to_json(m.bottom),
        "top": module_to_json(m.top),
        "w": _matrix_to_images(m.w),
        "res": _matrix_to_images(m.res),
        "tr": _matrix_to_images(m.tr),
    }


def _table_from_json(ring, obj, a, b, c, path):
    if not isinstance(obj, list) or len(obj) != a:
        raise SchemaError(path, f"expected {a} rows")
    t = _empty_table(ring, a, b, c)
    for i, row in enumerate(obj):
        int_matrix_from_json(row, b, c, f"{path}[{i}]")
        for j, v in enumerate(row):
            t[i, j] = v
    return ring.reduce(t)


def _table_to_json(t: np.ndarray) -> list:
    return [[[int(v) for v in t[i, j]] for j in range(t.shape[1])] for i in range(t.shape[0])]


def _vec_from_json(ring, obj, n, path):
    int_matrix_from_json([obj] if isinstance(obj, list) else obj, 1, n, path)
    v = ring.zeros(n, 1)[:, 0]
    v[:] = obj
    return ring.reduce(v)


def green_from_json(obj, path: str = "$") -> GreenC2:
    m = mackey_from_json(obj, path)
    r = m.ring
    for key in ("bottom_mul", "top_mul", "unit"):
        if key not in obj:
            raise SchemaError(f"{path}.{key}", "missing")
    b, t = m.bottom.ngens, m.top.ngens
    g = GreenC2(
        m,
        Pairing(m, m, m, _table_from_json(r, obj["bottom_mul"], b, b, b, f"{path}.bottom_mul"), _table_from_json(r, obj["top_mul"], t, t, t, f"{path}.top_mul")),
        _vec_from_json(r, obj["unit"], t, f"{path}.unit"),
    )
    return g


def green_to_json(g: GreenC2) -> dict:
    out = mackey_to_json(g.mackey)
    out["bottom_mul"] = _table_to_json(g.mul.bottom)
    out["top_mul"] = _table_to_json(g.mul.top)
    out["unit"] = [int(v) for v in g.unit]
    return out


def esigma_from_json(obj, path: str = "$") -> ESigmaRing:
    """Either a full record or {"fixed_point": algebra} shorthand."""
    from .algebra import algebra_from_json

    if isinstance(obj, dict) and "fixed_point" in obj:
        return fixed_point_esigma(algebra_from_json(obj["fixed_point"], f"{path}.fixed_point"))
    m = mackey_from_json(obj, path)
    r = m.ring
    b, t = m.bottom.ngens, m.top.ngens
    for key in ("bottom_mul", "unit", "psi_L", "psi_R"):
        if key not in obj:
            raise SchemaError(f"{path}.{key}", "missing")
    return ESigmaRing(
        m,
        _table_from_json(r, obj["bottom_mul"], b, b, b, f"{path}.bottom_mul"),
        _vec_from_json(r, obj["unit"], t, f"{path}.unit"),
        _table_from_json(r, obj["psi_L"], b, t, t, f"{path}.psi_L"),
        _table_from_json(r, obj["psi_R"], t, b, t, f"{path}.psi_R"),
        str(obj.get("name", "")),
    )


def esigma_to_json(e: ESigmaRing) -> dict:
    out = mackey_to_json(e.m)
    out["name"] = e.name
    out["bottom_mul"] = _table_to_json(e.mul)
    out["unit"] = [int(v) for v in e.unit]
    out["psi_L"] = _table_to_json(e.psi_L)
    out["psi_R"] = _table_to_json(e.psi_R)
    return out


def validate(x) -> list[str]:
    """Violated axioms for a MackeyC2, GreenC2 or ESigmaRing."""
    if isinstance(x, (MackeyC2, GreenC2, ESigmaRing)):
        return x.check()
    raise TypeError(f"cannot validate {type(x).__name__}")
