"""Bar-type simplicial objects: Hochschild, dihedral, two-sided, Real and twisted.

Chain-level bars are ``BarObject``s whose levels are tensor powers with
faces built slotwise by ``multilinear_matrix``.  Mackey-level bars are
``MackeyBar``s whose levels are iterated box products.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import (
    Bimodule,
    FinAlgebra,
    Refusal,
    SignFn,
    Slot,
    automorphism_order,
    check_bimodule,
    koszul_sign,
    multilinear_matrix,
    no_sign,
    regular_bimodule,
    tensor_degrees,
    _deg_parity,
)
from .linalg import ChainComplex, CoeffRing, FgModule, Homology, induced_map_on_homology
from .mackey import (
    BoxData,
    ESigmaRing,
    GreenC2,
    MackeyC2,
    MackeyMap,
    MSlot,
    Pairing,
    box_many,
    box_map,
    fixed_point_esigma,
    g_twist,
    norm_e_C2,
)


# ---------------------------------------------------------------------------
# Simplicial objects in modules
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BarObject:
    """Levels 0..K with faces[k][i]: k -> k-1, degens[k][j]: k -> k+1.

    ``internal[k]`` is an optional differential on level k lowering internal
    degree by one; ``W[k]`` an optional levelwise involution.
    """

    ring: CoeffRing
    levels: tuple[FgModule, ...]
    faces: tuple[tuple[np.ndarray, ...], ...]
    degens: tuple[tuple[np.ndarray, ...], ...]
    W: tuple[np.ndarray, ...] | None = None
    internal: tuple[np.ndarray, ...] | None = None
    name: str = ""

    @property
    def cap(self) -> int:
        return len(self.levels) - 1

    def d(self, k: int, i: int) -> np.ndarray:
        return self.faces[k][i]

    def s(self, k: int, j: int) -> np.ndarray:
        return self.degens[k][j]

    def check(self) -> list[str]:
        r, L, out = self.ring, self.levels, []
        mm = r.matmul
        eq = lambda k, a, b: L[k].equal(a, b)
        K = self.cap
        for k in range(2, K + 1):
            for j in range(k + 1):
                for i in range(j):
                    if not eq(k - 2, mm(self.d(k - 1, i), self.d(k, j)), mm(self.d(k - 1, j - 1), self.d(k, i))):
                        out.append(f"d_{i} d_{j} ≠ d_{j-1} d_{i} at level {k}")
        for k in range(0, K):
            ident = r.eye(L[k].ngens)
            for j in range(k + 1):
                sj = self.s(k, j)
                for i in range(k + 2):
                    lhs = mm(self.d(k + 1, i), sj)
                    if i < j:
                        rhs = mm(self.s(k - 1, j - 1), self.d(k, i))
                    elif i in (j, j + 1):
                        rhs = ident
                    else:
                        rhs = mm(self.s(k - 1, j), self.d(k, i - 1))
                    if not eq(k, lhs, rhs):
                        out.append(f"d_{i} s_{j} identity fails at level {k}")
            if k + 2 <= K:
                for i in range(k + 1):
                    for j in range(i, k + 1):
                        if not eq(k + 2, mm(self.s(k + 1, i), self.s(k, j)), mm(self.s(k + 1, j + 1), self.s(k, i))):
                            out.append(f"s_{i} s_{j} ≠ s_{j+1} s_{i} at level {k}")
        if self.W is not None:
            out += self._check_real()
        if self.internal is not None:
            out += self._check_internal()
        return out

    def _check_real(self) -> list[str]:
        r, L, W, out = self.ring, self.levels, self.W, []
        mm = r.matmul
        for k in range(self.cap + 1):
            if not L[k].equal(mm(W[k], W[k]), r.eye(L[k].ngens)):
                out.append(f"W∘W ≠ id at level {k}")
            if k >= 1:
                for i in range(k + 1):
                    if not L[k - 1].equal(mm(self.d(k, i), W[k]), mm(W[k - 1], self.d(k, k - i))):
                        out.append(f"d_{i} W ≠ W d_{k-i} at level {k}")
            if k < self.cap:
                for i in range(k + 1):
                    if not L[k + 1].equal(mm(self.s(k, i), W[k]), mm(W[k + 1], self.s(k, k - i))):
                        out.append(f"s_{i} W ≠ W s_{k-i} at level {k}")
        return out

    def _check_internal(self) -> list[str]:
        r, L, D, out = self.ring, self.levels, self.internal, []
        mm = r.matmul
        for k in range(self.cap + 1):
            if not L[k].is_zero(mm(D[k], D[k])):
                out.append(f"internal d² ≠ 0 at level {k}")
            if k >= 1:
                for i in range(k + 1):
                    if not L[k - 1].equal(mm(self.d(k, i), D[k]), mm(D[k - 1], self.d(k, i))):
                        out.append(f"d_{i} does not commute with the internal differential at level {k}")
        return out

    def moore_differential(self, k: int) -> np.ndarray:
        r = self.ring
        acc = r.zeros(self.levels[k - 1].ngens, self.levels[k].ngens)
        for i, f in enumerate(self.faces[k]):
            acc = acc + f if i % 2 == 0 else acc - f
        return r.reduce(acc)

    def moore(self, check: bool = True) -> ChainComplex:
        objs = dict(enumerate(self.levels))
        diffs = {k: self.moore_differential(k) for k in range(1, self.cap + 1)}
        return ChainComplex(self.ring, objs, diffs, check=check)

    def homology(self, n: int) -> Homology:
        if n > self.cap - 1:
            raise ValueError(f"degree {n} is outside the trust window 0..{self.cap - 1}")
        return self.moore(check=False).homology(n)

    def truncate(self, K: int) -> "BarObject":
        return BarObject(
            self.ring,
            self.levels[: K + 1],
            self.faces[: K + 1],
            self.degens[:K],
            None if self.W is None else self.W[: K + 1],
            None if self.internal is None else self.internal[: K + 1],
            self.name,
        )


def graded_ranks(h: FgModule) -> dict:
    """degree -> (rank, torsion) for a graded homology module."""
    out = {}
    for deg, idx in h.degree_blocks().items():
        out[0 if deg is None else deg] = h.submodule_block(idx).with_degrees(None).invariants()
    return out


# ---------------------------------------------------------------------------
# Tensor-power helpers
# ---------------------------------------------------------------------------


MAX_LEVEL_RANK = 12000


def _level_module(ring: CoeffRing, degs: Sequence[Sequence]) -> FgModule:
    dims = [len(d) for d in degs]
    n = int(np.prod(dims, dtype=np.int64)) if dims else 1
    if n > MAX_LEVEL_RANK:
        raise Refusal(f"a bar level has rank {n} > {MAX_LEVEL_RANK}; lower the cap")
    graded = any(any(x != 0 for x in d) for d in degs)
    return FgModule.free(ring, n, tensor_degrees(degs) if graded else None)


def tensor_differential(ring: CoeffRing, degs: Sequence[Sequence], diffs: Sequence[np.ndarray | None]) -> np.ndarray:
    """Leibniz extension of slotwise differentials with the Koszul sign."""
    dims = [len(d) for d in degs]
    n = int(np.prod(dims, dtype=np.int64)) if dims else 1
    out = ring.zeros(n, n)
    for pos, dm in enumerate(diffs):
        if dm is None or not np.any(dm != 0):
            continue
        plan = [Slot.map(i, dm if i == pos else ring.eye(dims[i])) for i in range(len(dims))]
        m = multilinear_matrix(ring, dims, dims, plan)
        # sign (-1)^{sum of degrees before pos}, applied per source column
        for col, idx in enumerate(itertools.product(*[range(d) for d in dims])):
            par = sum(_deg_parity(degs[i][idx[i]]) for i in range(pos)) % 2
            if par:
                m[:, col] = -m[:, col]
        out = out + m
    return ring.reduce(out)


def _ids(ring, dims, srcs):
    return [Slot.map(i, ring.eye(dims[i])) for i in srcs]


# ---------------------------------------------------------------------------
# Hochschild and dihedral bars
# ---------------------------------------------------------------------------


def hochschild_bar(a: FinAlgebra, m: Bimodule | None = None, cap: int = 3, sign: SignFn = koszul_sign, involution: bool = False) -> BarObject:
    """Levels m ⊗ a^{⊗k}; the last face moves a_k to the front with a sign."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    m = m or regular_bimodule(a)
    r = a.ring
    levels, faces, degens, Ws, ints = [], [], [], [], []
    for k in range(cap + 1):
        degs = [m.degs()] + [a.degs()] * k
        dims = [m.dim] + [a.dim] * k
        levels.append(_level_module(r, degs))
        fk = []
        if k >= 1:
            for i in range(k + 1):
                if i == 0:
                    plan = [Slot.pair(0, 1, m.right)] + _ids(r, dims, range(2, k + 1))
                elif i < k:
                    plan = _ids(r, dims, range(i)) + [Slot.pair(i, i + 1, a.mul)] + _ids(r, dims, range(i + 2, k + 1))
                else:
                    plan = [Slot.pair(k, 0, m.left)] + _ids(r, dims, range(1, k))
                fk.append(multilinear_matrix(r, dims, dims[:-1], plan, degs, sign))
        faces.append(tuple(fk))
        if k < cap:
            sk = []
            for j in range(k + 1):
                plan = _ids(r, dims, range(j + 1)) + [Slot.unit(a.unit)] + _ids(r, dims, range(j + 1, k + 1))
                sk.append(multilinear_matrix(r, dims, dims + [a.dim], plan, degs, sign))
            degens.append(tuple(sk))
        if involution:
            plan = [Slot.map(0, m.sigma)] + [Slot.map(k + 1 - j, a.w) for j in range(1, k + 1)]
            Ws.append(multilinear_matrix(r, dims, dims, plan, degs, sign))
        if a.diff is not None:
            ints.append(tensor_differential(r, degs, [a.diff if m is None or m.algebra is a and m.dim == a.dim else None] + [a.diff] * k))
    return BarObject(r, tuple(levels), tuple(faces), tuple(degens), tuple(Ws) if involution else None, tuple(ints) if a.diff is not None else None, f"B({a.name})")


def hh_complex(a: FinAlgebra, m: Bimodule | None = None, cap: int = 3, sign: SignFn = koszul_sign) -> ChainComplex:
    """The standard Hochschild complex m ⊗ a^{⊗k}, k ≤ cap (trust window ≤ cap − 1)."""
    return hochschild_bar(a, m, cap, sign).moore()


def hh_homology(a: FinAlgebra, m: Bimodule | None = None, cap: int = 3, degrees: Sequence[int] | None = None, sign: SignFn = koszul_sign) -> dict[int, FgModule]:
    c = hh_complex(a, m, cap, sign)
    degrees = range(cap) if degrees is None else degrees
    return {n: c.homology(n).module for n in degrees if n <= cap - 1}


def dihedral_bar(a: FinAlgebra, m: Bimodule | None = None, cap: int = 3, sign: SignFn = koszul_sign) -> BarObject:
    """Hochschild bar with W = σ ⊗ w^{⊗k} composed with reversal of the a-factors."""
    if a.w is None:
        raise ValueError("dihedral bar needs an anti-involution w")
    m = m or regular_bimodule(a)
    if m.sigma is None:
        raise ValueError("dihedral bar needs an involution σ on the bimodule")
    problems = check_bimodule(m, sign)
    if problems:
        raise ValueError("bimodule involution incompatible: " + "; ".join(problems))
    bar = hochschild_bar(a, m, cap, sign, involution=True)
    problems = bar.check()
    if problems:
        raise ValueError("dihedral bar fails: " + "; ".join(problems[:3]))
    return bar


def enveloping_tables(a: FinAlgebra) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Product on a ⊗ a^op and its right and left actions on a (ungraded sign rules)."""
    d = a.dim
    r = a.ring
    dt = object if r.dtype is object else np.int64
    prod = np.zeros((d * d, d * d, d * d), dtype=dt)
    right = np.zeros((d, d * d, d), dtype=dt)
    left = np.zeros((d * d, d, d), dtype=dt)
    for u, v in itertools.product(range(d), repeat=2):
        eu, ev = a.basis(u), a.basis(v)
        for c, e in itertools.product(range(d), repeat=2):
            ac = a.product(eu, a.basis(c))
            eb = a.product(a.basis(e), ev)
            prod[u * d + v, c * d + e] = np.outer(ac, eb).reshape(-1)
        for x in range(d):
            ex = a.basis(x)
            right[x, u * d + v] = a.product(a.product(ev, ex), eu)
            left[u * d + v, x] = a.product(a.product(eu, ex), ev)
    return r.reduce(prod), r.reduce(right), r.reduce(left)


def two_sided_bar(a: FinAlgebra, cap: int = 3) -> BarObject:
    """B(a, a ⊗ a^op, a): levels a ⊗ (a ⊗ a^op)^{⊗k} ⊗ a."""
    r = a.ring
    if any(_deg_parity(x) for x in a.degs()) and r.p != 2:
        raise Refusal("two-sided bar with odd generators is only modelled in characteristic 2")
    prod, right, left = enveloping_tables(a)
    d = a.dim
    edeg = tensor_degrees([a.degs(), a.degs()])
    unit_e = np.outer(a.unit, a.unit).reshape(-1)
    levels, faces, degens, ints = [], [], [], []
    for k in range(cap + 1):
        degs = [a.degs()] + [edeg] * k + [a.degs()]
        dims = [d] + [d * d] * k + [d]
        levels.append(_level_module(r, degs))
        fk = []
        if k >= 1:
            for i in range(k + 1):
                if i == 0:
                    plan = [Slot.pair(0, 1, right)] + _ids(r, dims, range(2, k + 2))
                elif i < k:
                    plan = _ids(r, dims, range(i)) + [Slot.pair(i, i + 1, prod)] + _ids(r, dims, range(i + 2, k + 2))
                else:
                    plan = _ids(r, dims, range(k)) + [Slot.pair(k, k + 1, left)]
                fk.append(multilinear_matrix(r, dims, [d] + [d * d] * (k - 1) + [d], plan))
        faces.append(tuple(fk))
        if k < cap:
            sk = []
            for j in range(k + 1):
                plan = _ids(r, dims, range(j + 1)) + [Slot.unit(unit_e)] + _ids(r, dims, range(j + 1, k + 2))
                sk.append(multilinear_matrix(r, dims, [d] + [d * d] * (k + 1) + [d], plan))
            degens.append(tuple(sk))
        if a.diff is not None:
            ediff = tensor_differential(r, [a.degs(), a.degs()], [a.diff, a.diff])
            ints.append(tensor_differential(r, degs, [a.diff] + [ediff] * k + [a.diff]))
    return BarObject(r, tuple(levels), tuple(faces), tuple(degens), None, tuple(ints) if a.diff is not None else None, f"B({a.name},{a.name}e,{a.name})")


# ---------------------------------------------------------------------------
# Twisted cyclic bars
# ---------------------------------------------------------------------------


def twisted_cyclic_bar(r: FinAlgebra, g: np.ndarray | None = None, cap: int = 3, sign: SignFn = koszul_sign) -> BarObject:
    """Levels r^{⊗(k+1)}; the last face wraps a_k to the front, applies g, multiplies."""
    ring = r.ring
    g = ring.eye(r.dim) if g is None else g
    automorphism_order(r, g)
    if r.diff is not None and not ring.is_zero_matrix(ring.matmul(g, r.diff) - ring.matmul(r.diff, g)):
        raise ValueError("g does not commute with the differential")
    d = r.dim
    gmul = np.zeros_like(r.mul)
    for i in range(d):
        for j in range(d):
            gmul[i, j] = r.product(g[:, i], r.basis(j))
    m = Bimodule(r, d, gmul, r.mul, r.degrees)
    bar = hochschild_bar(r, m, cap, sign)
    return BarObject(ring, bar.levels, bar.faces, bar.degens, None, bar.internal, f"Bcy_g({r.name})")


def twisted_cyclic_complex(r: FinAlgebra, g: np.ndarray | None = None, cap: int = 3, sign: SignFn = koszul_sign) -> ChainComplex:
    return twisted_cyclic_bar(r, g, cap, sign).moore()


# ---------------------------------------------------------------------------
# Mackey-valued bars
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MackeyBar:
    """A simplicial object in MackeyC2 whose levels are box products."""

    levels: tuple[BoxData, ...]
    faces: tuple[tuple[MackeyMap, ...], ...]
    degens: tuple[tuple[MackeyMap, ...], ...]
    name: str = ""

    @property
    def cap(self) -> int:
        return len(self.levels) - 1

    @property
    def ring(self) -> CoeffRing:
        return self.levels[0].mackey.ring

    def level(self, k: int) -> MackeyC2:
        return self.levels[k].mackey

    def part(self, which: str) -> BarObject:
        """The bottom or top level as a simplicial module."""
        get = (lambda f: f.bottom) if which == "bottom" else (lambda f: f.top)
        mods = tuple((lv.mackey.bottom if which == "bottom" else lv.mackey.top) for lv in self.levels)
        return BarObject(
            self.ring,
            mods,
            tuple(tuple(get(f) for f in fk) for fk in self.faces),
            tuple(tuple(get(s) for s in sk) for sk in self.degens),
            None,
            None,
            f"{self.name}[{which}]",
        )

    def check(self) -> list[str]:
        out = []
        for k, fk in enumerate(self.faces):
            for i, f in enumerate(fk):
                out += [f"d_{i} at level {k}: {p}" for p in f.check()]
        for k, sk in enumerate(self.degens):
            for j, s in enumerate(sk):
                out += [f"s_{j} at level {k}: {p}" for p in s.check()]
        out += [f"bottom: {p}" for p in self.part("bottom").check()]
        out += [f"top: {p}" for p in self.part("top").check()]
        return out

    def homology(self, n: int) -> MackeyC2:
        """Moore homology with induced res, tr and w."""
        if n > self.cap - 1:
            raise ValueError(f"degree {n} is outside the trust window 0..{self.cap - 1}")
        cb = self.part("bottom").moore(check=False)
        ct = self.part("top").moore(check=False)
        ks = range(self.cap + 1)
        w = induced_map_on_homology({k: self.level(k).w for k in ks}, cb, cb, n)
        res = induced_map_on_homology({k: self.level(k).res for k in ks}, ct, cb, n)
        tr = induced_map_on_homology({k: self.level(k).tr for k in ks}, cb, ct, n)
        return MackeyC2(w.source, res.source, w.matrix, res.matrix, tr.matrix, f"H_{n}({self.name})")


def _mackey_bar(factor_lists, face_plans, degen_plans, sign, name) -> MackeyBar:
    levels = tuple(box_many(fs) for fs in factor_lists)
    faces = [()]
    for k in range(1, len(levels)):
        faces.append(tuple(box_map(levels[k], levels[k - 1], plan, sign) for plan in face_plans(k)))
    degens = []
    for k in range(len(levels) - 1):
        degens.append(tuple(box_map(levels[k], levels[k + 1], plan, sign) for plan in degen_plans(k)))
    return MackeyBar(levels, tuple(faces), tuple(degens), name)


def hr_bar(e: ESigmaRing, cap: int = 3, sign: SignFn = no_sign) -> MackeyBar:
    """Two-sided bar of the norm acting on e.m from both sides; level k = m □ N^{□k} □ m."""
    problems = e.check()
    if problems:
        raise ValueError("invalid E_sigma ring: " + "; ".join(problems[:3]))
    N = e.norm.green
    pl, pr = e.pairings
    m = e.m
    nunit = N.unit

    def faces(k):
        out = []
        for i in range(k + 1):
            if i == 0:
                out.append([MSlot.pair(0, 1, pr)] + [MSlot.ident(j) for j in range(2, k + 2)])
            elif i < k:
                out.append([MSlot.ident(j) for j in range(i)] + [MSlot.pair(i, i + 1, N.mul)] + [MSlot.ident(j) for j in range(i + 2, k + 2)])
            else:
                out.append([MSlot.ident(j) for j in range(k)] + [MSlot.pair(k, k + 1, pl)])
        return out

    def degens(k):
        return [[MSlot.ident(j) for j in range(i + 1)] + [MSlot.unit(N.mackey, nunit)] + [MSlot.ident(j) for j in range(i + 1, k + 2)] for i in range(k + 1)]

    factor_lists = [[m] + [N.mackey] * k + [m] for k in range(cap + 1)]
    return _mackey_bar(factor_lists, faces, degens, sign, f"HR({e.name})")


def hr_homology(e: ESigmaRing, n: int, cap: int | None = None) -> MackeyC2:
    return hr_bar(e, cap if cap is not None else n + 1).homology(n)


def flatness_certificate(bar: MackeyBar) -> bool:
    """Heuristic: every level is free at both Mackey levels over a field."""
    if not bar.ring.is_field:
        return False
    return all(lv.mackey.bottom.rels.shape[1] == 0 and lv.mackey.top.rels.shape[1] == 0 for lv in bar.levels)


def hr_bar_graded(e: ESigmaRing, cap: int = 3, sign: SignFn = koszul_sign) -> MackeyBar:
    """Graded HR bar; refuses when the Künneth step is not certified."""
    if not e.ring.is_field:
        raise Refusal(f"graded HR over {e.ring.name} refused: flatness surrogate (levelwise free over a field) unavailable")
    bar = hr_bar(e, cap, sign)
    if not flatness_certificate(bar):
        raise Refusal("graded HR refused: a level is not free, so flatness cannot be certified")
    return bar


def twisted_nerve_green(R: GreenC2, cap: int = 3, sign: SignFn = no_sign) -> MackeyBar:
    """Levels ᵍR □ R^{□k}; the last face rotates R_k to the front and acts through the twist."""
    problems = R.check()
    if problems:
        raise ValueError("invalid Green functor: " + "; ".join(problems[:3]))
    twisted = g_twist(R, R.mul)

    def faces(k):
        out = []
        for i in range(k):
            out.append([MSlot.ident(j) for j in range(i)] + [MSlot.pair(i, i + 1, R.mul)] + [MSlot.ident(j) for j in range(i + 2, k + 1)])
        out.append([MSlot.pair(k, 0, twisted)] + [MSlot.ident(j) for j in range(1, k)])
        return out

    def degens(k):
        return [[MSlot.ident(j) for j in range(i + 1)] + [MSlot.unit(R.mackey, R.unit)] + [MSlot.ident(j) for j in range(i + 1, k + 1)] for i in range(k + 1)]

    return _mackey_bar([[R.mackey] * (k + 1) for k in range(cap + 1)], faces, degens, sign, "Bcy_g")


def graded_twisted_nerve(R: GreenC2, convention: SignFn = koszul_sign, cap: int = 3) -> MackeyBar:
    """As twisted_nerve_green; the rotation carries the convention's sign."""
    return twisted_nerve_green(R, cap, convention)


def hh_rel_e(r: FinAlgebra, cap: int = 3) -> MackeyBar:
    """Twisted nerve of the norm of r, twisted by its Weyl action."""
    if r.w is None:
        raise ValueError("hh_rel_e needs an anti-involution")
    problems = r.check()
    if problems:
        raise ValueError("w fails: " + "; ".join(problems[:3]))
    N = norm_e_C2(r.module(), r.w, r.mul, r.unit).green
    return twisted_nerve_green(N, cap)


def constant_green(a: FinAlgebra) -> GreenC2:
    """Commutative a with trivial Weyl action: both levels a, res = id, tr = 2."""
    from .mackey import Pairing as _P

    r = a.ring
    B = a.module()
    m = MackeyC2(B, B, r.eye(a.dim), r.eye(a.dim), r.reduce(2 * r.eye(a.dim)), f"const({a.name})")
    return GreenC2(m, _P(m, m, m, a.mul, a.mul), a.unit.copy())
