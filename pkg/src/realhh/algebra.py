"""Finite algebras, bimodules and multilinear maps between tensor powers.

Structure constants are stored as arrays ``mul[i, j, :]`` giving the
coordinates of ``e_i * e_j``.  Linear maps are matrices acting on columns.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .linalg import CoeffRing, FgModule, SchemaError, int_matrix_from_json, ring_from_json, solve, span_basis, kernel

Degree = int | tuple
SignFn = Callable[[Degree, Degree], int]


class Refusal(Exception):
    """A computation declined because a precondition (field, flatness) fails."""


def _deg_parity(d) -> int:
    if d is None:
        return 0
    if isinstance(d, tuple):
        return d[0] % 2 if d else 0
    return d % 2


def koszul_sign(a, b) -> int:
    """(-1)^{|a||b|} on the first coordinate of the degree."""
    return -1 if _deg_parity(a) and _deg_parity(b) else 1


def no_sign(a, b) -> int:
    return 1


def add_deg(a, b):
    if a is None:
        return b
    if b is None:
        return a
    if isinstance(a, tuple):
        return tuple(x + y for x, y in zip(a, b))
    return a + b


def zero_deg_like(d):
    if isinstance(d, tuple):
        return tuple(0 for _ in d)
    return 0


# ---------------------------------------------------------------------------
# Multilinear maps on tensor products of free modules
# ---------------------------------------------------------------------------


def _col_dicts(mat: np.ndarray) -> list[dict[int, int]]:
    out = []
    for j in range(mat.shape[1]):
        col = mat[:, j]
        nz = np.flatnonzero(col != 0)
        out.append({int(i): int(col[i]) for i in nz})
    return out


def _table_dicts(t: np.ndarray) -> list[list[dict[int, int]]]:
    out = []
    for i in range(t.shape[0]):
        row = []
        for j in range(t.shape[1]):
            v = t[i, j]
            nz = np.flatnonzero(v != 0)
            row.append({int(k): int(v[k]) for k in nz})
        out.append(row)
    return out


@dataclass(frozen=True)
class Slot:
    """One target slot: a map of one source slot, a pairing of two, or a constant."""

    kind: str  # "map" | "pair" | "unit"
    sources: tuple[int, ...]
    data: object  # matrix, 3-tensor or vector

    @staticmethod
    def map(i: int, m: np.ndarray) -> "Slot":
        return Slot("map", (i,), m)

    @staticmethod
    def pair(i: int, j: int, t: np.ndarray) -> "Slot":
        return Slot("pair", (i, j), t)

    @staticmethod
    def unit(v: np.ndarray) -> "Slot":
        return Slot("unit", (), v)


def multilinear_matrix(
    ring: CoeffRing,
    src_dims: Sequence[int],
    tgt_dims: Sequence[int],
    plan: Sequence[Slot],
    src_degrees: Sequence[Sequence] | None = None,
    sign: SignFn = no_sign,
) -> np.ndarray:
    """Matrix of the multilinear map described by ``plan`` on basis tuples.

    Source slot order versus the order in which the plan consumes slots
    determines the Koszul-type sign via ``sign``.
    """
    if len(plan) != len(tgt_dims):
        raise ValueError("plan length differs from target slot count")
    used = [i for s in plan for i in s.sources]
    if sorted(used) != list(range(len(src_dims))):
        raise ValueError(f"plan must use every source slot once, uses {used}")
    comps = []
    for s in plan:
        if s.kind == "map":
            comps.append(_col_dicts(s.data))
        elif s.kind == "pair":
            comps.append(_table_dicts(s.data))
        else:
            v = np.asarray(s.data).reshape(-1)
            comps.append({int(k): int(v[k]) for k in np.flatnonzero(v != 0)})
    inversions = [(a, b) for ia, a in enumerate(used) for b in used[ia + 1 :] if a > b]
    nt = int(np.prod(tgt_dims, dtype=object)) if tgt_dims else 1
    ns = int(np.prod(src_dims, dtype=object)) if src_dims else 1
    out = ring.zeros(nt, ns)
    need_sign = bool(inversions) and src_degrees is not None and sign is not no_sign
    for col, idx in enumerate(itertools.product(*[range(d) for d in src_dims])):
        acc = {0: 1}
        for s, comp, dim in zip(plan, comps, tgt_dims):
            if s.kind == "map":
                v = comp[idx[s.sources[0]]]
            elif s.kind == "pair":
                v = comp[idx[s.sources[0]]][idx[s.sources[1]]]
            else:
                v = comp
            if not v:
                acc = {}
                break
            acc = {a * dim + k: c * x for a, c in acc.items() for k, x in v.items()}
        if not acc:
            continue
        sgn = 1
        if need_sign:
            for a, b in inversions:
                sgn *= sign(src_degrees[a][idx[a]], src_degrees[b][idx[b]])
        for k, c in acc.items():
            out[k, col] += sgn * c
    return ring.reduce(out)


def tensor_degrees(degs: Sequence[Sequence]) -> tuple:
    if not degs:
        return (0,)
    out = []
    for combo in itertools.product(*degs):
        d = combo[0]
        for e in combo[1:]:
            d = add_deg(d, e)
        out.append(d)
    return tuple(out)


def kron_all(ring: CoeffRing, mats: Sequence[np.ndarray]) -> np.ndarray:
    out = ring.eye(1)
    for m in mats:
        out = ring.reduce(np.kron(out, m)) if out.dtype != object else _kron_obj(out, m)
    return out


def _kron_obj(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.empty((ra * rb, ca * cb), dtype=object)
    for i in range(ra):
        for j in range(ca):
            out[i * rb : (i + 1) * rb, j * cb : (j + 1) * cb] = a[i, j] * b
    return out


def permutation_matrix(ring: CoeffRing, dims: Sequence[int], order: Sequence[int], degrees=None, sign: SignFn = no_sign) -> np.ndarray:
    """Reorder tensor factors: target slot t holds source slot order[t]."""
    eyes = [ring.eye(dims[i]) for i in order]
    plan = [Slot.map(i, e) for i, e in zip(order, eyes)]
    return multilinear_matrix(ring, dims, [dims[i] for i in order], plan, degrees, sign)


# ---------------------------------------------------------------------------
# Finite algebras
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FinAlgebra:
    """A finite free algebra over ``ring`` with optional anti-involution and differential."""

    ring: CoeffRing
    names: tuple[str, ...]
    mul: np.ndarray  # (d, d, d)
    unit: np.ndarray  # (d,)
    degrees: tuple | None = None
    w: np.ndarray | None = None  # (d, d), columns are images
    diff: np.ndarray | None = None  # (d, d), lowers degree by one
    name: str = ""

    @property
    def dim(self) -> int:
        return len(self.names)

    def deg(self, i: int):
        return 0 if self.degrees is None else self.degrees[i]

    def degs(self) -> tuple:
        return tuple(self.deg(i) for i in range(self.dim))

    def product(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        t = np.tensordot(np.tensordot(self.mul, y, axes=([1], [0])), x, axes=([0], [0]))
        return self.ring.reduce(np.asarray(t, dtype=self.mul.dtype))

    def basis(self, i: int) -> np.ndarray:
        v = self.ring.zeros(self.dim, 1)[:, 0]
        v[i] = 1
        return v

    def check(self, sign: SignFn = koszul_sign) -> list[str]:
        out = []
        r, d = self.ring, self.dim
        if self.mul.shape != (d, d, d):
            return [f"mul has shape {self.mul.shape}, expected {(d, d, d)}"]
        if self.unit.shape != (d,):
            return ["unit has the wrong length"]
        if self.degrees is not None:
            for i in range(d):
                for j in range(d):
                    for k in np.flatnonzero(self.mul[i, j] % (r.p or 1 << 62) != 0) if r.p else np.flatnonzero(self.mul[i, j] != 0):
                        if self.deg(k) != add_deg(self.deg(i), self.deg(j)):
                            out.append(f"product {self.names[i]}*{self.names[j]} is not homogeneous")
        for i in range(d):
            ei = self.basis(i)
            if np.any(r.reduce(self.product(self.unit, ei) - ei) != 0) or np.any(r.reduce(self.product(ei, self.unit) - ei) != 0):
                out.append(f"unit fails on {self.names[i]}")
            for j in range(d):
                ej = self.basis(j)
                for k in range(d):
                    ek = self.basis(k)
                    lhs = self.product(self.product(ei, ej), ek)
                    rhs = self.product(ei, self.product(ej, ek))
                    if np.any(r.reduce(lhs - rhs) != 0):
                        out.append(f"associativity fails on ({self.names[i]},{self.names[j]},{self.names[k]})")
        if self.w is not None:
            out += self._check_w(sign)
        if self.diff is not None:
            out += self._check_diff(sign)
        return out

    def _check_w(self, sign) -> list[str]:
        out = []
        r, w = self.ring, self.w
        if np.any(r.reduce(r.matmul(w, w) - r.eye(self.dim)) != 0):
            out.append("w is not an involution")
        for i in range(self.dim):
            for j in range(self.dim):
                lhs = r.matmul(w, self.mul[i, j].reshape(-1, 1))[:, 0]
                rhs = sign(self.deg(i), self.deg(j)) * self.product(w[:, j], w[:, i])
                if np.any(r.reduce(lhs - rhs) != 0):
                    out.append(f"w(xy) != w(y)w(x) on ({self.names[i]},{self.names[j]})")
        if np.any(r.reduce(r.matmul(w, self.unit.reshape(-1, 1))[:, 0] - self.unit) != 0):
            out.append("w does not fix the unit")
        return out

    def _check_diff(self, sign) -> list[str]:
        out = []
        r, dm = self.ring, self.diff
        if np.any(r.matmul(dm, dm) != 0):
            out.append("d^2 != 0")
        for i in range(self.dim):
            for j in range(self.dim):
                lhs = r.matmul(dm, self.mul[i, j].reshape(-1, 1))[:, 0]
                s = -1 if _deg_parity(self.deg(i)) else 1
                rhs = self.product(dm[:, i], self.basis(j)) + s * self.product(self.basis(i), dm[:, j])
                if np.any(r.reduce(lhs - rhs) != 0):
                    out.append(f"Leibniz rule fails on ({self.names[i]},{self.names[j]})")
        if self.w is not None and np.any(r.reduce(r.matmul(dm, self.w) - r.matmul(self.w, dm)) != 0):
            out.append("d does not commute with w")
        return out

    def with_(self, **kw) -> "FinAlgebra":
        fields = dict(ring=self.ring, names=self.names, mul=self.mul, unit=self.unit, degrees=self.degrees, w=self.w, diff=self.diff, name=self.name)
        fields.update(kw)
        return FinAlgebra(**fields)

    def module(self) -> FgModule:
        return FgModule.free(self.ring, self.dim, self.degrees)


def algebra_from_table(ring: CoeffRing, names: Sequence[str], products: dict[tuple[str, str], dict[str, int]], unit: str, degrees=None, w=None, diff=None, name: str = "") -> FinAlgebra:
    """Build structure constants from a sparse product table keyed by names."""
    idx = {n: k for k, n in enumerate(names)}
    d = len(names)
    mul = np.zeros((d, d, d), dtype=object if ring.dtype is object else np.int64)
    for (a, b), res in products.items():
        for c, v in res.items():
            mul[idx[a], idx[b], idx[c]] += v
    u = ring.zeros(d, 1)[:, 0]
    u[idx[unit]] = 1
    mul = ring.reduce(mul)

    def mat(spec):
        if spec is None:
            return None
        m = ring.zeros(d, d)
        for a, res in spec.items():
            for c, v in res.items():
                m[idx[c], idx[a]] += v
        return ring.reduce(m)

    return FinAlgebra(ring, tuple(names), mul, u, None if degrees is None else tuple(degrees), mat(w), mat(diff), name)


def ground_field(ring: CoeffRing) -> FinAlgebra:
    return algebra_from_table(ring, ["1"], {("1", "1"): {"1": 1}}, "1", w={"1": {"1": 1}}, name="k")


def dual_numbers(ring: CoeffRing, x_degree: int = 0) -> FinAlgebra:
    """k[x]/x^2 with trivial involution."""
    return algebra_from_table(
        ring,
        ["1", "x"],
        {("1", "1"): {"1": 1}, ("1", "x"): {"x": 1}, ("x", "1"): {"x": 1}},
        "1",
        degrees=None if x_degree == 0 else [0, x_degree],
        w={"1": {"1": 1}, "x": {"x": 1}},
        name="k[x]/x^2",
    )


def group_algebra_c2(ring: CoeffRing) -> FinAlgebra:
    """k[C2] with the inversion involution (g^-1 = g)."""
    return algebra_from_table(
        ring,
        ["1", "g"],
        {("1", "1"): {"1": 1}, ("1", "g"): {"g": 1}, ("g", "1"): {"g": 1}, ("g", "g"): {"1": 1}},
        "1",
        w={"1": {"1": 1}, "g": {"g": 1}},
        name="k[C2]",
    )


def gaussian_like(ring: CoeffRing) -> FinAlgebra:
    """k[i]/(i^2+1) with the sign involution i -> -i."""
    return algebra_from_table(
        ring,
        ["1", "i"],
        {("1", "1"): {"1": 1}, ("1", "i"): {"i": 1}, ("i", "1"): {"i": 1}, ("i", "i"): {"1": -1}},
        "1",
        w={"1": {"1": 1}, "i": {"i": -1}},
        name="k[i]",
    )


def upper_triangular(ring: CoeffRing) -> FinAlgebra:
    """2x2 upper triangular matrices on e11, e12, e22."""
    return algebra_from_table(
        ring,
        ["e11", "e12", "e22"],
        {
            ("e11", "e11"): {"e11": 1},
            ("e11", "e12"): {"e12": 1},
            ("e12", "e22"): {"e12": 1},
            ("e22", "e22"): {"e22": 1},
        },
        "e11",
        name="T2",
    ).with_(unit=_vec(ring, [1, 0, 1]))


def exterior(ring: CoeffRing) -> FinAlgebra:
    """Lambda[x] with |x| = 1, trivial involution (graded commutative)."""
    return algebra_from_table(
        ring,
        ["1", "x"],
        {("1", "1"): {"1": 1}, ("1", "x"): {"x": 1}, ("x", "1"): {"x": 1}},
        "1",
        degrees=[0, 1],
        w={"1": {"1": 1}, "x": {"x": 1}},
        name="Lambda[x]",
    )


def _vec(ring, vals):
    v = ring.zeros(len(vals), 1)[:, 0]
    for i, x in enumerate(vals):
        v[i] = x
    return ring.reduce(v)


def automorphism_order(a: FinAlgebra, g: np.ndarray, limit: int = 64) -> int:
    """Order of ``g`` after checking it is a unital algebra automorphism."""
    r = a.ring
    for i in range(a.dim):
        for j in range(a.dim):
            lhs = r.matmul(g, a.mul[i, j].reshape(-1, 1))[:, 0]
            rhs = a.product(g[:, i], g[:, j])
            if np.any(r.reduce(lhs - rhs) != 0):
                raise ValueError(f"g is not multiplicative on ({a.names[i]},{a.names[j]})")
    if np.any(r.reduce(r.matmul(g, a.unit.reshape(-1, 1))[:, 0] - a.unit) != 0):
        raise ValueError("g does not fix the unit")
    p = r.eye(a.dim)
    for n in range(1, limit + 1):
        p = r.matmul(g, p)
        if not np.any(r.reduce(p - r.eye(a.dim)) != 0):
            return n
    raise ValueError(f"g has no finite order up to {limit}")


# ---------------------------------------------------------------------------
# Bimodules
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Bimodule:
    """left[a, m, :] = a·m and right[m, a, :] = m·a; ``sigma`` optional involution."""

    algebra: FinAlgebra
    dim: int
    left: np.ndarray
    right: np.ndarray
    degrees: tuple | None = None
    sigma: np.ndarray | None = None

    def deg(self, i):
        return 0 if self.degrees is None else self.degrees[i]

    def degs(self):
        return tuple(self.deg(i) for i in range(self.dim))


def regular_bimodule(a: FinAlgebra) -> Bimodule:
    return Bimodule(a, a.dim, a.mul, a.mul, a.degrees, a.w)


def check_bimodule(m: Bimodule, sign: SignFn = koszul_sign) -> list[str]:
    a, r = m.algebra, m.algebra.ring
    out = []

    def act_l(x, v):
        return r.reduce(np.tensordot(np.tensordot(m.left, v, axes=([1], [0])), x, axes=([0], [0])))

    def act_r(v, x):
        return r.reduce(np.tensordot(np.tensordot(m.right, x, axes=([1], [0])), v, axes=([0], [0])))

    for i in range(a.dim):
        for j in range(a.dim):
            for k in range(m.dim):
                ek = np.zeros(m.dim, dtype=object if r.dtype is object else np.int64)
                ek[k] = 1
                ei, ej = a.basis(i), a.basis(j)
                if np.any(r.reduce(act_l(ei, act_l(ej, ek)) - act_l(a.product(ei, ej), ek)) != 0):
                    out.append("left action is not associative")
                if np.any(r.reduce(act_r(act_r(ek, ei), ej) - act_r(ek, a.product(ei, ej))) != 0):
                    out.append("right action is not associative")
                if np.any(r.reduce(act_r(act_l(ei, ek), ej) - act_l(ei, act_r(ek, ej))) != 0):
                    out.append("left and right actions do not commute")
    if m.sigma is not None and a.w is not None:
        s, w = m.sigma, a.w
        if np.any(r.reduce(r.matmul(s, s) - r.eye(m.dim)) != 0):
            out.append("sigma is not an involution")
        for i in range(a.dim):
            for k in range(m.dim):
                # sigma(a m) = sigma(m) w(a) and sigma(m a) = w(a) sigma(m)
                am = m.left[i, k].reshape(-1, 1)
                sgn = sign(a.deg(i), m.deg(k))
                lhs = r.matmul(s, am)[:, 0]
                rhs = sgn * act_r(s[:, k], w[:, i])
                if np.any(r.reduce(lhs - rhs) != 0):
                    out.append(f"sigma(a m) != sigma(m) w(a) at ({a.names[i]}, m{k})")
                ma = m.right[k, i].reshape(-1, 1)
                lhs = r.matmul(s, ma)[:, 0]
                rhs = sgn * act_l(w[:, i], s[:, k])
                if np.any(r.reduce(lhs - rhs) != 0):
                    out.append(f"sigma(m a) != w(a) sigma(m) at (m{k}, {a.names[i]})")
    return sorted(set(out))


# ---------------------------------------------------------------------------
# Homology algebra of a dg algebra over a field
# ---------------------------------------------------------------------------


def homology_algebra(a: FinAlgebra, maps: Sequence[np.ndarray] = ()) -> tuple[FinAlgebra, list[np.ndarray]]:
    """H(a) with induced product, unit and involution, plus induced ``maps`` (field coefficients)."""
    if a.diff is None or not np.any(a.diff != 0):
        return a.with_(diff=None), [m for m in maps]
    r = a.ring
    if not r.is_field:
        raise Refusal("homology algebra needs field coefficients")
    d = a.diff
    z = kernel(r, d)
    b = span_basis(r, d)
    # choose cycle representatives completing a basis of boundaries, degree by degree
    reps, degs = [], []
    for deg in sorted(set(a.degs()), key=lambda x: x if not isinstance(x, tuple) else x[0]):
        idx = [i for i in range(a.dim) if a.deg(i) == deg]
        if not idx:
            continue
        zb = [c for c in range(z.shape[1]) if all(z[i, c] == 0 for i in range(a.dim) if a.deg(i) != deg)]
        bb = [c for c in range(b.shape[1]) if all(b[i, c] == 0 for i in range(a.dim) if a.deg(i) != deg)]
        cur = b[:, bb] if bb else r.zeros(a.dim, 0)
        for c in zb:
            cand = r.hstack(cur, z[:, [c]])
            if len(span_basis(r, cand).T) > cur.shape[1]:
                cur = cand
                reps.append(z[:, c])
                degs.append(deg)
    h = len(reps)
    R = r.zeros(a.dim, h)
    for k, v in enumerate(reps):
        R[:, k] = v
    full = r.hstack(R, b)

    def coords(v):
        sol = solve(r, full, v.reshape(-1, 1))
        if sol is None:
            raise ValueError("element is not a cycle")
        return sol[:h, 0]

    mul = np.zeros((h, h, h), dtype=R.dtype)
    for i in range(h):
        for j in range(h):
            mul[i, j] = coords(a.product(R[:, i], R[:, j]))
    unit = coords(a.unit)
    def induced(m):
        out = r.zeros(h, h)
        for i in range(h):
            out[:, i] = coords(r.matmul(m, R[:, [i]])[:, 0])
        return out

    w = induced(a.w) if a.w is not None else None
    names = tuple(f"[{'+'.join(a.names[k] for k in np.flatnonzero(R[:, i]))}]" for i in range(h))
    alg = FinAlgebra(r, names, mul, unit, tuple(degs) if a.degrees is not None else None, w, None, f"H({a.name})")
    return alg, [induced(m) for m in maps]


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def algebra_from_json(obj, path: str = "$") -> FinAlgebra:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an algebra object")
    ring = ring_from_json(obj.get("ring"), f"{path}.ring")
    gens = obj.get("gens")
    if not isinstance(gens, list) or not gens:
        raise SchemaError(f"{path}.gens", "expected a nonempty list of {name, deg}")
    names, degs = [], []
    for i, g in enumerate(gens):
        if not isinstance(g, dict) or not isinstance(g.get("name"), str):
            raise SchemaError(f"{path}.gens[{i}]", "expected {\"name\": str, \"deg\": int}")
        names.append(g["name"])
        dg = g.get("deg", 0)
        if isinstance(dg, list):
            dg = tuple(dg)
        elif not isinstance(dg, int):
            raise SchemaError(f"{path}.gens[{i}].deg", "degree must be an integer or pair")
        degs.append(dg)
    d = len(names)
    mul_raw = obj.get("mul")
    if not isinstance(mul_raw, list) or len(mul_raw) != d:
        raise SchemaError(f"{path}.mul", f"expected a {d}x{d} table of coefficient lists")
    mul = np.zeros((d, d, d), dtype=object if ring.dtype is object else np.int64)
    for i, row in enumerate(mul_raw):
        int_matrix_from_json(row, d, d, f"{path}.mul[{i}]")
        for j, v in enumerate(row):
            mul[i, j] = v
    unit = obj.get("unit")
    int_matrix_from_json([unit] if isinstance(unit, list) else unit, 1, d, f"{path}.unit")
    u = ring.zeros(d, 1)[:, 0]
    u[:] = unit

    def mat(key):
        if obj.get(key) is None:
            return None
        rows = int_matrix_from_json(obj[key], d, d, f"{path}.{key}")
        return ring.reduce(ring.array(rows).T.copy())

    graded = any(x != 0 for x in degs)
    alg = FinAlgebra(ring, tuple(names), ring.reduce(mul), ring.reduce(u), tuple(degs) if graded else None, mat("w"), mat("diff"), str(obj.get("name", "")))
    problems = alg.check()
    if problems:
        raise SchemaError(path, "invalid algebra: " + "; ".join(problems[:3]))
    return alg


def algebra_to_json(a: FinAlgebra) -> dict:
    out = {
        "name": a.name,
        "ring": a.ring.name,
        "gens": [{"name": n, "deg": list(a.deg(i)) if isinstance(a.deg(i), tuple) else a.deg(i)} for i, n in enumerate(a.names)],
        "mul": [[[int(v) for v in a.mul[i, j]] for j in range(a.dim)] for i in range(a.dim)],
        "unit": [int(v) for v in a.unit],
    }
    if a.w is not None:
        out["w"] = [[int(v) for v in a.w[:, i]] for i in range(a.dim)]
    if a.diff is not None:
        out["diff"] = [[int(v) for v in a.diff[:, i]] for i in range(a.dim)]
    return out
