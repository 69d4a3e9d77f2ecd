"""Exact linear algebra over the integers and prime fields.

Modules are finite presentations: ``ngens`` generators modulo the column span
of a relation matrix.  Integer work uses Python integers inside numpy object
arrays; prime-field work uses int64 (or uint8 for p = 2) with row echelon
forms.  Every routine is deterministic: pivots are chosen by a fixed rule so
bases and cycle representatives are reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class SchemaError(ValueError):
    """Malformed input; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    f = 2
    while f * f <= p:
        if p % f == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True)
class CoeffRing:
    """The integers (``p == 0``) or the prime field F_p."""

    p: int = 0

    def __post_init__(self):
        if self.p != 0 and not _is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @classmethod
    def parse(cls, text: str) -> "CoeffRing":
        t = text.strip()
        if t in ("Z", "ZZ"):
            return cls(0)
        if t.startswith("Fp:"):
            body = t[3:]
        elif t.startswith("F"):
            body = t[1:]
        else:
            raise ValueError(f"unknown coefficient ring {text!r}")
        try:
            p = int(body)
        except ValueError:
            raise ValueError(f"unknown coefficient ring {text!r}") from None
        return cls(p)

    @property
    def name(self) -> str:
        if self.p == 0:
            return "Z"
        return "F2" if self.p == 2 else f"Fp:{self.p}"

    @property
    def is_field(self) -> bool:
        return self.p != 0

    @property
    def dtype(self):
        if self.p == 0 or self.p >= 1 << 20:
            return object
        return np.int64

    def __repr__(self) -> str:
        return f"CoeffRing({self.name})"

    # -- matrix helpers -------------------------------------------------
    def zeros(self, rows: int, cols: int) -> np.ndarray:
        if self.dtype is object:
            a = np.empty((rows, cols), dtype=object)
            a.fill(0)
            return a
        return np.zeros((rows, cols), dtype=np.int64)

    def eye(self, n: int) -> np.ndarray:
        a = self.zeros(n, n)
        for i in range(n):
            a[i, i] = 1
        return a

    def array(self, rows, shape: tuple[int, int] | None = None) -> np.ndarray:
        rows = [list(r) for r in rows]
        if shape is None:
            shape = (len(rows), len(rows[0]) if rows else 0)
        a = self.zeros(*shape)
        for i, r in enumerate(rows):
            for j, v in enumerate(r):
                a[i, j] = int(v)
        return self.reduce(a)

    def reduce(self, a: np.ndarray) -> np.ndarray:
        if self.p:
            return a % self.p
        return a

    def coerce(self, a: np.ndarray) -> np.ndarray:
        """Copy ``a`` into this ring's dtype, reduced."""
        a = np.asarray(a)
        out = self.zeros(*a.shape) if a.ndim == 2 else None
        if out is None:
            raise ValueError("expected a matrix")
        if a.size:
            if self.dtype is object:
                for idx, v in np.ndenumerate(a):
                    out[idx] = int(v)
            else:
                if a.dtype == object:
                    out[...] = np.array([[int(v) % self.p for v in row] for row in a], dtype=np.int64).reshape(a.shape)
                else:
                    out[...] = a.astype(np.int64)
        return self.reduce(out)

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.shape[1] != b.shape[0]:
            raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
        if a.shape[0] == 0 or b.shape[1] == 0 or a.shape[1] == 0:
            return self.zeros(a.shape[0], b.shape[1])
        if self.dtype is object:
            return self.reduce(_zdot(a, b))
        bound = a.shape[1] * (self.p - 1) ** 2
        if bound < 2**52:
            prod = a.astype(np.float64) @ b.astype(np.float64)
            return np.rint(prod).astype(np.int64) % self.p
        return (a @ b) % self.p

    def hstack(self, *mats: np.ndarray) -> np.ndarray:
        rows = {m.shape[0] for m in mats}
        if len(rows) != 1:
            raise ValueError("row mismatch in hstack")
        r = rows.pop()
        cols = sum(m.shape[1] for m in mats)
        out = self.zeros(r, cols)
        c = 0
        for m in mats:
            out[:, c : c + m.shape[1]] = m
            c += m.shape[1]
        return out

    def column(self, entries: dict[int, int] | Sequence[int], n: int) -> np.ndarray:
        a = self.zeros(n, 1)
        items = entries.items() if isinstance(entries, dict) else enumerate(entries)
        for i, v in items:
            a[i, 0] = v
        return self.reduce(a)

    def is_zero_matrix(self, a: np.ndarray) -> bool:
        return not np.any(self.reduce(a) != 0)


ZZ = CoeffRing(0)
F2 = CoeffRing(2)


# ---------------------------------------------------------------------------
# Smith normal form over Z
# ---------------------------------------------------------------------------


def _absmax(a: np.ndarray) -> int:
    if a.dtype == object:
        return max((abs(int(v)) for v in a.flat), default=0)
    return int(np.abs(a).max(initial=0))


def _zdot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact integer product; float64 BLAS when no entry can exceed 2^52."""
    if a.size and b.size and _absmax(a) * _absmax(b) * a.shape[1] < 2**52:
        prod = np.rint(a.astype(np.float64) @ b.astype(np.float64)).astype(np.int64)
        return prod.astype(object)
    return a.dot(b)


def _obj(a) -> np.ndarray:
    a = np.asarray(a, dtype=object)
    if a.ndim != 2:
        raise ValueError("expected a matrix")
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = int(v)
    return out


def _snf(a: np.ndarray):
    """Return (diag, U, V, Uinv) with U a V = diag, all object arrays."""
    A = a.copy()
    m, n = A.shape
    U, Ui, V = ZZ.eye(m), ZZ.eye(m), ZZ.eye(n)

    def swap_rows(i, j):
        if i != j:
            A[[i, j]] = A[[j, i]]
            U[[i, j]] = U[[j, i]]
            Ui[:, [i, j]] = Ui[:, [j, i]]

    def swap_cols(i, j):
        if i != j:
            A[:, [i, j]] = A[:, [j, i]]
            V[:, [i, j]] = V[:, [j, i]]

    def smallest(cells):
        return min(cells, key=lambda ij: (abs(A[ij[0], ij[1]]), ij[0], ij[1]))

    t = 0
    while t < min(m, n):
        nz = [(int(i) + t, int(j) + t) for i, j in np.argwhere(A[t:, t:] != 0)]
        if not nz:
            break
        i, j = smallest(nz)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            piv = A[t, t]
            if t + 1 < m:
                q = A[t + 1 :, t] // piv
                if np.any(q != 0):
                    A[t + 1 :] -= np.outer(q, A[t])
                    U[t + 1 :] -= np.outer(q, U[t])
                    Ui[:, t] += Ui[:, t + 1 :].dot(q)
            if t + 1 < n:
                q = A[t, t + 1 :] // piv
                if np.any(q != 0):
                    A[:, t + 1 :] -= np.outer(A[:, t], q)
                    V[:, t + 1 :] -= np.outer(V[:, t], q)
            rest = [(k, t) for k in range(t + 1, m) if A[k, t] != 0]
            rest += [(t, k) for k in range(t + 1, n) if A[t, k] != 0]
            if rest:
                i, j = smallest(rest)
                swap_rows(t, i)
                swap_cols(t, j)
                continue
            bad = np.argwhere(A[t + 1 :, t + 1 :] % piv != 0)
            if len(bad):
                k = int(bad[0][0]) + t + 1
                A[t] += A[k]
                U[t] += U[k]
                Ui[:, k] -= Ui[:, t]
                continue
            break
        if A[t, t] < 0:
            A[t] *= -1
            U[t] *= -1
            Ui[:, t] *= -1
        t += 1
    diag = [A[i, i] for i in range(min(m, n))]
    return diag, U, V, Ui


def smith_normal_form(m) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Smith normal form of an integer matrix: returns (s, u, v) with u·m·v = s."""
    a = _obj(m) if len(np.asarray(m, dtype=object).shape) == 2 else _obj(np.zeros((0, 0)))
    diag, U, V, _ = _snf(a)
    rows, cols = a.shape
    s = [[0] * cols for _ in range(rows)]
    for i, d in enumerate(diag):
        s[i][i] = int(d)
    return s, [[int(x) for x in r] for r in U], [[int(x) for x in r] for r in V]


# ---------------------------------------------------------------------------
# Row echelon form over F_p
# ---------------------------------------------------------------------------


def _rref(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    m, n = a.shape
    if p == 2:
        A = (a % 2).astype(np.uint8)
    else:
        A = np.array(a % p, dtype=np.int64 if a.dtype != object else object)
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        if p != 2:
            inv = pow(int(A[r, c]), p - 2, p)
            A[r, c:] = (A[r, c:] * inv) % p
        col = A[:, c].copy()
        col[r] = 0
        rows = np.flatnonzero(col)
        if rows.size:
            if p == 2:
                A[rows, c:] ^= A[r, c:]
            else:
                A[rows, c:] = (A[rows, c:] - np.outer(col[rows], A[r, c:])) % p
        pivots.append(c)
        r += 1
    if p == 2:
        A = A.astype(np.int64)
    return A, pivots


# ---------------------------------------------------------------------------
# Lattice / subspace primitives shared by both rings
# ---------------------------------------------------------------------------


def rank(ring: CoeffRing, a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    if ring.is_field:
        return len(_rref(a, ring.p)[1])
    diag, *_ = _snf(a)
    return sum(1 for d in diag if d != 0)


def kernel(ring: CoeffRing, a: np.ndarray) -> np.ndarray:
    """Basis (as columns) of {y : a y = 0}."""
    m, n = a.shape
    if n == 0:
        return ring.zeros(0, 0)
    if m == 0:
        return ring.eye(n)
    if ring.is_field:
        R, piv = _rref(a, ring.p)
        free = [c for c in range(n) if c not in set(piv)]
        K = ring.zeros(n, len(free))
        for k, f in enumerate(free):
            K[f, k] = 1
            for i, c in enumerate(piv):
                K[c, k] = (-R[i, f]) % ring.p
        return K
    diag, U, V, _ = _snf(_obj(a))
    r = sum(1 for d in diag if d != 0)
    return V[:, r:].copy()


def span_basis(ring: CoeffRing, a: np.ndarray) -> np.ndarray:
    """A basis (columns) of the column span of ``a``."""
    m, n = a.shape
    if n == 0 or m == 0:
        return ring.zeros(m, 0)
    if ring.is_field:
        _, piv = _rref(a, ring.p)
        return a[:, piv].copy()
    diag, U, V, _ = _snf(_obj(a))
    r = sum(1 for d in diag if d != 0)
    return ring.matmul(_obj(a), V[:, :r])


def solve(ring: CoeffRing, a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Some X with a X = b, or None when no exact solution exists."""
    m, n = a.shape
    k = b.shape[1]
    if m == 0:
        return ring.zeros(n, k)
    if n == 0:
        return ring.zeros(0, k) if ring.is_zero_matrix(b) else None
    if ring.is_field:
        R, piv = _rref(ring.hstack(a, b), ring.p)
        if any(c >= n for c in piv):
            return None
        X = ring.zeros(n, k)
        for i, c in enumerate(piv):
            X[c, :] = R[i, n:]
        return X
    diag, U, V, _ = _snf(_obj(a))
    C = U.dot(_obj(b))
    Z = ring.zeros(n, k)
    for i in range(m):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            if np.any(C[i] != 0):
                return None
            continue
        if np.any(C[i] % d != 0):
            return None
        Z[i] = C[i] // d
    return V.dot(Z)


@dataclass(frozen=True, eq=False)
class _Quotient:
    """Canonical coordinates on F^g / span(rels)."""

    to: np.ndarray  # k × g
    lift: np.ndarray  # g × k
    orders: tuple[int, ...]  # 0 = free coordinate, d > 1 = Z/d


def _quotient(ring: CoeffRing, g: int, rels: np.ndarray) -> _Quotient:
    if rels.shape[1] == 0 or ring.is_zero_matrix(rels):
        return _Quotient(ring.eye(g), ring.eye(g), tuple(0 for _ in range(g)))
    if ring.is_field:
        R, piv = _rref(rels.T.copy(), ring.p)
        pset = set(piv)
        keep = [j for j in range(g) if j not in pset]
        to = ring.zeros(len(keep), g)
        lift = ring.zeros(g, len(keep))
        pos = {j: k for k, j in enumerate(keep)}
        for j in keep:
            to[pos[j], j] = 1
            lift[j, pos[j]] = 1
        for i, c in enumerate(piv):
            for j in keep:
                to[pos[j], c] = (-R[i, j]) % ring.p
        return _Quotient(to, lift, tuple(0 for _ in keep))
    alive, rest, to0 = _eliminate_units(g, rels)
    h = len(alive)
    if not rest:
        return _Quotient(to0, _lift_alive(g, alive), tuple(0 for _ in alive))
    pos = {j: k for k, j in enumerate(alive)}
    small = ZZ.zeros(h, len(rest))
    for c, rel in enumerate(rest):
        for j, v in rel.items():
            small[pos[j], c] = v
    diag, U, V, Ui = _snf(small)
    orders = [(diag[i] if i < len(diag) else 0) for i in range(h)]
    keep = [i for i in range(h) if orders[i] != 1]
    to = _zdot(U[keep, :], to0) if h else ZZ.zeros(0, g)
    lift = _zdot(_lift_alive(g, alive), Ui[:, keep])
    return _Quotient(_obj(to), _obj(lift), tuple(int(orders[i]) for i in keep))


def _lift_alive(g: int, alive: list[int]) -> np.ndarray:
    out = ZZ.zeros(g, len(alive))
    for k, j in enumerate(alive):
        out[j, k] = 1
    return out


def _eliminate_units(g: int, rels: np.ndarray):
    """Sparse pass removing generators that some relation expresses with a unit coefficient.

    Returns surviving generators, remaining relations (dicts over survivors)
    and the projection F^g -> F^alive.
    """
    relset: dict[int, dict[int, int]] = {}
    for c in range(rels.shape[1]):
        col = {int(j): int(rels[j, c]) for j in np.nonzero(rels[:, c])[0]}
        if col:
            relset[c] = col
    where: dict[int, set[int]] = {j: set() for j in range(g)}
    for c, rel in relset.items():
        for j in rel:
            where[j].add(c)
    exprs: list[tuple[int, dict[int, int]]] = []
    while True:
        best = None
        for c, rel in relset.items():
            for j, v in rel.items():
                if v in (1, -1):
                    cost = (len(rel) - 1) * (len(where[j]) - 1)
                    if best is None or cost < best[0]:
                        best = (cost, c, j)
                        if cost == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        _, c, j = best
        rel = relset.pop(c)
        for k in rel:
            where[k].discard(c)
        u = rel[j]
        expr = {k: -u * v for k, v in rel.items() if k != j}
        exprs.append((j, expr))
        for c2 in list(where[j]):
            r2 = relset[c2]
            a = r2.pop(j)
            for k, v in expr.items():
                nv = r2.get(k, 0) + a * v
                if nv:
                    if k not in r2:
                        where[k].add(c2)
                    r2[k] = nv
                elif k in r2:
                    del r2[k]
                    where[k].discard(c2)
            if not r2:
                del relset[c2]
        where[j] = set()
    gone = {j for j, _ in exprs}
    alive = [j for j in range(g) if j not in gone]
    pos = {j: k for k, j in enumerate(alive)}
    images: dict[int, dict[int, int]] = {j: {pos[j]: 1} for j in alive}
    for j, expr in reversed(exprs):
        img: dict[int, int] = {}
        for k, v in expr.items():
            for t, x in images[k].items():
                img[t] = img.get(t, 0) + v * x
        images[j] = {t: x for t, x in img.items() if x}
    to0 = ZZ.zeros(len(alive), g)
    for j, img in images.items():
        for t, x in img.items():
            to0[t, j] = x
    rest = [relset[c] for c in sorted(relset)]
    return alive, rest, to0


# ---------------------------------------------------------------------------
# Modules and maps
# ---------------------------------------------------------------------------


def _deg_add(a, b):
    if a is None or b is None:
        return None
    if isinstance(a, tuple):
        return tuple(x + y for x, y in zip(a, b))
    return a + b


@dataclass(frozen=True, eq=False)
class FgModule:
    """Generators 0..ngens-1 modulo the columns of ``rels`` (shape ngens × r).

    ``degrees`` optionally attaches an internal degree (int or tuple) to each
    generator; relations must then be homogeneous.
    """

    ring: CoeffRing
    ngens: int
    rels: np.ndarray
    degrees: tuple | None = None

    def __post_init__(self):
        if self.rels.ndim != 2 or self.rels.shape[0] != self.ngens:
            raise ValueError(f"relation matrix must have {self.ngens} rows, got shape {self.rels.shape}")
        if self.degrees is not None and len(self.degrees) != self.ngens:
            raise ValueError("one degree per generator required")

    @classmethod
    def free(cls, ring: CoeffRing, n: int, degrees=None) -> "FgModule":
        return cls(ring, n, ring.zeros(n, 0), None if degrees is None else tuple(degrees))

    @classmethod
    def cyclic(cls, ring: CoeffRing, order: int) -> "FgModule":
        return cls(ring, 1, ring.array([[order]]))

    @cached_property
    def _q(self) -> _Quotient:
        return _quotient(self.ring, self.ngens, self.rels)

    def invariants(self) -> tuple[int, tuple[int, ...]]:
        """(free rank, torsion coefficients); over a field: (dimension, ())."""
        orders = self._q.orders
        return sum(1 for d in orders if d == 0), tuple(sorted(d for d in orders if d > 1))

    def is_trivial(self) -> bool:
        return len(self._q.orders) == 0

    def coords(self, x: np.ndarray) -> np.ndarray:
        """Canonical coordinates of the columns of ``x`` (reduced)."""
        y = self.ring.matmul(self._q.to, x)
        if not self.ring.is_field:
            for i, d in enumerate(self._q.orders):
                if d > 1:
                    y[i] = y[i] % d
        return y

    def is_zero(self, x: np.ndarray) -> bool:
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        return not np.any(self.coords(x) != 0)

    def equal(self, x: np.ndarray, y: np.ndarray) -> bool:
        return self.is_zero(self.ring.reduce(x - y))

    def simplify(self) -> tuple["FgModule", np.ndarray, np.ndarray]:
        """Minimal presentation (mod, to, lift): to maps old→new, lift new→old."""
        if self.degrees is not None:
            return _simplify_graded(self)
        q = self._q
        k = len(q.orders)
        tors = [i for i, d in enumerate(q.orders) if d > 1]
        rels = self.ring.zeros(k, len(tors))
        for c, i in enumerate(tors):
            rels[i, c] = q.orders[i]
        return FgModule(self.ring, k, rels), q.to, q.lift

    def with_degrees(self, degrees) -> "FgModule":
        return FgModule(self.ring, self.ngens, self.rels, None if degrees is None else tuple(degrees))

    def degree_blocks(self) -> dict:
        """Map degree → list of generator indices (single block if ungraded)."""
        blocks: dict = {}
        degs = self.degrees if self.degrees is not None else (None,) * self.ngens
        for i, d in enumerate(degs):
            blocks.setdefault(d, []).append(i)
        return blocks

    def submodule_block(self, idx: list[int]) -> "FgModule":
        """Restriction to generators ``idx`` (relations supported there)."""
        inside = set(idx)
        outside = [i for i in range(self.ngens) if i not in inside]
        sel = [c for c in range(self.rels.shape[1]) if not np.any(self.rels[outside, c] != 0)]
        rels = self.rels[np.ix_(idx, sel)].copy() if idx and sel else self.ring.zeros(len(idx), 0)
        degs = None if self.degrees is None else tuple(self.degrees[i] for i in idx)
        return FgModule(self.ring, len(idx), rels, degs)

    def __repr__(self) -> str:
        r, t = self.invariants()
        return f"FgModule({self.ring.name}: rank {r}, torsion {list(t)}, gens {self.ngens})"


def _simplify_graded(m: FgModule):
    ring = m.ring
    blocks = m.degree_blocks()
    _check_homogeneous_rels(m, blocks)
    parts = []
    for d, idx in sorted(blocks.items(), key=lambda kv: _deg_key(kv[0])):
        sub = m.submodule_block(idx).with_degrees(None)
        mm, to, lift = sub.simplify()
        parts.append((d, idx, mm, to, lift))
    k = sum(p[2].ngens for p in parts)
    nrel = sum(p[2].rels.shape[1] for p in parts)
    TO = ring.zeros(k, m.ngens)
    LIFT = ring.zeros(m.ngens, k)
    RELS = ring.zeros(k, nrel)
    degs = []
    r0 = c0 = 0
    for d, idx, mm, to, lift in parts:
        kk = mm.ngens
        TO[r0 : r0 + kk, idx] = to
        LIFT[np.ix_(idx, range(r0, r0 + kk))] = lift
        RELS[r0 : r0 + kk, c0 : c0 + mm.rels.shape[1]] = mm.rels
        degs += [d] * kk
        r0 += kk
        c0 += mm.rels.shape[1]
    return FgModule(ring, k, RELS, tuple(degs)), TO, LIFT


def _deg_key(d):
    if d is None:
        return (0,)
    return d if isinstance(d, tuple) else (d,)


def _check_homogeneous_rels(m: FgModule, blocks: dict):
    owner = {}
    for d, idx in blocks.items():
        for i in idx:
            owner[i] = d
    for c in range(m.rels.shape[1]):
        ds = {owner[i] for i in range(m.ngens) if m.rels[i, c] != 0}
        if len(ds) > 1:
            raise ValueError(f"relation {c} is not homogeneous (degrees {sorted(map(str, ds))})")


def presented_quotient(ring: CoeffRing, gens: int | Sequence, rels: Iterable[Sequence[int]]) -> FgModule:
    """The module on ``gens`` symbols modulo the given relation rows."""
    n = gens if isinstance(gens, int) else len(gens)
    rows = [list(r) for r in rels]
    for r in rows:
        if len(r) != n:
            raise ValueError(f"relation {r} has length {len(r)}, expected {n}")
    mat = ring.zeros(n, len(rows))
    for c, r in enumerate(rows):
        for i, v in enumerate(r):
            mat[i, c] = v
    return FgModule(ring, n, ring.reduce(mat))


def direct_sum(*mods: FgModule) -> FgModule:
    ring = mods[0].ring
    n = sum(m.ngens for m in mods)
    r = sum(m.rels.shape[1] for m in mods)
    rels = ring.zeros(n, r)
    i = c = 0
    graded = all(m.degrees is not None for m in mods) and mods
    degs: list = []
    for m in mods:
        rels[i : i + m.ngens, c : c + m.rels.shape[1]] = m.rels
        i += m.ngens
        c += m.rels.shape[1]
        if graded:
            degs += list(m.degrees)
    return FgModule(ring, n, rels, tuple(degs) if graded else None)


def tensor(a: FgModule, b: FgModule) -> FgModule:
    """a ⊗ b on generator pairs (i, j) ↦ i·b.ngens + j."""
    if a.ring != b.ring:
        raise ValueError("ring mismatch in tensor")
    ring = a.ring
    n = a.ngens * b.ngens
    cols = []
    for c in range(a.rels.shape[1]):
        for j in range(b.ngens):
            col = {}
            for i in range(a.ngens):
                if a.rels[i, c] != 0:
                    col[i * b.ngens + j] = a.rels[i, c]
            cols.append(col)
    for c in range(b.rels.shape[1]):
        for i in range(a.ngens):
            col = {}
            for j in range(b.ngens):
                if b.rels[j, c] != 0:
                    col[i * b.ngens + j] = b.rels[j, c]
            cols.append(col)
    rels = ring.zeros(n, len(cols))
    for c, col in enumerate(cols):
        for k, v in col.items():
            rels[k, c] = v
    degs = None
    if a.degrees is not None and b.degrees is not None:
        degs = tuple(_deg_add(x, y) for x in a.degrees for y in b.degrees)
    return FgModule(ring, n, ring.reduce(rels), degs)


@dataclass(frozen=True, eq=False)
class ModuleMap:
    source: FgModule
    target: FgModule
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (self.target.ngens, self.source.ngens):
            raise ValueError(f"map matrix shape {self.matrix.shape} != {(self.target.ngens, self.source.ngens)}")

    def is_well_defined(self) -> bool:
        if self.source.rels.shape[1] == 0:
            return True
        return self.target.is_zero(self.source.ring.matmul(self.matrix, self.source.rels))

    def __matmul__(self, other: "ModuleMap") -> "ModuleMap":
        return ModuleMap(other.source, self.target, self.source.ring.matmul(self.matrix, other.matrix))

    def equals(self, other: "ModuleMap") -> bool:
        ring = self.source.ring
        return self.target.is_zero(ring.reduce(self.matrix - other.matrix))

    def is_isomorphism(self) -> bool:
        """Bijective: surjective with matching invariants (f.g. modules are Hopfian)."""
        if not self.is_well_defined():
            return False
        if self.source.invariants() != self.target.invariants():
            return False
        ring = self.source.ring
        tgt = self.target
        img = ring.hstack(self.matrix, tgt.rels)
        return solve(ring, img, ring.eye(tgt.ngens)) is not None

    @classmethod
    def identity(cls, m: FgModule) -> "ModuleMap":
        return cls(m, m, m.ring.eye(m.ngens))


def maps_equal(target: FgModule, f: np.ndarray, g: np.ndarray) -> bool:
    return target.is_zero(target.ring.reduce(f - g))


# ---------------------------------------------------------------------------
# Chain complexes and homology
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Homology:
    """H_n as a simplified module plus the data to push cycles into it."""

    module: FgModule
    cycles: np.ndarray  # representatives of module generators (columns)
    basis: np.ndarray  # basis of the cycle lattice
    to: np.ndarray  # cycle-lattice coordinates → module generators

    def project(self, x: np.ndarray) -> np.ndarray:
        ring = self.module.ring
        if self.basis.shape[1] == 0:
            return ring.zeros(0, x.shape[1])
        y = solve(ring, self.basis, x)
        if y is None:
            raise ValueError("vector is not a cycle")
        return ring.matmul(self.to, y)


class ChainComplex:
    """Objects C_n for lo ≤ n ≤ hi with d_n: C_n → C_{n-1}; d∘d = 0 is checked."""

    def __init__(self, ring: CoeffRing, objects: dict[int, FgModule], diffs: dict[int, np.ndarray], check: bool = True):
        if not objects:
            raise ValueError("empty chain complex")
        self.ring = ring
        self.lo = min(objects)
        self.hi = max(objects)
        self.objects = {n: objects.get(n, FgModule.free(ring, 0)) for n in range(self.lo, self.hi + 1)}
        self.diffs: dict[int, np.ndarray] = {}
        for n in range(self.lo + 1, self.hi + 1):
            shape = (self.objects[n - 1].ngens, self.objects[n].ngens)
            d = diffs.get(n)
            if d is None:
                d = ring.zeros(*shape)
            if d.shape != shape:
                raise ValueError(f"d_{n} has shape {d.shape}, expected {shape}")
            self.diffs[n] = ring.reduce(d)
        if check:
            for n in range(self.lo + 1, self.hi + 1):
                if not ModuleMap(self.objects[n], self.objects[n - 1], self.diffs[n]).is_well_defined():
                    raise ValueError(f"d_{n} does not respect relations")
            for n in range(self.lo + 2, self.hi + 1):
                dd = ring.matmul(self.diffs[n - 1], self.diffs[n])
                if not self.objects[n - 2].is_zero(dd):
                    raise ValueError(f"d∘d ≠ 0 at degree {n}")

    @property
    def range(self) -> tuple[int, int]:
        return self.lo, self.hi

    def d(self, n: int) -> np.ndarray:
        if n in self.diffs:
            return self.diffs[n]
        src = self.objects.get(n)
        tgt = self.objects.get(n - 1)
        return self.ring.zeros(tgt.ngens if tgt else 0, src.ngens if src else 0)

    def obj(self, n: int) -> FgModule:
        return self.objects.get(n, FgModule.free(self.ring, 0))

    def homology(self, n: int) -> Homology:
        if n < self.lo or n > self.hi:
            raise ValueError(f"degree {n} outside range [{self.lo}, {self.hi}]")
        return homology_of(self.ring, self.obj(n + 1), self.d(n + 1), self.obj(n), self.d(n), self.obj(n - 1))

    def restrict(self, lo: int, hi: int) -> "ChainComplex":
        lo, hi = max(lo, self.lo), min(hi, self.hi)
        return ChainComplex(self.ring, {n: self.objects[n] for n in range(lo, hi + 1)}, {n: self.diffs[n] for n in range(lo + 1, hi + 1)}, check=False)


def homology(c: ChainComplex, n: int) -> FgModule:
    """H_n(c) as a presented module (see ChainComplex.homology for projection data)."""
    return c.homology(n).module


def homology_of(ring: CoeffRing, c_in: FgModule, d_in: np.ndarray, c: FgModule, d_out: np.ndarray, c_out: FgModule) -> Homology:
    """ker(d_out)/im(d_in) at c; graded objects are split by degree."""
    if c.degrees is None or c.ngens == 0:
        return _homology_plain(ring, d_in, c_in, c, d_out, c_out)
    blocks = c.degree_blocks()
    in_blocks = c_in.degree_blocks() if c_in.degrees is not None else {}
    out_blocks = c_out.degree_blocks() if c_out.degrees is not None else {}
    parts = []
    for deg, idx in sorted(blocks.items(), key=lambda kv: _deg_key(kv[0])):
        ii = in_blocks.get(deg, []) if c_in.degrees is not None else list(range(c_in.ngens))
        oo = out_blocks.get(deg, []) if c_out.degrees is not None else list(range(c_out.ngens))
        sub = c.submodule_block(idx).with_degrees(None)
        sub_in = c_in.submodule_block(ii).with_degrees(None)
        sub_out = c_out.submodule_block(oo).with_degrees(None)
        din = d_in[np.ix_(idx, ii)] if ii else ring.zeros(len(idx), 0)
        dout = d_out[np.ix_(oo, idx)] if oo else ring.zeros(0, len(idx))
        parts.append((deg, idx, _homology_plain(ring, din, sub_in, sub, dout, sub_out)))
    h = sum(p[2].module.ngens for p in parts)
    z = sum(p[2].basis.shape[1] for p in parts)
    r = sum(p[2].module.rels.shape[1] for p in parts)
    cyc = ring.zeros(c.ngens, h)
    basis = ring.zeros(c.ngens, z)
    to = ring.zeros(h, z)
    rels = ring.zeros(h, r)
    degs: list = []
    h0 = z0 = r0 = 0
    for deg, idx, H in parts:
        hh, zz, rr = H.module.ngens, H.basis.shape[1], H.module.rels.shape[1]
        if hh:
            cyc[np.ix_(idx, range(h0, h0 + hh))] = H.cycles
        if zz:
            basis[np.ix_(idx, range(z0, z0 + zz))] = H.basis
        if hh and zz:
            to[h0 : h0 + hh, z0 : z0 + zz] = H.to
        if rr:
            rels[h0 : h0 + hh, r0 : r0 + rr] = H.module.rels
        degs += [deg] * hh
        h0, z0, r0 = h0 + hh, z0 + zz, r0 + rr
    return Homology(FgModule(ring, h, rels, tuple(degs)), cyc, basis, to)


def _homology_plain(ring, d_in, c_in, c, d_out, c_out) -> Homology:
    g = c.ngens
    if g == 0:
        z = ring.zeros(0, 0)
        return Homology(FgModule.free(ring, 0), z, z, z)
    if d_out.shape[0] == 0 or (c_out.rels.shape[1] == 0 and ring.is_zero_matrix(d_out)):
        Zb = ring.eye(g)
    else:
        K = kernel(ring, ring.hstack(d_out, c_out.rels))
        Zb = span_basis(ring, K[:g, :].copy())
    zdim = Zb.shape[1]
    den = ring.hstack(d_in, c.rels)
    if den.shape[1] == 0:
        L = ring.zeros(zdim, 0)
    else:
        L = kernel(ring, ring.hstack(Zb, den))[:zdim, :].copy()
    H = FgModule(ring, zdim, L)
    Hmin, to, lift = H.simplify()
    cycles = ring.matmul(Zb, lift)
    return Homology(Hmin, cycles, Zb, to)


def induced_map_on_homology(f: dict[int, np.ndarray], src: ChainComplex, tgt: ChainComplex, n: int, check: bool = True) -> ModuleMap:
    """H_n(f) for a chain map given degreewise by matrices ``f[k]``."""
    ring = src.ring
    if check:
        for k in (n, n + 1):
            if k - 1 < src.lo or k > src.hi:
                continue
            lhs = ring.matmul(tgt.d(k), f[k])
            rhs = ring.matmul(f[k - 1], src.d(k))
            if not tgt.obj(k - 1).is_zero(ring.reduce(lhs - rhs)):
                raise ValueError(f"not a chain map in degree {k}")
    hs, ht = src.homology(n), tgt.homology(n)
    img = ring.matmul(f[n], hs.cycles)
    return ModuleMap(hs.module, ht.module, ht.project(img))


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def module_to_json(m: FgModule) -> dict:
    out = {
        "ring": m.ring.name,
        "gens": m.ngens,
        "rels": [[int(m.rels[i, c]) for i in range(m.ngens)] for c in range(m.rels.shape[1])],
    }
    if m.degrees is not None:
        out["degrees"] = [list(d) if isinstance(d, tuple) else d for d in m.degrees]
    return out


def ring_from_json(obj, path: str) -> CoeffRing:
    if not isinstance(obj, str):
        raise SchemaError(path, "ring must be a string such as 'Z', 'F2' or 'Fp:3'")
    try:
        return CoeffRing.parse(obj)
    except ValueError as e:
        raise SchemaError(path, str(e)) from None


def int_matrix_from_json(obj, rows: int, cols: int, path: str) -> list[list[int]]:
    if not isinstance(obj, list) or len(obj) != rows:
        raise SchemaError(path, f"expected a list of {rows} rows")
    for i, r in enumerate(obj):
        if not isinstance(r, list) or len(r) != cols:
            raise SchemaError(f"{path}[{i}]", f"expected a row of {cols} integers")
        for j, v in enumerate(r):
            if not isinstance(v, int) or isinstance(v, bool):
                raise SchemaError(f"{path}[{i}][{j}]", "expected an integer")
    return obj


def _degree_from_json(v, path):
    if isinstance(v, int) and not isinstance(v, bool):
        return v
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, int) for x in v):
        return tuple(v)
    raise SchemaError(path, "degree must be an integer or a pair of integers")


def module_from_json(obj, path: str = "$", ring: CoeffRing | None = None) -> FgModule:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object with keys ring, gens, rels")
    if ring is None or "ring" in obj:
        if "ring" not in obj:
            raise SchemaError(f"{path}.ring", "missing")
        r2 = ring_from_json(obj["ring"], f"{path}.ring")
        if ring is not None and r2 != ring:
            raise SchemaError(f"{path}.ring", f"ring {r2.name} differs from {ring.name}")
        ring = r2
    n = obj.get("gens")
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise SchemaError(f"{path}.gens", "expected a nonnegative integer")
    rels = obj.get("rels", [])
    if not isinstance(rels, list):
        raise SchemaError(f"{path}.rels", "expected a list of relation rows")
    int_matrix_from_json(rels, len(rels), n, f"{path}.rels")
    degs = obj.get("degrees")
    if degs is not None:
        if not isinstance(degs, list) or len(degs) != n:
            raise SchemaError(f"{path}.degrees", f"expected {n} degrees")
        degs = tuple(_degree_from_json(v, f"{path}.degrees[{i}]") for i, v in enumerate(degs))
    return presented_quotient(ring, n, rels).with_degrees(degs)


def matrix_to_json(a: np.ndarray) -> list[list[int]]:
    return [[int(v) for v in row] for row in a]


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)
