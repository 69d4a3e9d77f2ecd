"""Finite simplicial sets in Eilenberg-Zilber normal form.

A simplex at level n is a pair ``(sigma, cell)`` where ``cell`` names a
nondegenerate m-simplex and ``sigma`` is a nondecreasing surjection
[n] -> [m] stored as a tuple.  Face and degeneracy operators act by rewriting
``sigma``; only the faces of the nondegenerate cells are stored.

Explicit finite levels (``LevelTables``) are used for models given by
formulas, for subdivision and for checking Real/dihedral relations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping

import numpy as np

from .linalg import ZZ, ChainComplex, CoeffRing, FgModule, SchemaError

Simplex = tuple[tuple[int, ...], str]


def identity_sigma(m: int) -> tuple[int, ...]:
    return tuple(range(m + 1))


def surjections(n: int, m: int) -> Iterable[tuple[int, ...]]:
    """Nondecreasing surjections [n] -> [m] in lexicographic order."""
    for steps in itertools.combinations(range(1, n + 1), m):
        sigma, v = [], 0
        for k in range(n + 1):
            if k in steps:
                v += 1
            sigma.append(v)
        yield tuple(sigma)


def word_to_sigma(word: Iterable[int], m: int) -> tuple[int, ...]:
    """s_{j1} ... s_{jr} applied to an m-cell (rightmost first)."""
    sigma = list(range(m + 1))
    for j in reversed(list(word)):
        if not 0 <= j < len(sigma):
            raise ValueError(f"degeneracy s_{j} out of range at level {len(sigma) - 1}")
        sigma.insert(j, sigma[j])
    return tuple(sigma)


def sigma_to_word(sigma: tuple[int, ...]) -> list[int]:
    return [j for j in range(len(sigma) - 2, -1, -1) if sigma[j] == sigma[j + 1]]


def _compose(rho: tuple[int, ...], sigma: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(rho[s] for s in sigma)


# ---------------------------------------------------------------------------
# Normal-form simplicial sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FinSimpSet:
    """Nondegenerate cells per dimension plus their face tables.

    ``faces[c][i]`` is the normal form of d_i c.  All simplices above the
    top nonempty dimension are degenerate.
    """

    cells: Mapping[int, tuple[str, ...]]
    faces: Mapping[str, tuple[Simplex, ...]]
    name: str = ""
    dim_of: dict = field(init=False, repr=False)

    def __post_init__(self):
        dim_of = {}
        for n, cs in self.cells.items():
            for c in cs:
                if c in dim_of:
                    raise ValueError(f"cell {c!r} listed twice")
                dim_of[c] = n
        object.__setattr__(self, "dim_of", dim_of)
        problems = self.check()
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def dim(self) -> int:
        return max((n for n, cs in self.cells.items() if cs), default=0)

    def cells_in(self, n: int) -> tuple[str, ...]:
        return tuple(self.cells.get(n, ()))

    def cell_simplex(self, c: str) -> Simplex:
        return identity_sigma(self.dim_of[c]), c

    def check(self) -> list[str]:
        """Face tables resolve to listed cells and satisfy d_i d_j = d_{j-1} d_i."""
        out = []
        for c, m in self.dim_of.items():
            fs = self.faces.get(c, ())
            if m == 0:
                if fs:
                    out.append(f"vertex {c!r} has faces")
                continue
            if len(fs) != m + 1:
                out.append(f"cell {c!r} needs {m + 1} faces, has {len(fs)}")
                continue
            for i, (sig, d) in enumerate(fs):
                if d not in self.dim_of:
                    out.append(f"d_{i}({c}) names unknown cell {d!r}")
                elif len(sig) != m or sig != tuple(sorted(sig)) or set(sig) != set(range(self.dim_of[d] + 1)):
                    out.append(f"d_{i}({c}) = {sig}:{d} is not a normal form at level {m - 1}")
        if out:
            return out
        for c, m in self.dim_of.items():
            if m < 2:
                continue
            x = self.cell_simplex(c)
            for j in range(m + 1):
                for i in range(j):
                    lhs = self.face(i, self.face(j, x))
                    rhs = self.face(j - 1, self.face(i, x))
                    if lhs != rhs:
                        out.append(f"d_{i} d_{j} != d_{j - 1} d_{i} on {c!r}")
        return out

    # -- operators ------------------------------------------------------
    def face(self, i: int, x: Simplex) -> Simplex:
        sigma, c = x
        n = len(sigma) - 1
        if not 0 <= i <= n or n == 0:
            raise ValueError(f"d_{i} undefined at level {n}")
        v = sigma[i]
        rest = sigma[:i] + sigma[i + 1 :]
        if v in rest:
            return rest, c
        tau = tuple(s - 1 if s > v else s for s in rest)
        rho, c2 = self.faces[c][v]
        return _compose(rho, tau), c2

    def degen(self, j: int, x: Simplex) -> Simplex:
        sigma, c = x
        if not 0 <= j < len(sigma):
            raise ValueError(f"s_{j} undefined at level {len(sigma) - 1}")
        return sigma[: j + 1] + sigma[j:], c

    def level(self, n: int) -> list[Simplex]:
        out = []
        for m in range(0, n + 1):
            for sigma in surjections(n, m):
                for c in self.cells_in(m):
                    out.append((sigma, c))
        return out

    def is_degenerate(self, x: Simplex) -> bool:
        return len(x[0]) != len(set(x[0]))

    def to_levels(self, top: int) -> "LevelTables":
        levels = [self.level(n) for n in range(top + 1)]
        faces = {n: [{x: self.face(i, x) for x in levels[n]} for i in range(n + 1)] for n in range(1, top + 1)}
        degens = {n: [{x: self.degen(j, x) for x in levels[n]} for j in range(n + 1)] for n in range(top)}
        return LevelTables(levels, faces, degens)

    def __repr__(self) -> str:
        counts = {n: len(cs) for n, cs in sorted(self.cells.items()) if cs}
        return f"FinSimpSet({self.name or 'anon'}: {counts})"


def point(name: str = "*") -> FinSimpSet:
    return FinSimpSet({0: (name,)}, {}, name="point")


def discrete(names: Iterable[str], label: str = "discrete") -> FinSimpSet:
    return FinSimpSet({0: tuple(names)}, {}, name=label)


def delta1() -> FinSimpSet:
    """The interval with d_0 = terminal vertex '1' and d_1 = initial vertex '0'."""
    return FinSimpSet({0: ("0", "1"), 1: ("01",)}, {"01": (((0,), "1"), ((0,), "0"))}, name="delta1")


def circle() -> FinSimpSet:
    """One vertex and one loop."""
    return FinSimpSet({0: ("v",), 1: ("e",)}, {"e": (((0,), "v"), ((0,), "v"))}, name="circle")


def disjoint_union(parts: Mapping[str, FinSimpSet], sep: str = ":") -> FinSimpSet:
    cells: dict[int, list[str]] = {}
    faces = {}
    for tag, x in parts.items():
        for n, cs in x.cells.items():
            for c in cs:
                cells.setdefault(n, []).append(f"{tag}{sep}{c}")
        for c, fs in x.faces.items():
            faces[f"{tag}{sep}{c}"] = tuple((s, f"{tag}{sep}{d}") for s, d in fs)
    return FinSimpSet({n: tuple(cs) for n, cs in cells.items()}, faces, name="+".join(parts))


# ---------------------------------------------------------------------------
# Explicit level tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LevelTables:
    """Levels 0..top as explicit finite sets with face and degeneracy dicts."""

    levels: list[list[Hashable]]
    faces: dict[int, list[dict]]
    degens: dict[int, list[dict]]

    @property
    def top(self) -> int:
        return len(self.levels) - 1

    def d(self, n: int, i: int, x):
        return self.faces[n][i][x]

    def s(self, n: int, j: int, x):
        return self.degens[n][j][x]

    def check_identities(self) -> list[str]:
        out = []
        for n in range(2, self.top + 1):
            for x in self.levels[n]:
                for j in range(n + 1):
                    for i in range(j):
                        if self.d(n - 1, i, self.d(n, j, x)) != self.d(n - 1, j - 1, self.d(n, i, x)):
                            out.append(f"d_{i} d_{j} = d_{j - 1} d_{i} fails at level {n} on {x!r}")
        for n in range(0, self.top):
            for x in self.levels[n]:
                for j in range(n + 1):
                    y = self.s(n, j, x)
                    for i in range(n + 2):
                        z = self.d(n + 1, i, y)
                        if i in (j, j + 1):
                            exp = x
                        elif i < j:
                            exp = self.s(n - 1, j - 1, self.d(n, i, x))
                        else:
                            exp = self.s(n - 1, j, self.d(n, i - 1, x))
                        if z != exp:
                            out.append(f"d_{i} s_{j} identity fails at level {n} on {x!r}")
                    if n + 2 <= self.top:
                        for i in range(j + 1):
                            if self.s(n + 1, i, y) != self.s(n + 1, j + 1, self.s(n, i, x)):
                                out.append(f"s_{i} s_{j} = s_{j + 1} s_{i} fails at level {n} on {x!r}")
        return out

    def nondegenerate(self, n: int) -> list:
        if n == 0:
            return list(self.levels[0])
        img = set(self.degens[n - 1][j][x] for j in range(n) for x in self.levels[n - 1])
        return [x for x in self.levels[n] if x not in img]

    def normal_form(self, n: int, x) -> tuple[tuple[int, ...], Hashable]:
        """(sigma, nondegenerate y) with x = sigma^* y."""
        if n == 0:
            return (0,), x
        for j in range(n):
            inv = {v: k for k, v in self.degens[n - 1][j].items()}
            if x in inv:
                sigma, y = self.normal_form(n - 1, inv[x])
                return sigma[: j + 1] + sigma[j:], y
        return identity_sigma(n), x

    def to_finsimp(self, cap: int, namer: Callable[[int, Hashable], str] = lambda n, x: str(x), label: str = "") -> FinSimpSet:
        """Normal-form set, asserting every simplex above ``cap`` is degenerate."""
        for n in range(cap + 1, self.top + 1):
            extra = self.nondegenerate(n)
            if extra:
                raise ValueError(f"level {n} has nondegenerate simplices {extra[:3]!r} above cap {cap}")
        cells = {n: tuple(namer(n, x) for x in self.nondegenerate(n)) for n in range(cap + 1)}
        faces = {}
        for n in range(1, cap + 1):
            for x in self.nondegenerate(n):
                fs = []
                for i in range(n + 1):
                    sigma, y = self.normal_form(n - 1, self.d(n, i, x))
                    fs.append((sigma, namer(n - 1 - (len(sigma) - len(set(sigma))), y)))
                faces[namer(n, x)] = tuple(fs)
        return FinSimpSet(cells, faces, name=label)


def check_real(t: LevelTables, omega: Mapping[int, Mapping]) -> list[str]:
    """Real relations: omega^2 = id, d_i omega = omega d_{n-i}, s_i omega = omega s_{n-i}."""
    out = []
    for n in range(t.top + 1):
        w = omega[n]
        for x in t.levels[n]:
            if w[w[x]] != x:
                out.append(f"omega^2 = id fails at level {n} on {x!r}")
            if n >= 1:
                for i in range(n + 1):
                    if t.d(n, i, w[x]) != omega[n - 1][t.d(n, n - i, x)]:
                        out.append(f"d_{i} omega = omega d_{n - i} fails at level {n} on {x!r}")
            if n + 1 <= t.top:
                for i in range(n + 1):
                    if t.s(n, i, w[x]) != omega[n + 1][t.s(n, n - i, x)]:
                        out.append(f"s_{i} omega = omega s_{n - i} fails at level {n} on {x!r}")
    return out


def check_dihedral(t: LevelTables, omega: Mapping[int, Mapping], tau: Mapping[int, Mapping]) -> list[str]:
    """All dihedral relations (cyclic operator tau, Real operator omega)."""
    out = check_real(t, omega)
    for n in range(t.top + 1):
        tn, wn = tau[n], omega[n]
        for x in t.levels[n]:
            y = x
            for _ in range(n + 1):
                y = tn[y]
            if y != x:
                out.append(f"t^{n + 1} = id fails at level {n} on {x!r}")
            # omega t = t^{-1} omega  <=>  t omega t = omega
            if tn[wn[tn[x]]] != wn[x]:
                out.append(f"omega t = t^-1 omega fails at level {n} on {x!r}")
            if n >= 1:
                if t.d(n, 0, tn[x]) != t.d(n, n, x):
                    out.append(f"d_0 t = d_n fails at level {n} on {x!r}")
                for i in range(1, n + 1):
                    if t.d(n, i, tn[x]) != tau[n - 1][t.d(n, i - 1, x)]:
                        out.append(f"d_{i} t = t d_{i - 1} fails at level {n} on {x!r}")
            if n + 1 <= t.top:
                t1 = tau[n + 1]
                if t.s(n, 0, tn[x]) != t1[t1[t.s(n, n, x)]]:
                    out.append(f"s_0 t = t^2 s_n fails at level {n} on {x!r}")
                for i in range(1, n + 1):
                    if t.s(n, i, tn[x]) != t1[t.s(n, i - 1, x)]:
                        out.append(f"s_{i} t = t s_{i - 1} fails at level {n} on {x!r}")
    return out


def check_simplicial_action(t: LevelTables, g: Mapping[int, Mapping], label: str = "g") -> list[str]:
    """``g`` is a levelwise bijection commuting with all faces and degeneracies."""
    out = []
    for n in range(t.top + 1):
        gn = g[n]
        if sorted(map(repr, (gn[x] for x in t.levels[n]))) != sorted(map(repr, t.levels[n])):
            out.append(f"{label} is not a bijection at level {n}")
        for x in t.levels[n]:
            if n >= 1:
                for i in range(n + 1):
                    if t.d(n, i, gn[x]) != g[n - 1][t.d(n, i, x)]:
                        out.append(f"d_{i} {label} = {label} d_{i} fails at level {n} on {x!r}")
            if n + 1 <= t.top:
                for i in range(n + 1):
                    if t.s(n, i, gn[x]) != g[n + 1][t.s(n, i, x)]:
                        out.append(f"s_{i} {label} = {label} s_{i} fails at level {n} on {x!r}")
    return out


# ---------------------------------------------------------------------------
# Real structures on normal-form sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RealStructure:
    """omega on nondegenerate cells; extended by omega(sigma^* c) = (sigma^rev)^* omega(c)."""

    on_cells: Mapping[str, Simplex]

    def apply(self, x: FinSimpSet, s: Simplex) -> Simplex:
        sigma, c = s
        n = len(sigma) - 1
        m = x.dim_of[c]
        rev = tuple(m - sigma[n - k] for k in range(n + 1))
        rho, c2 = self.on_cells[c]
        return _compose(rho, rev), c2

    def tables(self, x: FinSimpSet, top: int) -> tuple[LevelTables, dict]:
        t = x.to_levels(top)
        return t, {n: {s: self.apply(x, s) for s in t.levels[n]} for n in range(top + 1)}


def validate_structure(x: FinSimpSet, s: "RealStructure | DihedralStructure", top: int | None = None) -> list[str]:
    """Relations of the Real (resp. dihedral) structure through level ``top``."""
    if isinstance(s, DihedralStructure):
        return check_dihedral(s.tables, s.omega, s.tau)
    top = x.dim + 2 if top is None else top
    missing = [c for c in x.dim_of if c not in s.on_cells]
    if missing:
        return [f"omega undefined on {missing}"]
    t, w = s.tables(x, top)
    return check_real(t, w)


@dataclass(frozen=True, eq=False)
class DihedralStructure:
    """Explicit omega and t tables on explicit levels."""

    tables: LevelTables
    omega: dict
    tau: dict


def dihedral_group_model(top: int) -> DihedralStructure:
    """D_{2(n+1)} at level n, elements (r, j) meaning omega^r t^j, through level ``top``."""
    levels = [[(r, j) for r in (0, 1) for j in range(n + 1)] for n in range(top + 1)]

    def face(n, i, x):
        r, j = x
        if r == 1:
            ii = n - i
        else:
            ii = i
        jj = j if j <= ii else j - 1
        return r, jj % n

    def degen(n, i, x):
        r, j = x
        ii = n - i if r == 1 else i
        jj = j if j <= ii else j + 1
        return r, jj % (n + 2)

    faces = {n: [{x: face(n, i, x) for x in levels[n]} for i in range(n + 1)] for n in range(1, top + 1)}
    degens = {n: [{x: degen(n, j, x) for x in levels[n]} for j in range(n + 1)] for n in range(top)}
    omega = {n: {(r, j): (1 - r, j) for r, j in levels[n]} for n in range(top + 1)}
    # left multiplication by t: t * t^j = t^{j+1}, t * omega t^j = omega t^{j-1}
    tau = {n: {(r, j): (r, (j + 1) % (n + 1) if r == 0 else (j - 1) % (n + 1)) for r, j in levels[n]} for n in range(top + 1)}
    return DihedralStructure(LevelTables(levels, faces, degens), omega, tau)


def dihedral_name(n: int, x) -> str:
    """Names such as '1', 't', 'wt^2' for the unsubdivided model."""
    r, j = x
    base = "" if j == 0 else ("t" if j == 1 else f"t^{j}")
    if r:
        return "w" + base
    return base or "1"


def sq_dihedral_name(k: int, x) -> str:
    """Names such as 't0', 't1^3', 'wt1' in the subdivided model (k = sq level)."""
    r, j = x
    base = "" if j == 0 else (f"t{k}" if j == 1 else f"t{k}^{j}")
    if r:
        return "w" + base
    return base or "1"


# ---------------------------------------------------------------------------
# Segal-Quillen subdivision
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Subdivision:
    tables: LevelTables
    omega: dict | None


def sq_tables(t: LevelTables, omega: Mapping[int, Mapping] | None = None, levels: int | None = None) -> Subdivision:
    """sq X_k = X_{2k+1}, d~_i = d_i d_{2k+1-i}, s~_i = s_{2k+2-i} s_i."""
    kmax = (t.top - 1) // 2 if levels is None else levels
    if 2 * kmax + 1 > t.top or kmax < 0:
        raise ValueError(f"subdivision through level {kmax} needs source level {2 * kmax + 1}, have {t.top}")
    new_levels = [list(t.levels[2 * k + 1]) for k in range(kmax + 1)]
    faces = {}
    for k in range(1, kmax + 1):
        n = 2 * k + 1
        faces[k] = [{x: t.d(n - 1, i, t.d(n, n - i, x)) for x in t.levels[n]} for i in range(k + 1)]
    degens = {}
    for k in range(kmax):
        n = 2 * k + 1
        degens[k] = [{x: t.s(n + 1, 2 * k + 2 - i, t.s(n, i, x)) for x in t.levels[n]} for i in range(k + 1)]
    w = None
    if omega is not None:
        w = {k: dict(omega[2 * k + 1]) for k in range(kmax + 1)}
    return Subdivision(LevelTables(new_levels, faces, degens), w)


def sq(x: FinSimpSet, s: RealStructure | None = None, cap: int | None = None) -> tuple[FinSimpSet, dict[str, str] | None]:
    """Subdivision of a normal-form set; returns (set, inherited involution on cells).

    The involution is simplicial on the subdivision and is returned as a
    permutation of nondegenerate cell names.
    """
    cap = x.dim if cap is None else cap
    top = 2 * (cap + 1) + 1
    t = x.to_levels(top)
    w = None
    if s is not None:
        w = {n: {y: s.apply(x, y) for y in t.levels[n]} for n in range(top + 1)}
    sub = sq_tables(t, w)
    namer = _sq_namer(x)
    out = sub.tables.to_finsimp(cap, namer, label=f"sq({x.name})")
    perm = None
    if w is not None:
        problems = check_simplicial_action(sub.tables, sub.omega, "omega")
        if problems:
            raise ValueError("inherited involution is not simplicial: " + problems[0])
        perm = {}
        for k in range(cap + 1):
            for y in sub.tables.nondegenerate(k):
                perm[namer(k, y)] = namer(k, sub.omega[k][y])
    return out, perm


def _sq_namer(x: FinSimpSet):
    def name(n: int, s: Simplex) -> str:
        sigma, c = s
        if sigma == identity_sigma(x.dim_of[c]) or x.dim_of[c] == 0:
            return c
        return f"{c}[{''.join(map(str, sigma))}]"

    return name


# ---------------------------------------------------------------------------
# Maps and chains
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SimpMap:
    """Images of nondegenerate cells as normal forms.

    ``reversed`` marks edges sent to an edge with the two endpoints swapped
    (d_i f(e) = f(d_{1-i} e)); such edges carry the sign -1 on chains.  Only
    cells of dimension at most one may be reversed.
    """

    source: FinSimpSet
    target: FinSimpSet
    images: Mapping[str, Simplex]
    reversed: frozenset = frozenset()
    name: str = ""

    def __post_init__(self):
        rev = frozenset(c for c in self.reversed if self.source.dim_of.get(c) == 1 and len(set(self.images[c][0])) == 2)
        object.__setattr__(self, "reversed", rev)

    @classmethod
    def from_names(cls, source: FinSimpSet, target: FinSimpSet, table: Mapping[str, str], reversed: Iterable[str] = (), name: str = "") -> "SimpMap":
        """Each cell goes to a target cell; lower-dimensional images are degenerated."""
        imgs = {}
        for c, m in source.dim_of.items():
            d = table[c]
            k = target.dim_of[d]
            if k > m:
                raise ValueError(f"{name}: {c} (dim {m}) cannot map to {d} (dim {k})")
            if k == m:
                sigma = identity_sigma(m)
            elif k == 0:
                sigma = (0,) * (m + 1)
            else:
                raise ValueError(f"{name}: ambiguous collapse of {c} onto {d}")
            imgs[c] = (sigma, d)
        return cls(source, target, imgs, frozenset(reversed), name)

    def apply(self, s: Simplex) -> Simplex:
        sigma, c = s
        rho, d = self.images[c]
        if c in self.reversed and sigma != identity_sigma(1):
            if len(set(sigma)) > 1:
                raise ValueError(f"{self.name}: reversed edge {c} has no image on {sigma}")
            sigma = tuple(1 - v for v in sigma)
        return _compose(rho, sigma), d

    def check(self) -> list[str]:
        out = []
        tag = self.name or "map"
        for c, m in self.source.dim_of.items():
            if c not in self.images:
                out.append(f"{tag}: no image for {c}")
                continue
            sigma, d = self.images[c]
            if d not in self.target.dim_of:
                out.append(f"{tag}: {c} -> unknown cell {d}")
                continue
            k = self.target.dim_of[d]
            if len(sigma) != m + 1 or list(sigma) != sorted(sigma) or set(sigma) != set(range(k + 1)):
                out.append(f"{tag}: image of {c} is not a level-{m} normal form")
        if out:
            return out
        for c, m in self.source.dim_of.items():
            if m == 0:
                continue
            y = self.images[c]
            for i in range(m + 1):
                src_i = 1 - i if c in self.reversed else i
                lhs = self.target.face(i, y)
                rhs = self.apply(self.source.face(src_i, self.source.cell_simplex(c)))
                if lhs != rhs:
                    out.append(f"{tag}: d_{i} f({c}) = {lhs} but f(d_{src_i} {c}) = {rhs}")
        return out

    def __matmul__(self, other: "SimpMap") -> "SimpMap":
        """self ∘ other."""
        if other.target is not self.source:
            raise ValueError(f"cannot compose {self.name} after {other.name}")
        imgs, rev = {}, set()
        for c in other.source.dim_of:
            sigma, d = other.images[c]
            img = self.apply((sigma, d))
            imgs[c] = img
            flip = (c in other.reversed) != (d in self.reversed and sigma == identity_sigma(1))
            if flip:
                rev.add(c)
        return SimpMap(other.source, self.target, imgs, frozenset(rev), f"{self.name}∘{other.name}")

    def equals(self, other: "SimpMap") -> bool:
        return dict(self.images) == dict(other.images) and self.reversed == other.reversed

    def differences(self, other: "SimpMap") -> list[str]:
        out = []
        for c in self.source.dim_of:
            a = (self.images[c], c in self.reversed)
            b = (other.images[c], c in other.reversed)
            if a != b:
                out.append(f"{c}: {a} vs {b}")
        return out

    @classmethod
    def identity(cls, x: FinSimpSet) -> "SimpMap":
        return cls(x, x, {c: x.cell_simplex(c) for c in x.dim_of}, name="id")

    def table(self) -> dict[str, str]:
        out = {}
        for c in self.source.dim_of:
            sigma, d = self.images[c]
            out[c] = ("-" if c in self.reversed else "") + d
        return out


def normalized_chains(x: FinSimpSet, ring: CoeffRing = ZZ, top: int | None = None) -> ChainComplex:
    top = x.dim if top is None else top
    objs = {n: FgModule.free(ring, len(x.cells_in(n))) for n in range(top + 1)}
    index = {c: k for n in x.cells for k, c in enumerate(x.cells_in(n))}
    diffs = {}
    for n in range(1, min(x.dim, top) + 1):
        d = ring.zeros(len(x.cells_in(n - 1)), len(x.cells_in(n)))
        for k, c in enumerate(x.cells_in(n)):
            for i in range(n + 1):
                sigma, e = x.face(i, x.cell_simplex(c))
                if len(set(sigma)) == len(sigma):
                    d[index[e], k] += (-1) ** i
        diffs[n] = ring.reduce(d)
    return ChainComplex(ring, objs, diffs)


def chain_map(f: SimpMap, ring: CoeffRing = ZZ, top: int | None = None) -> dict[int, np.ndarray]:
    out = {}
    top = max(f.source.dim, f.target.dim) if top is None else top
    for n in range(top + 1):
        src, tgt = f.source.cells_in(n), f.target.cells_in(n)
        index = {c: k for k, c in enumerate(tgt)}
        m = ring.zeros(len(tgt), len(src))
        for k, c in enumerate(src):
            sigma, d = f.images[c]
            if len(set(sigma)) == len(sigma):
                m[index[d], k] = -1 if c in f.reversed else 1
        out[n] = ring.reduce(m)
    return out


def homology_invariants(x: FinSimpSet, ring: CoeffRing = ZZ) -> dict[int, tuple]:
    c = normalized_chains(x, ring)
    return {n: c.homology(n).module.invariants() for n in range(x.dim + 1)}


# ---------------------------------------------------------------------------
# Isomorphism of small sets and JSON
# ---------------------------------------------------------------------------


def find_cell_isomorphism(a: FinSimpSet, b: FinSimpSet) -> dict[str, str] | None:
    """A dimension-preserving bijection of cells commuting with faces, if one exists."""
    dims = sorted(set(a.cells) | set(b.cells))
    if any(len(a.cells_in(n)) != len(b.cells_in(n)) for n in dims):
        return None
    order = [c for n in dims for c in a.cells_in(n)]
    choice: dict[str, str] = {}

    def ok(c):
        m = a.dim_of[c]
        for i in range(m + 1 if m else 0):
            sa, da = a.faces[c][i]
            sb, db = b.faces[choice[c]][i]
            if sa != sb or choice.get(da) != db:
                return False
        return True

    def go(k):
        if k == len(order):
            return True
        c = order[k]
        used = set(choice.values())
        for d in b.cells_in(a.dim_of[c]):
            if d in used:
                continue
            choice[c] = d
            if ok(c) and go(k + 1):
                return True
            del choice[c]
        return False

    return dict(choice) if go(0) else None


def finsimp_from_json(obj, path: str = "$") -> tuple[FinSimpSet, RealStructure | None]:
    if not isinstance(obj, dict) or "cells" not in obj:
        raise SchemaError(path, "expected an object with 'cells' and 'faces'")
    cells_raw = obj["cells"]
    if not isinstance(cells_raw, dict):
        raise SchemaError(f"{path}.cells", "expected a map dimension -> list of names")
    cells = {}
    for k, v in cells_raw.items():
        try:
            n = int(k)
        except ValueError:
            raise SchemaError(f"{path}.cells.{k}", "dimension keys must be integers") from None
        if not isinstance(v, list) or not all(isinstance(s, str) for s in v):
            raise SchemaError(f"{path}.cells.{k}", "expected a list of cell names")
        cells[n] = tuple(v)
    dim_of = {c: n for n, cs in cells.items() for c in cs}

    def nf(entry, p):
        if not (isinstance(entry, list) and len(entry) == 2 and isinstance(entry[0], list) and isinstance(entry[1], str)):
            raise SchemaError(p, "expected [degeneracy word, cell name]")
        if entry[1] not in dim_of:
            raise SchemaError(p, f"unknown cell {entry[1]!r}")
        try:
            return word_to_sigma(entry[0], dim_of[entry[1]]), entry[1]
        except ValueError as e:
            raise SchemaError(p, str(e)) from None

    faces = {}
    for c, fs in (obj.get("faces") or {}).items():
        if not isinstance(fs, list):
            raise SchemaError(f"{path}.faces.{c}", "expected a list of faces")
        faces[c] = tuple(nf(e, f"{path}.faces.{c}[{i}]") for i, e in enumerate(fs))
    try:
        x = FinSimpSet(cells, faces, name=str(obj.get("name", "")))
    except ValueError as e:
        raise SchemaError(f"{path}.faces", str(e)) from None
    real = None
    if "omega" in obj:
        om = obj["omega"]
        if not isinstance(om, dict):
            raise SchemaError(f"{path}.omega", "expected a map cell -> [word, cell]")
        real = RealStructure({c: nf(e, f"{path}.omega.{c}") for c, e in om.items()})
    return x, real


def finsimp_to_json(x: FinSimpSet, omega: Mapping[str, str] | None = None) -> dict:
    out = {
        "name": x.name,
        "cells": {str(n): list(cs) for n, cs in sorted(x.cells.items()) if cs},
        "faces": {c: [[sigma_to_word(s), d] for s, d in fs] for c, fs in x.faces.items()},
    }
    if omega is not None:
        out["omega"] = {c: [[], d] for c, d in omega.items()}
    return out


# ---------------------------------------------------------------------------
# Pushouts along discrete sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Pushout:
    obj: FinSimpSet
    left: SimpMap
    right: SimpMap


def _tagged(tag: str | None, c: str) -> str:
    return c if tag is None else f"{tag}:{c}"


def pushout_discrete(
    apex: Iterable[str],
    f: Mapping[str, str],
    x: FinSimpSet,
    g: Mapping[str, str],
    y: FinSimpSet,
    tags: tuple[str | None, str | None] = ("A", "B"),
    label: str = "",
) -> Pushout:
    """Glue ``x`` and ``y`` along the vertex images of a discrete apex.

    Each vertex class is named after its first member (cells of ``x`` before
    cells of ``y``).
    """
    tx, ty = tags
    names = [_tagged(tx, c) for c in x.dim_of] + [_tagged(ty, c) for c in y.dim_of]
    if len(set(names)) != len(names):
        raise ValueError("tagged cell names collide; choose other tags")
    parent = {n: n for n in names}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    order = {n: k for k, n in enumerate(names)}
    for p in apex:
        a, b = find(_tagged(tx, f[p])), find(_tagged(ty, g[p]))
        if a != b:
            lo, hi = sorted((a, b), key=order.get)
            parent[hi] = lo
    cells: dict[int, list[str]] = {}
    faces = {}
    for tag, z in ((tx, x), (ty, y)):
        for n in sorted(z.cells):
            for c in z.cells_in(n):
                r = find(_tagged(tag, c))
                if r not in cells.setdefault(n, []):
                    cells[n].append(r)
                if n:
                    faces[r] = tuple((s, find(_tagged(tag, d))) for s, d in z.faces[c])
    obj = FinSimpSet({n: tuple(cs) for n, cs in cells.items()}, faces, name=label)
    left = SimpMap.from_names(x, obj, {c: find(_tagged(tx, c)) for c in x.dim_of}, name=f"in_{tx}")
    right = SimpMap.from_names(y, obj, {c: find(_tagged(ty, c)) for c in y.dim_of}, name=f"in_{ty}")
    return Pushout(obj, left, right)


def glue_maps(p: Pushout, target: FinSimpSet, f: SimpMap, g: SimpMap, name: str = "") -> SimpMap:
    """The map out of a pushout induced by ``f`` on the left and ``g`` on the right."""
    imgs, rev = {}, set()
    for leg, h in ((p.left, f), (p.right, g)):
        for c in leg.source.dim_of:
            d = leg.images[c][1]
            img = h.images[c]
            if d in imgs and imgs[d] != img:
                raise ValueError(f"{name}: legs disagree on glued cell {d}")
            imgs[d] = img
            if c in h.reversed:
                rev.add(d)
    return SimpMap(p.obj, target, imgs, frozenset(rev), name)
