"""Finite simplicial O(2) models, their structure maps and a Hopf-algebroid verifier.

Orientation: an edge e has d_0 e = terminal vertex and d_1 e = initial
vertex, boundary d_0 - d_1.  Maps that reflect a circle send an edge to an
edge with its endpoints exchanged; those edges are flagged as reversed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .linalg import ZZ, induced_map_on_homology, solve
from .simplicial import (
    FinSimpSet,
    Pushout,
    RealStructure,
    SimpMap,
    chain_map,
    dihedral_group_model,
    discrete,
    find_cell_isomorphism,
    glue_maps,
    normalized_chains,
    pushout_discrete,
    sq,
    sq_dihedral_name,
    sq_tables,
    validate_structure,
)

V = lambda c: ((0,), c)  # noqa: E731  vertex face


def _circle_pair(vertices: list[str], edges: dict[str, tuple[str, str]], name: str) -> FinSimpSet:
    """Edges given as name -> (d_0, d_1); a second copy gets the prefix 'w'."""
    def w(c):
        return "w" if c == "1" else "w" + c

    vs = vertices + [w(v) for v in vertices]
    es = list(edges) + [w(e) for e in edges]
    faces = {e: (V(a), V(b)) for e, (a, b) in edges.items()}
    faces.update({w(e): (V(w(a)), V(w(b))) for e, (a, b) in edges.items()})
    return FinSimpSet({0: tuple(vs), 1: tuple(es)}, faces, name=name)


def _swap_w(x: FinSimpSet) -> dict[str, str]:
    def w(c):
        if c == "1":
            return "w"
        if c == "w":
            return "1"
        return c[1:] if c.startswith("w") else "w" + c

    return {c: w(c) for c in x.dim_of}


@dataclass(frozen=True, eq=False)
class O2Models:
    d2: FinSimpSet
    d4: FinSimpSet
    o2: FinSimpSet
    d_o2: FinSimpSet
    sq_delta1: FinSimpSet
    wedge: Pushout
    actions: dict = field(repr=False)  # object name -> {"omega": SimpMap, "t": SimpMap}

    def objects(self) -> dict[str, FinSimpSet]:
        return {"d2": self.d2, "o2": self.o2, "d_o2": self.d_o2, "o2vo2": self.wedge.obj}


def build_models() -> O2Models:
    d2 = discrete(["1", "w"], "D2")
    d4 = discrete(["1", "t0", "w", "wt0"], "D4")
    o2 = _circle_pair(["1", "t0"], {"t1": ("1", "t0"), "t1^3": ("1", "t0")}, "O(2)")
    d_o2 = _circle_pair(
        ["1", "t", "t^2", "t^3"],
        {"1|t": ("1", "t"), "1|t^3": ("1", "t^3"), "t^2|t": ("t^2", "t"), "t^2|t^3": ("t^2", "t^3")},
        "dO(2)",
    )
    sq_d1 = FinSimpSet(
        {0: ("0", "01", "1"), 1: ("0001", "0111")},
        {"0001": (V("0"), V("01")), "0111": (V("1"), V("01"))},
        name="sqD1",
    )
    wedge = pushout_discrete(["1", "w"], {"1": "t0", "w": "wt0"}, o2, {"1": "1", "w": "w"}, o2, ("A", "B"), "O(2)vO(2)")

    def act(x, table, label):
        return SimpMap.from_names(x, x, table, name=label)

    o2_t = {c: c for c in o2.dim_of}
    o2_t.update({"t1": "t1^3", "t1^3": "t1", "wt1": "wt1^3", "wt1^3": "wt1"})
    do2_t = {c: c for c in d_o2.dim_of}
    for p in ("", "w"):
        do2_t.update({p + "t": p + "t^3", p + "t^3": p + "t", p + "1|t": p + "1|t^3", p + "1|t^3": p + "1|t", p + "t^2|t": p + "t^2|t^3", p + "t^2|t^3": p + "t^2|t"})
    actions = {
        "d2": {"omega": act(d2, {"1": "w", "w": "1"}, "omega"), "t": SimpMap.identity(d2)},
        "o2": {"omega": act(o2, _swap_w(o2), "omega"), "t": act(o2, o2_t, "t")},
        "d_o2": {"omega": act(d_o2, _swap_w(d_o2), "omega"), "t": act(d_o2, do2_t, "t")},
    }
    w_ = wedge
    actions["o2vo2"] = {
        k: glue_maps(w_, w_.obj, w_.left @ actions["o2"][k], w_.right @ actions["o2"][k], name=k) for k in ("omega", "t")
    }
    return O2Models(d2, d4, o2, d_o2, sq_d1, wedge, actions)


# ---------------------------------------------------------------------------
# Structure maps as literal tables
# ---------------------------------------------------------------------------

# name -> (source, target, cell table, reversed cells)
MAP_SPECS: dict[str, tuple[str, str, dict[str, str], frozenset]] = {}


def _spec(name, src, tgt, table, rev=()):
    MAP_SPECS[name] = (src, tgt, dict(table), frozenset(rev))


_spec("eta_L", "d2", "o2", {"1": "1", "w": "w"})
_spec("eta_R", "d2", "o2", {"1": "t0", "w": "wt0"})
_spec("eps", "o2", "d2", {"1": "1", "t0": "1", "t1": "1", "t1^3": "1", "w": "w", "wt0": "w", "wt1": "w", "wt1^3": "w"})
_spec(
    "chi",
    "o2",
    "o2",
    {"1": "t0", "t0": "1", "t1": "t1", "t1^3": "t1^3", "w": "wt0", "wt0": "w", "wt1": "wt1", "wt1^3": "wt1^3"},
    ("t1", "t1^3", "wt1", "wt1^3"),
)
_WEDGE_ID_A = {f"A:{c}": c for c in ("1", "t0", "t1", "t1^3", "w", "wt0", "wt1", "wt1^3")}
_WEDGE_CHI_B = {"B:t0": "1", "B:wt0": "w", "B:t1": "t1", "B:t1^3": "t1^3", "B:wt1": "wt1", "B:wt1^3": "wt1^3"}
_REV_B = ("B:t1", "B:t1^3", "B:wt1", "B:wt1^3")
_spec("mu", "o2vo2", "o2", {**_WEDGE_ID_A, **_WEDGE_CHI_B}, _REV_B)
_spec("mu_L", "o2vo2", "o2", {**_WEDGE_ID_A, **_WEDGE_CHI_B}, _REV_B)
_spec(
    "mu_R",
    "o2vo2",
    "o2",
    {
        "A:1": "t0", "A:t0": "1", "A:t1": "t1", "A:t1^3": "t1^3",
        "A:w": "wt0", "A:wt0": "w", "A:wt1": "wt1", "A:wt1^3": "wt1^3",
        "B:t0": "t0", "B:wt0": "wt0", "B:t1": "t1", "B:t1^3": "t1^3", "B:wt1": "wt1", "B:wt1^3": "wt1^3",
    },
    ("A:t1", "A:t1^3", "A:wt1", "A:wt1^3"),
)
_spec(
    "pi",
    "d_o2",
    "o2",
    {
        "1": "1", "t": "t0", "t^2": "t0", "t^3": "t0",
        "1|t": "t1", "1|t^3": "t1^3", "t^2|t": "t0", "t^2|t^3": "t0",
        "w": "w", "wt": "wt0", "wt^2": "wt0", "wt^3": "wt0",
        "w1|t": "wt1", "w1|t^3": "wt1^3", "wt^2|t": "wt0", "wt^2|t^3": "wt0",
    },
)
_spec(
    "delta_prime",
    "d_o2",
    "o2vo2",
    {
        "1": "A:1", "t": "A:t0", "t^2": "B:t0", "t^3": "A:t0",
        "1|t": "A:t1", "1|t^3": "A:t1^3", "t^2|t": "B:t1", "t^2|t^3": "B:t1^3",
        "w": "A:w", "wt": "A:wt0", "wt^2": "B:wt0", "wt^3": "A:wt0",
        "w1|t": "A:wt1", "w1|t^3": "A:wt1^3", "wt^2|t": "B:wt1", "wt^2|t^3": "B:wt1^3",
    },
    ("t^2|t", "t^2|t^3", "wt^2|t", "wt^2|t^3"),
)


@dataclass(frozen=True, eq=False)
class StructureMaps:
    eta_L: SimpMap
    eta_R: SimpMap
    eps: SimpMap
    mu: SimpMap
    delta_prime: SimpMap
    chi: SimpMap
    mu_L: SimpMap
    mu_R: SimpMap
    pi: SimpMap

    def as_dict(self) -> dict[str, SimpMap]:
        return {k: getattr(self, k) for k in MAP_SPECS}


def _make_map(m: O2Models, name: str, table: Mapping[str, str], rev) -> SimpMap:
    src, tgt = MAP_SPECS[name][:2]
    objs = m.objects()
    x, y = objs[src], objs[tgt]
    imgs = {}
    for c, d in table.items():
        k, n = y.dim_of[d], x.dim_of[c]
        sigma = tuple(range(n + 1)) if k == n else (0,) * (n + 1)
        imgs[c] = (sigma, d)
    return SimpMap(x, y, imgs, frozenset(rev), name)


def build_maps(m: O2Models, overrides: Mapping[str, tuple[dict, frozenset]] | None = None) -> StructureMaps:
    """Structure maps from the literal tables; ``overrides`` replaces tables (used for mutation runs)."""
    overrides = overrides or {}
    maps = {}
    for name, (_, _, table, rev) in MAP_SPECS.items():
        t, r = overrides.get(name, (table, rev))
        maps[name] = _make_map(m, name, t, r)
    return StructureMaps(**maps)


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


def _entry(name: str, problems, witness=None) -> dict:
    if isinstance(problems, bool):
        passed = problems
        wit = witness
    else:
        passed = not problems
        wit = witness if witness is not None else list(problems)[:4]
    return {"name": name, "passed": bool(passed), "witness": wit}


def _same(name: str, f: SimpMap, g: SimpMap) -> dict:
    return _entry(name, f.differences(g))


def _src_of(name: str) -> str:
    return MAP_SPECS[name][0]


def verify_models(m: O2Models) -> list[dict]:
    out = []
    for key, x in m.objects().items():
        out.append(_entry(f"simplicial identities of {key}", x.check()))
        acts = m.actions[key]
        for g in ("omega", "t"):
            out.append(_entry(f"{g} acts simplicially on {key}", acts[g].check()))
            out.append(_same(f"{g}^2 = id on {key}", acts[g] @ acts[g], SimpMap.identity(x)))
        w, t = acts["omega"], acts["t"]
        out.append(_same(f"omega t = t^-1 omega on {key}", w @ t, t @ w))
    real = RealStructure({"1": V("w"), "w": V("1")})
    out.append(_entry("d2 carries a Real structure", validate_structure(m.d2, real)))
    # the O(2) models are the subdivisions of the dihedral group model
    dm = dihedral_group_model(7)
    sub = sq_tables(dm.tables, dm.omega, levels=3)
    computed = sub.tables.to_finsimp(1, sq_dihedral_name, "sq(D)")
    iso = find_cell_isomorphism(m.o2, computed)
    out.append(_entry("o2 is the subdivision of the dihedral model", iso is not None, iso))
    if iso is not None:
        names = {sq_dihedral_name(k, y): sq_dihedral_name(k, sub.omega[k][y]) for k in (0, 1) for y in sub.tables.nondegenerate(k)}
        w_tab = m.actions["o2"]["omega"].table()
        bad = [c for c in m.o2.dim_of if names[iso[c]] != iso[w_tab[c]]]
        out.append(_entry("o2 omega is the inherited involution", bad))
    sq_o2, _ = sq(m.o2)
    out.append(_entry("d_o2 is the subdivision of o2", find_cell_isomorphism(m.d_o2, sq_o2) is not None))
    return out


def verify_strict(m: O2Models, s: StructureMaps) -> list[dict]:
    out = []
    maps = s.as_dict()
    for name, f in maps.items():
        out.append(_entry(f"{name} is a simplicial map", f.check()))
    if not all(e["passed"] for e in out):
        return out
    id_d2, id_o2 = SimpMap.identity(m.d2), SimpMap.identity(m.o2)
    out.append(_same("eps eta_L = id", s.eps @ s.eta_L, id_d2))
    out.append(_same("eps eta_R = id", s.eps @ s.eta_R, id_d2))
    out.append(_same("chi eta_L = eta_R", s.chi @ s.eta_L, s.eta_R))
    out.append(_same("chi eta_R = eta_L", s.chi @ s.eta_R, s.eta_L))
    out.append(_same("chi chi = id", s.chi @ s.chi, id_o2))
    out.append(_same("eps chi = eps", s.eps @ s.chi, s.eps))
    for name, f in maps.items():
        src, tgt = MAP_SPECS[name][:2]
        for g in ("omega", "t"):
            ga, gb = m.actions[src][g], m.actions[tgt][g]
            out.append(_same(f"{name} is {g}-equivariant", f @ ga, gb @ f))
    ja, jb = m.wedge.left, m.wedge.right
    out.append(_same("mu_L on copy A = id", s.mu_L @ ja, id_o2))
    out.append(_same("mu_L on copy B = chi", s.mu_L @ jb, s.chi))
    out.append(_same("mu_R on copy A = chi", s.mu_R @ ja, s.chi))
    out.append(_same("mu_R on copy B = id", s.mu_R @ jb, id_o2))
    out.append(_same("mu on copy A = id", s.mu @ ja, id_o2))
    out.append(_same("mu coincides with mu_L", s.mu, s.mu_L))
    return out


def verify_pushouts(m: O2Models, o2_glue: Mapping | None = None, do2_glue: Mapping | None = None) -> list[dict]:
    """Check o2 and d_o2 against explicit coequalizers of cell sets."""
    two = {"e": m.sq_delta1, "w": m.sq_delta1}
    from .simplicial import disjoint_union

    d2_sq = disjoint_union(two)
    d4 = ["e0", "e1", "w0", "w1"]
    ends = {"e0": "e:0", "e1": "e:1", "w0": "w:0", "w1": "w:1"}
    out = []

    # o2: both endpoints of each interval go to the same point of D2
    glue = dict(o2_glue or {"e0": "1", "e1": "1", "w0": "w", "w1": "w"})
    p = pushout_discrete(d4, ends, d2_sq, glue, m.d2, ("I", "P"), "po1")
    cmp_tab = {"I:e:0": "1", "I:e:01": "t0", "I:e:0001": "t1", "I:e:0111": "t1^3",
               "I:w:0": "w", "I:w:01": "wt0", "I:w:0001": "wt1", "I:w:0111": "wt1^3"}
    out.append(_pushout_entry("o2 is the pushout of D2 x sqD1 <- D4 -> D2", p, m.o2, cmp_tab))

    glue2 = dict(do2_glue or ends)
    q = pushout_discrete(d4, ends, d2_sq, glue2, d2_sq, ("U", "L"), "po2")
    cmp2 = {}
    for half, mid in (("U", "t"), ("L", "t^3")):
        for c, pre in (("e", ""), ("w", "w")):
            one = "w" if pre else "1"
            cmp2[f"{half}:{c}:0"] = one
            cmp2[f"{half}:{c}:1"] = pre + "t^2"
            cmp2[f"{half}:{c}:01"] = pre + mid
            cmp2[f"{half}:{c}:0001"] = f"{pre}1|{mid}"
            cmp2[f"{half}:{c}:0111"] = f"{pre}t^2|{mid}"
    out.append(_pushout_entry("d_o2 is the pushout of two copies of D2 x sqD1 over D4", q, m.d_o2, cmp2))
    return out


def _pushout_entry(name: str, p: Pushout, model: FinSimpSet, table: Mapping[str, str]) -> dict:
    problems = []
    images = {}
    for c in p.obj.dim_of:
        if c not in table:
            problems.append(f"orphan cell {c} of the coequalizer")
        else:
            images[c] = table[c]
    hit = set(images.values())
    problems += [f"model cell {c} not hit" for c in model.dim_of if c not in hit]
    if len(hit) != len(images):
        problems.append("comparison map is not injective")
    if not problems:
        f = SimpMap.from_names(p.obj, model, images, name="comparison")
        problems += f.check()
    counts = {n: len(cs) for n, cs in p.obj.cells.items()}
    return _entry(name, problems, problems[:4] if problems else counts)


# -- homotopy level --------------------------------------------------------


class _HomologyCalc:
    def __init__(self):
        self._chains = {}

    def chains(self, x: FinSimpSet):
        key = id(x)
        if key not in self._chains:
            self._chains[key] = (x, normalized_chains(x, ZZ, top=1))
        return self._chains[key][1]

    def H(self, f: SimpMap, n: int) -> np.ndarray:
        cm = chain_map(f, ZZ, top=1)
        mm = induced_map_on_homology(cm, self.chains(f.source), self.chains(f.target), n)
        return np.array(mm.matrix, dtype=object)

    def rank(self, x: FinSimpSet, n: int) -> tuple:
        return self.chains(x).homology(n).module.invariants()


def _inverse(a: np.ndarray) -> np.ndarray | None:
    if a.shape[0] != a.shape[1]:
        return None
    return solve(ZZ, a, ZZ.eye(a.shape[0]))


def _eq(a, b) -> bool:
    return a.shape == b.shape and not np.any(a - b != 0)


def _wedge_map(p: Pushout, target: FinSimpSet, f: SimpMap, g: SimpMap, name: str) -> SimpMap:
    return glue_maps(p, target, f, g, name)


def verify_homotopy_level(m: O2Models, s: StructureMaps, delta_prime: SimpMap | None = None) -> list[dict]:
    calc = _HomologyCalc()
    out = []
    dp = delta_prime or s.delta_prime
    o2, do2 = m.o2, m.d_o2
    for key, x in (("o2", o2), ("d_o2", do2)):
        for n in (0, 1):
            inv = calc.rank(x, n)
            out.append(_entry(f"H_{n}({key}) = Z^2", inv == (2, ()), list(inv)))
    pi_inv = {}
    for n in (0, 1):
        h = calc.H(s.pi, n)
        inv = _inverse(h)
        pi_inv[n] = inv
        out.append(_entry(f"H_{n}(pi) is invertible over Z", inv is not None, [[int(v) for v in r] for r in h]))
    if any(v is None for v in pi_inv.values()):
        return out

    W = m.wedge
    ja, jb = W.left, W.right
    eta_eps_L = s.eta_L @ s.eps
    eta_eps_R = s.eta_R @ s.eps
    id_o2 = SimpMap.identity(o2)
    id_v_eps = _wedge_map(W, o2, id_o2, eta_eps_R, "id v eps")
    eps_v_id = _wedge_map(W, o2, eta_eps_L, id_o2, "eps v id")

    delta = {n: calc.H(dp, n).dot(pi_inv[n]) for n in (0, 1)}
    for n in (0, 1):
        ident = np.array(ZZ.eye(2), dtype=object)
        out.append(_entry(f"counit right: (id v eps) delta = id on H_{n}", _eq(calc.H(id_v_eps, n).dot(delta[n]), ident)))
        out.append(_entry(f"counit left: (eps v id) delta = id on H_{n}", _eq(calc.H(eps_v_id, n).dot(delta[n]), ident)))

    # coassociativity through the triple wedge A v B v C
    T = pushout_discrete(["1", "w"], {"1": "B:t0", "w": "B:wt0"}, W.obj, {"1": "1", "w": "w"}, o2, (None, "C"), "O(2)v3")
    ab_in_t = T.left
    c_in_t = T.right
    # dO(2) v O(2) glued t^2 ~ 1 and O(2) v dO(2) glued t0 ~ 1
    DL = pushout_discrete(["1", "w"], {"1": "t^2", "w": "wt^2"}, do2, {"1": "1", "w": "w"}, o2, ("D", "C"), "dO(2)vO(2)")
    DR = pushout_discrete(["1", "w"], {"1": "t0", "w": "wt0"}, o2, {"1": "1", "w": "w"}, do2, ("A", "D"), "O(2)vdO(2)")
    b_to_t = ab_in_t @ jb
    shift = _shift_map(W.obj, T.obj, b_to_t, c_in_t)
    try:
        # maps out of dO(2) v O(2), then out of O(2) v dO(2)
        dpv = _wedge_map(DL, T.obj, ab_in_t @ dp, c_in_t, "delta' v id")
        piv = _wedge_map(DL, W.obj, ja @ s.pi, jb, "pi v id")
        vdp = _wedge_map(DR, T.obj, ab_in_t @ ja, shift @ dp, "id v delta'")
        vpi = _wedge_map(DR, W.obj, ja, jb @ s.pi, "id v pi")
    except ValueError as e:
        out.append(_entry("wedge maps for coassociativity are simplicial", [str(e)]))
        return out
    problems = []
    for f in (dpv, piv, vdp, vpi):
        problems += f.check()
    out.append(_entry("wedge maps for coassociativity are simplicial", problems))
    if problems:
        return out
    for n in (0, 1):
        a_inv = _inverse(calc.H(piv, n))
        b_inv = _inverse(calc.H(vpi, n))
        if a_inv is None or b_inv is None:
            out.append(_entry(f"coassociativity on H_{n}", False, "pi v id or id v pi not invertible"))
            continue
        left = calc.H(dpv, n).dot(a_inv).dot(delta[n])
        right = calc.H(vdp, n).dot(b_inv).dot(delta[n])
        out.append(_entry(f"coassociativity on H_{n}", _eq(left, right), [[int(v) for v in r] for r in left]))

    for n in (0, 1):
        out.append(_entry(f"H_{n}(mu_L delta') = H_{n}(eta_L eps pi)", _eq(calc.H(s.mu_L @ dp, n), calc.H(s.eta_L @ s.eps @ s.pi, n))))
        out.append(_entry(f"H_{n}(mu_R delta') = H_{n}(eta_R eps pi)", _eq(calc.H(s.mu_R @ dp, n), calc.H(s.eta_R @ s.eps @ s.pi, n))))
    return out


def _shift_map(wedge: FinSimpSet, triple: FinSimpSet, b_to_t: SimpMap, c_in_t: SimpMap) -> SimpMap:
    """O(2) v O(2) -> triple wedge onto the copies B and C."""
    imgs = {}
    for c in wedge.dim_of:
        tag, _, base = c.partition(":")
        src = b_to_t if tag == "A" else c_in_t
        imgs[c] = src.images[base]
    return SimpMap(wedge, triple, imgs, name="shift")


def wrong_delta_prime(m: O2Models, s: StructureMaps) -> SimpMap:
    """A deliberately bad coproduct: fold both halves into copy A."""
    return m.wedge.left @ s.mu_L @ s.delta_prime


def verify_all(m: O2Models | None = None, s: StructureMaps | None = None) -> dict:
    m = m or build_models()
    s = s or build_maps(m)
    strict = verify_models(m) + verify_strict(m, s)
    report = {"strict": strict, "pushouts": verify_pushouts(m)}
    if all(e["passed"] for e in strict):
        report["homotopy"] = verify_homotopy_level(m, s)
    else:
        report["homotopy"] = [_entry("homotopy checks", False, "skipped: strict checks failed")]
    return report


def report_passed(report: dict) -> bool:
    return all(e["passed"] for section in report.values() for e in section)


def mutation_candidates(m: O2Models, name: str) -> list[tuple[str, str, bool]]:
    """Every single-entry change of a map table: (cell, new image, reversed)."""
    src, tgt, table, rev = MAP_SPECS[name]
    objs = m.objects()
    x, y = objs[src], objs[tgt]
    out = []
    for c, n in x.dim_of.items():
        options = [(d, False) for d in y.cells_in(0)]
        if n == 1:
            options += [(d, r) for d in y.cells_in(1) for r in (False, True)]
        for d, r in options:
            if (d, r) != (table[c], c in rev and y.dim_of[table[c]] == 1):
                out.append((c, d, r))
    return out


def run_mutations(m: O2Models | None = None, names=None) -> list[dict]:
    """Apply each single-entry mutation and record which checks caught it."""
    m = m or build_models()
    results = []
    for name in names or MAP_SPECS:
        _, _, table, rev = MAP_SPECS[name]
        for c, d, r in mutation_candidates(m, name):
            t2 = dict(table)
            t2[c] = d
            r2 = set(rev) - {c}
            if r:
                r2.add(c)
            s = build_maps(m, {name: (t2, frozenset(r2))})
            failed = [e["name"] for e in verify_strict(m, s) if not e["passed"]]
            if not failed:
                failed = [e["name"] for e in verify_homotopy_level(m, s) if not e["passed"]]
            results.append({"map": name, "cell": c, "image": ("-" if r else "") + d, "caught_by": failed[:3]})
    return results
