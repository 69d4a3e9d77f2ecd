"""Command-line front end.

Exit status: 0 success, 1 refused computation, 2 malformed input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

import numpy as np

from .algebra import FinAlgebra, Refusal, algebra_from_json, automorphism_order
from .hochschild import graded_ranks, hh_complex, hh_rel_e, hr_bar, twisted_cyclic_complex
from .linalg import ChainComplex, CoeffRing, FgModule, SchemaError, int_matrix_from_json, module_from_json, ring_from_json
from .mackey import (
    ESigmaRing,
    GreenC2,
    SignConvention,
    box,
    esigma_from_json,
    fixed_point_esigma,
    green_from_json,
    green_to_json,
    mackey_from_json,
    mackey_to_json,
    norm_e_C2,
)
from .spectral import FilteredComplex, bokstedt_shadow, pages, strip_private, twisted_shadow

COMMANDS = (
    "mackey-check",
    "box",
    "norm",
    "hh",
    "hr",
    "twisted-hh",
    "ss-pages",
    "bokstedt-shadow",
    "twisted-shadow",
    "hopf-verify",
    "sq",
)


@dataclass
class Job:
    command: str
    inputs: list[str]
    cap: int = 3
    ring: CoeffRing | None = None
    degrees: tuple[int, int] = (0, 6)
    sign: SignConvention = field(default_factory=SignConvention)
    json: bool = False
    fixtures_dir: str | None = None
    twist: str = "id"
    mutations: bool = False


def default_fixtures_dir() -> str:
    return str(resources.files("realhh") / "fixtures")


# ---------------------------------------------------------------------------
# Input handling
# ---------------------------------------------------------------------------


def _resolve(job: Job, path: str) -> str:
    if os.path.exists(path):
        return path
    for base in (job.fixtures_dir, default_fixtures_dir()):
        if base:
            cand = os.path.join(base, path)
            if os.path.exists(cand):
                return cand
            if os.path.exists(cand + ".json"):
                return cand + ".json"
    raise SchemaError(path, "file not found (also searched the fixtures directory)")


def _load(job: Job, path: str):
    real = _resolve(job, path)
    try:
        with open(real, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as e:
        raise SchemaError(real, f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    if job.ring is not None:
        obj = _override_ring(obj, job.ring.name)
    return obj, real


def _override_ring(obj, name: str):
    if isinstance(obj, dict):
        return {k: (name if k == "ring" and isinstance(v, str) else _override_ring(v, name)) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_override_ring(v, name) for v in obj]
    return obj


def _with_path(fn: Callable, obj, real: str):
    try:
        return fn(obj, real)
    except SchemaError:
        raise
    except (ValueError, TypeError, KeyError, IndexError) as e:
        raise SchemaError(real, str(e)) from None


def _need(job: Job, n: int):
    if len(job.inputs) != n:
        raise SchemaError("arguments", f"{job.command} expects {n} input file(s), got {len(job.inputs)}")


def _algebra(job: Job, idx: int = 0) -> FinAlgebra:
    obj, real = _load(job, job.inputs[idx])
    return _with_path(algebra_from_json, obj, real)


def _window(job: Job) -> list[int]:
    lo, hi = job.degrees
    return [n for n in range(lo, hi + 1) if 0 <= n <= job.cap - 1]


def _inv(inv) -> dict:
    return {"rank": int(inv[0]), "torsion": [int(t) for t in inv[1]]}


def _inv_text(inv) -> str:
    r, t = inv
    parts = ([f"{_base()}^{r}" if r > 1 else _base()] if r else []) + [f"Z/{d}" for d in t]
    return " + ".join(parts) if parts else "0"


_BASE = ["Z"]


def _base() -> str:
    return _BASE[0]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _kind(obj) -> str:
    if isinstance(obj, dict) and ("psi_L" in obj or "fixed_point" in obj):
        return "esigma"
    if isinstance(obj, dict) and "top_mul" in obj:
        return "green"
    return "mackey"


def cmd_mackey_check(job: Job) -> dict:
    _need(job, 1)
    obj, real = _load(job, job.inputs[0])
    kind = _kind(obj)
    if kind == "esigma":
        x = _with_path(esigma_from_json, obj, real)
        m = x.m
    elif kind == "green":
        x = _with_path(green_from_json, obj, real)
        m = x.mackey
    else:
        x = m = _with_path(mackey_from_json, obj, real)
    violations = x.check()
    return {"ring": m.ring.name, "kind": kind, "valid": not violations, "violations": violations, "invariants": {k: _inv(v) for k, v in m.invariants().items()}}


def cmd_box(job: Job) -> dict:
    _need(job, 2)
    ms = []
    for p in job.inputs:
        obj, real = _load(job, p)
        ms.append(_with_path(mackey_from_json, obj, real))
    for m, p in zip(ms, job.inputs):
        v = m.check()
        if v:
            raise SchemaError(p, "not a Mackey functor: " + "; ".join(v))
    b = box(ms[0], ms[1])
    return {"ring": b.ring.name, "invariants": {k: _inv(v) for k, v in b.invariants().items()}, "violations": b.check(), "mackey": mackey_to_json(b)}


def _norm_input(obj, real):
    if isinstance(obj, dict) and "gens" in obj and isinstance(obj["gens"], list):
        a = algebra_from_json(obj, real)
        if a.w is None:
            raise SchemaError(f"{real}.w", "norm of an algebra needs an anti-involution w")
        return a.module(), a.w, a.mul, a.unit
    if not isinstance(obj, dict) or "module" not in obj or "w" not in obj:
        raise SchemaError(real, 'expected an algebra or {"module": FgModule, "w": matrix, "mul"?, "unit"?}')
    r = module_from_json(obj["module"], f"{real}.module")
    d = r.ngens
    rows = int_matrix_from_json(obj["w"], d, d, f"{real}.w")
    ring = r.ring
    w = ring.zeros(d, d)
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            w[j, i] = v
    mul = unit = None
    if "mul" in obj:
        raw = obj["mul"]
        if not isinstance(raw, list) or len(raw) != d:
            raise SchemaError(f"{real}.mul", f"expected {d} rows")
        mul = np.zeros((d, d, d), dtype=object)
        for i, row in enumerate(raw):
            int_matrix_from_json(row, d, d, f"{real}.mul[{i}]")
            for j, v in enumerate(row):
                mul[i, j] = v
        unit = obj.get("unit", [1] + [0] * (d - 1))
        int_matrix_from_json([unit], 1, d, f"{real}.unit")
        unit = np.array(unit, dtype=object)
    return r, ring.reduce(w), mul, unit


def cmd_norm(job: Job) -> dict:
    _need(job, 1)
    obj, real = _load(job, job.inputs[0])
    r, w, mul, unit = _with_path(_norm_input, obj, real)
    n = norm_e_C2(r, w, mul, unit)
    out = {
        "ring": n.mackey.ring.name,
        "invariants": {k: _inv(v) for k, v in n.mackey.invariants().items()},
        "violations": n.green.check() if n.green is not None else n.mackey.check(),
    }
    out["green" if n.green is not None else "mackey"] = green_to_json(n.green) if n.green is not None else mackey_to_json(n.mackey)
    return out


def _table(homs: dict[int, FgModule]) -> dict:
    out = {}
    for n, h in homs.items():
        if h.degrees is None:
            out[str(n)] = {"total": _inv(h.invariants())}
        else:
            g = graded_ranks(h)
            out[str(n)] = {"total": _inv(h.with_degrees(None).invariants()), "by_internal_degree": {str(q): _inv(v) for q, v in sorted(g.items(), key=lambda kv: _deg_key(kv[0]))}}
    return out


def _deg_key(d):
    return (0, d, ()) if isinstance(d, int) else (1, 0, tuple(d) if isinstance(d, tuple) else (str(d),))


def cmd_hh(job: Job) -> dict:
    _need(job, 1)
    a = _algebra(job)
    c = hh_complex(a, None, job.cap, job.sign)
    homs = {n: c.homology(n).module for n in _window(job)}
    return {"algebra": a.name, "ring": a.ring.name, "cap": job.cap, "trust_window": [0, job.cap - 1], "homology": _table(homs)}


def _esigma(job: Job) -> ESigmaRing:
    obj, real = _load(job, job.inputs[0])
    if isinstance(obj, dict) and "gens" in obj and isinstance(obj["gens"], list):
        a = _with_path(algebra_from_json, obj, real)
        if a.w is None:
            raise SchemaError(f"{real}.w", "an anti-involution is required")
        return fixed_point_esigma(a)
    return _with_path(esigma_from_json, obj, real)


def cmd_hr(job: Job) -> dict:
    _need(job, 1)
    e = _esigma(job)
    problems = e.check()
    if problems:
        raise SchemaError(job.inputs[0], "invalid E_sigma ring: " + "; ".join(problems[:3]))
    bar = hr_bar(e, job.cap)
    out = {}
    for n in _window(job):
        h = bar.homology(n)
        out[str(n)] = {"bottom": _table({n: h.bottom})[str(n)], "top": _table({n: h.top})[str(n)], "valid": not h.check()}
    return {"ring": e.ring.name, "cap": job.cap, "trust_window": [0, job.cap - 1], "homology": out}


def _twist(job: Job, a: FinAlgebra) -> np.ndarray | None:
    t = job.twist
    if t == "id":
        return None
    if t == "w":
        if a.w is None:
            raise SchemaError("--twist", "algebra has no w")
        return a.w
    if t.startswith("file:"):
        obj, real = _load(job, t[5:])
        rows = int_matrix_from_json(obj, a.dim, a.dim, real)
        g = a.ring.zeros(a.dim, a.dim)
        for i, row in enumerate(rows):
            for j, v in enumerate(row):
                g[j, i] = v
        return a.ring.reduce(g)
    raise SchemaError("--twist", "expected id, w or file:path")


def cmd_twisted_hh(job: Job) -> dict:
    _need(job, 1)
    a = _algebra(job)
    g = _twist(job, a)
    if g is not None:
        try:
            order = automorphism_order(a, g)
        except ValueError as e:
            raise SchemaError("--twist", str(e)) from None
    else:
        order = 1
    c = twisted_cyclic_complex(a, g, job.cap, job.sign)
    out = {"ring": a.ring.name, "algebra": a.name, "twist_order": order, "cap": job.cap, "trust_window": [0, job.cap - 1], "homology": _table({n: c.homology(n).module for n in _window(job)})}
    if a.w is not None:
        nb = hh_rel_e(a, job.cap)
        out["relative_green"] = {str(n): {k: _inv(v) for k, v in nb.homology(n).invariants().items()} for n in _window(job)}
    return out


def filtered_from_json(obj, path: str = "$") -> FilteredComplex:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected a filtered complex object")
    ring = ring_from_json(obj.get("ring"), f"{path}.ring")
    filt_raw = obj.get("filtration")
    if not isinstance(filt_raw, dict) or not filt_raw:
        raise SchemaError(f"{path}.filtration", "expected a map degree -> list of filtration degrees")
    filt = {}
    for k, v in filt_raw.items():
        try:
            n = int(k)
        except ValueError:
            raise SchemaError(f"{path}.filtration.{k}", "degree keys must be integers") from None
        if not isinstance(v, list) or not all(isinstance(x, int) for x in v):
            raise SchemaError(f"{path}.filtration.{k}", "expected a list of integers")
        filt[n] = tuple(v)
    lo, hi = min(filt), max(filt)
    for n in range(lo, hi + 1):
        filt.setdefault(n, ())
    diffs = {}
    for k, v in (obj.get("d") or {}).items():
        try:
            n = int(k)
        except ValueError:
            raise SchemaError(f"{path}.d.{k}", "degree keys must be integers") from None
        if n - 1 not in filt or n not in filt:
            raise SchemaError(f"{path}.d.{k}", "differential outside the degree range")
        rows = int_matrix_from_json(v, len(filt[n]), len(filt[n - 1]), f"{path}.d.{k}")
        m = ring.zeros(len(filt[n - 1]), len(filt[n]))
        for i, row in enumerate(rows):
            for j, x in enumerate(row):
                m[j, i] = x
        diffs[n] = ring.reduce(m)
    objs = {n: FgModule.free(ring, len(filt[n])) for n in range(lo, hi + 1)}
    try:
        c = ChainComplex(ring, objs, diffs)
    except ValueError as e:
        raise SchemaError(f"{path}.d", str(e)) from None
    f = FilteredComplex(c, filt)
    problems = f.check()
    if problems:
        raise SchemaError(f"{path}.filtration", problems[0])
    return f


def cmd_ss_pages(job: Job) -> dict:
    _need(job, 1)
    obj, real = _load(job, job.inputs[0])
    f = _with_path(filtered_from_json, obj, real)
    rep = pages(f)
    out = rep.to_json()
    out["ring"] = f.ring.name
    out["comparison"] = {"matched": rep.ok, "mismatches": [list(k) for k in rep.stable_mismatches] + [[r, list(k)] for r, k in rep.step_mismatches]}
    return out


def cmd_bokstedt_shadow(job: Job) -> dict:
    _need(job, 1)
    a = _algebra(job)
    return {"ring": a.ring.name, **strip_private(bokstedt_shadow(a, job.cap))}


def cmd_twisted_shadow(job: Job) -> dict:
    _need(job, 1)
    a = _algebra(job)
    return {"ring": a.ring.name, **strip_private(twisted_shadow(a, _twist(job, a), job.cap))}


def cmd_hopf_verify(job: Job) -> dict:
    from .hopf import report_passed, run_mutations, verify_all

    rep = verify_all()
    out = dict(rep)
    out["passed"] = report_passed(rep)
    if job.mutations:
        muts = run_mutations()
        out["mutations"] = {"total": len(muts), "caught": sum(1 for m in muts if m["caught_by"]), "uncaught": [m for m in muts if not m["caught_by"]]}
    return out


def cmd_sq(job: Job) -> dict:
    from .simplicial import finsimp_from_json, finsimp_to_json, homology_invariants, sq

    _need(job, 1)
    obj, real = _load(job, job.inputs[0])
    x, s = _with_path(finsimp_from_json, obj, real)
    ring = job.ring or CoeffRing.parse("Z")
    y, perm = sq(x, s)
    hx = homology_invariants(x, ring)
    hy = homology_invariants(y, ring)
    return {
        "ring": ring.name,
        "input_homology": {str(n): _inv(v) for n, v in sorted(hx.items())},
        "sq_homology": {str(n): _inv(v) for n, v in sorted(hy.items())},
        "invariant": hx == hy,
        "sq": finsimp_to_json(y, perm),
    }


HANDLERS = {
    "mackey-check": cmd_mackey_check,
    "box": cmd_box,
    "norm": cmd_norm,
    "hh": cmd_hh,
    "hr": cmd_hr,
    "twisted-hh": cmd_twisted_hh,
    "ss-pages": cmd_ss_pages,
    "bokstedt-shadow": cmd_bokstedt_shadow,
    "twisted-shadow": cmd_twisted_shadow,
    "hopf-verify": cmd_hopf_verify,
    "sq": cmd_sq,
}


# ---------------------------------------------------------------------------
# Text rendering
# ---------------------------------------------------------------------------


def _align(rows: list[list[str]]) -> str:
    if not rows:
        return ""
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def _fmt(v: dict) -> str:
    return _inv_text((v["rank"], tuple(v["torsion"])))


def render(job: Job, out: dict) -> str:
    c = job.command
    lines = []
    if "trust_window" in out:
        lines.append(f"cap {out.get('cap')}: homology trusted in degrees {out['trust_window'][0]}..{out['trust_window'][1]}")
    if c in ("mackey-check",):
        lines.append(f"{out['kind']}: {'valid' if out['valid'] else 'INVALID'}")
        lines += [f"  violation: {v}" for v in out["violations"]]
        lines.append(f"bottom {_fmt(out['invariants']['bottom'])}   top {_fmt(out['invariants']['top'])}")
    elif c in ("box", "norm"):
        lines.append(f"bottom {_fmt(out['invariants']['bottom'])}   top {_fmt(out['invariants']['top'])}")
        lines.append("axioms: " + ("ok" if not out["violations"] else "; ".join(out["violations"])))
    elif c in ("hh", "twisted-hh"):
        rows = [["n", "HH_n", "by internal degree"]]
        for n, v in out["homology"].items():
            rows.append([n, _fmt(v["total"]), ", ".join(f"{q}:{_fmt(x)}" for q, x in v.get("by_internal_degree", {}).items())])
        lines.append(_align(rows))
        if "relative_green" in out:
            rows = [["n", "bottom", "top"]] + [[n, _fmt(v["bottom"]), _fmt(v["top"])] for n, v in out["relative_green"].items()]
            lines.append("relative twisted nerve of the norm:")
            lines.append(_align(rows))
    elif c == "hr":
        rows = [["n", "bottom", "top", "Mackey axioms"]]
        for n, v in out["homology"].items():
            rows.append([n, _fmt(v["bottom"]["total"]), _fmt(v["top"]["total"]), "ok" if v["valid"] else "FAIL"])
        lines.append(_align(rows))
    elif c == "ss-pages":
        lines += _render_pages(out)
        lines.append("comparison: " + ("matched" if out["comparison"]["matched"] else f"MISMATCH {out['comparison']['mismatches']}"))
    elif c in ("bokstedt-shadow", "twisted-shadow"):
        for name, lv in out["levels"].items():
            lines.append(f"[{name}]")
            lines += _render_pages(lv, only=("2",), window=out["trust_window"][1])
            lines.append("  E2 vs direct: " + ("matched" if lv["comparison"]["matched"] else f"MISMATCH at {lv['comparison']['mismatches']}"))
            lines.append("  checks: " + ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in sorted(lv["checks"].items())))
        lines += [f"note: {n}" for n in out["notes"]]
        lines.append("overall: " + ("matched" if out["comparison"]["matched"] else "MISMATCH"))
    elif c == "hopf-verify":
        for sec in ("strict", "pushouts", "homotopy"):
            lines.append(f"[{sec}]")
            rows = [[("ok" if e["passed"] else "FAIL"), e["name"], "" if e["passed"] else str(e.get("witness", ""))] for e in out[sec]]
            lines.append(_align(rows))
        if "mutations" in out:
            m = out["mutations"]
            lines.append(f"mutations caught: {m['caught']}/{m['total']}")
        lines.append("overall: " + ("all passed" if out["passed"] else "FAILURES"))
    elif c == "sq":
        rows = [["n", "H_n(x)", "H_n(sq x)"]]
        for n in sorted(set(out["input_homology"]) | set(out["sq_homology"]), key=int):
            zero = {"rank": 0, "torsion": []}
            rows.append([n, _fmt(out["input_homology"].get(n, zero)), _fmt(out["sq_homology"].get(n, zero))])
        lines.append(_align(rows))
        lines.append("subdivision invariance: " + ("yes" if out["invariant"] else "NO"))
    return "\n".join(lines)


def _render_pages(out: dict, only=None, window=None) -> list[str]:
    lines = []
    for r, entries in out["pages"].items():
        if only and r not in only:
            continue
        nz = {k: v for k, v in entries.items() if (v["rank"] or v["torsion"]) and (window is None or sum(map(int, k.split(","))) <= window)}
        lines.append(f"  E^{r}: " + (", ".join(f"({k}) {_fmt(v)}" for k, v in nz.items()) if nz else "0"))
    return lines


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _degrees(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        lo_i, hi_i = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError("expected lo..hi, for example 0..6") from None
    if lo_i > hi_i:
        raise argparse.ArgumentTypeError("empty degree window")
    return lo_i, hi_i


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="realhh", description="Desk-scale Real Hochschild and Mackey functor computations.")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cap", type=int, default=3, help="simplicial cap K (homology trusted through K-1)")
    common.add_argument("--ring", default=None, help="override coefficient ring: Z, F2 or Fp:p")
    common.add_argument("--degrees", type=_degrees, default=(0, 6), help="degree window lo..hi")
    common.add_argument("--sign", default="koszul", help="koszul, none or file:path")
    common.add_argument("--json", action="store_true", help="emit JSON")
    common.add_argument("--fixtures-dir", default=None, help="directory searched for input files")
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        nargs = {"box": 2, "hopf-verify": 0}.get(name, 1)
        if nargs:
            sp.add_argument("inputs", nargs=nargs)
        if name in ("twisted-hh", "twisted-shadow"):
            sp.add_argument("--twist", default="id", help="id, w or file:path (images of generators as rows)")
        if name == "hopf-verify":
            sp.add_argument("--mutations", action="store_true", help="also run single-entry mutation coverage")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        ring = CoeffRing.parse(args.ring) if args.ring else None
        if args.cap < 1:
            raise SchemaError("--cap", "cap must be at least 1")
        job = Job(
            args.command,
            list(getattr(args, "inputs", []) or []),
            args.cap,
            ring,
            args.degrees,
            SignConvention(),
            args.json,
            args.fixtures_dir,
            getattr(args, "twist", "id"),
            getattr(args, "mutations", False),
        )
        sign = args.sign
        if sign.startswith("file:"):
            sign = "file:" + _resolve(job, sign[5:])
        job.sign = SignConvention.parse(sign)
        out = HANDLERS[job.command](job)
    except SchemaError as e:
        print(f"error: malformed input: {e}", file=sys.stderr)
        return 2
    except Refusal as e:
        print(f"refused: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: malformed input: {e}", file=sys.stderr)
        return 2
    _BASE[0] = out.get("ring", "Z")
    if job.json:
        print(json.dumps(out, indent=2, sort_keys=True, default=_json_default))
    else:
        print(render(job, out))
    if job.command == "hopf-verify" and not out.get("passed", True):
        return 1
    return 0


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not serializable: {type(o).__name__}")
