"""Regenerate the shipped JSON fixtures from the in-code builders."""

from __future__ import annotations

import json
import os
import sys

import numpy as np

from realhh.algebra import (
    algebra_from_table,
    algebra_to_json,
    dual_numbers,
    exterior,
    gaussian_like,
    ground_field,
    group_algebra_c2,
    upper_triangular,
)
from realhh.hopf import build_models
from realhh.linalg import F2, ZZ, CoeffRing, FgModule, module_to_json
from realhh.mackey import burnside_green, esigma_to_json, fixed_point_esigma, green_to_json, mackey_to_json, test_functors
from realhh.simplicial import circle, delta1, finsimp_to_json, point

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "realhh", "fixtures")


def dump(name: str, obj) -> None:
    with open(os.path.join(OUT, name), "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def with_w(a, images: dict[str, dict[str, int]]):
    """Attach a w given as images of generators."""
    d = a.dim
    w = a.ring.zeros(d, d)
    for src, img in images.items():
        for tgt, c in img.items():
            w[a.names.index(tgt), a.names.index(src)] = c
    return a.with_(w=a.ring.reduce(w))


def dga_f2():
    """F2{1, x, y} with |x| = 1, |y| = 2, all products of x, y zero, dy = x."""
    return algebra_from_table(
        F2, ["1", "x", "y"], {("1", g): {g: 1} for g in "1xy"} | {(g, "1"): {g: 1} for g in "xy"}, "1", degrees=[0, 1, 2],
        w={"1": {"1": 1}, "x": {"x": 1}, "y": {"y": 1}}, diff={"y": {"x": 1}}, name="F2{1,x,y}, dy=x",
    )


def main() -> int:
    os.makedirs(OUT, exist_ok=True)
    names = ["constant_z", "dual_constant_z", "free_z_c2", "sign_z", "z6_plus_i3"]
    for n, m in zip(names, test_functors(ZZ)):
        dump(f"mackey_{n}.json", mackey_to_json(m))
    bg = burnside_green(ZZ)
    dump("mackey_burnside.json", mackey_to_json(bg.mackey))
    dump("green_burnside.json", green_to_json(bg))

    f3 = CoeffRing.parse("Fp:3")
    algebras = {
        "f2": ground_field(F2),
        "dual_numbers_f2": dual_numbers(F2),
        "dual_numbers_x1_f2": dual_numbers(F2, 1),
        "dual_numbers_z": dual_numbers(ZZ),
        "group_algebra_c2_f2": group_algebra_c2(F2),
        "group_algebra_c2_z": group_algebra_c2(ZZ),
        "group_algebra_c2_f3": group_algebra_c2(f3),
        "gaussian_z": gaussian_like(ZZ),
        "upper_triangular_z": upper_triangular(ZZ),
        "exterior_z": exterior(ZZ),
        "dga_f2": dga_f2(),
    }
    for n, a in algebras.items():
        dump(f"algebra_{n}.json", algebra_to_json(a))
    dump("twist_identity_2.json", [[1, 0], [0, 1]])

    dump("esigma_fixed_point_f2.json", esigma_to_json(fixed_point_esigma(ground_field(F2))))
    dump("esigma_fixed_point_dual_numbers_f2.json", {"fixed_point": algebra_to_json(dual_numbers(F2))})

    dump("norm_z.json", {"module": module_to_json(FgModule.free(ZZ, 1)), "w": [[1]], "mul": [[[1]]], "unit": [1]})
    dump("norm_z2.json", {"module": {"ring": "Z", "gens": 1, "rels": [[2]]}, "w": [[1]], "mul": [[[1]]], "unit": [1]})

    # Two-column double complex Z --2--> Z with a horizontal map.
    dump("filtered_two_column.json", {
        "ring": "Z",
        "filtration": {"0": [0, 1], "1": [0, 1]},
        "d": {"1": [[2, 0], [1, 2]]},
    })
    dump("signs_koszul_table.json", {"pairs": [[1, 1, -1]], "default": 1})

    dump("simplicial_point.json", finsimp_to_json(point()))
    dump("simplicial_interval.json", _with_omega(delta1(), {"0": [[], "1"], "1": [[], "0"], "01": [[], "01"]}))
    dump("simplicial_circle.json", _with_omega(circle(), {"v": [[], "v"], "e": [[], "e"]}))
    m = build_models()
    dump("simplicial_o2.json", finsimp_to_json(m.o2))
    dump("simplicial_do2.json", finsimp_to_json(m.d_o2))
    print(f"wrote fixtures to {os.path.normpath(OUT)}")
    return 0


def _with_omega(x, omega):
    out = finsimp_to_json(x)
    out["omega"] = omega
    return out


if __name__ == "__main__":
    sys.exit(main())
