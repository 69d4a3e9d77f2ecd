import json
import subprocess
import sys
from pathlib import Path

import pytest

from realhh.cli import COMMANDS, main
from realhh.mackey import green_from_json, mackey_from_json
from realhh.simplicial import finsimp_from_json

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "realhh" / "fixtures"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    assert code == 0, err
    return json.loads(out)


def test_hr_on_fixed_point_ring(capsys):
    code, out, _ = run(capsys, "hr", "--cap", "3", "esigma_fixed_point_f2.json")
    assert code == 0
    assert "0..2" in out
    rep = run_json(capsys, "hr", "--cap", "3", "esigma_fixed_point_f2.json")
    assert set(rep["homology"]) == {"0", "1", "2"}
    assert rep["trust_window"] == [0, 2]


def test_shadow_refuses_integer_coefficients(capsys):
    code, out, err = run(capsys, "bokstedt-shadow", "algebra_group_algebra_c2_z.json")
    assert code == 1 and out == ""
    assert "flatness surrogate" in err


def test_hopf_verify_all_green(capsys):
    code, out, _ = run(capsys, "hopf-verify")
    assert code == 0
    rep = run_json(capsys, "hopf-verify")
    assert rep["passed"]
    for section in ("strict", "pushouts", "homotopy"):
        assert rep[section] and all(e["passed"] for e in rep[section])
        assert all({"name", "passed", "witness"} <= set(e) for e in rep[section])


def test_hopf_mutations_flag(capsys):
    rep = run_json(capsys, "hopf-verify", "--mutations")
    assert rep["mutations"]["caught"] == rep["mutations"]["total"] > 0


def test_mackey_check_every_functor_fixture(capsys):
    for f in sorted(FIXTURES.glob("mackey_*.json")) + [FIXTURES / "green_burnside.json", FIXTURES / "esigma_fixed_point_dual_numbers_f2.json"]:
        rep = run_json(capsys, "mackey-check", str(f))
        assert rep["valid"], f.name


def test_box_round_trips(capsys):
    rep = run_json(capsys, "box", "mackey_burnside.json", "mackey_z6_plus_i3.json")
    m = mackey_from_json(rep["mackey"])
    assert m.check() == [] and rep["violations"] == []
    assert rep["invariants"] == run_json(capsys, "mackey-check", "mackey_z6_plus_i3.json")["invariants"]


@pytest.mark.parametrize("name,top", [("norm_z.json", (2, [])), ("norm_z2.json", (0, [4]))])
def test_norm_fixtures(capsys, name, top):
    rep = run_json(capsys, "norm", name)
    assert rep["invariants"]["top"] == {"rank": top[0], "torsion": top[1]}
    assert green_from_json(rep["green"]).check() == []


def test_norm_of_algebra_file(capsys):
    rep = run_json(capsys, "norm", "algebra_gaussian_z.json")
    assert rep["violations"] == []


@pytest.mark.parametrize("name", sorted(p.name for p in FIXTURES.glob("algebra_*.json") if "dga" not in p.name))
def test_hh_on_every_algebra(capsys, name):
    rep = run_json(capsys, "hh", "--cap", "3", name)
    assert set(rep["homology"]) == {"0", "1", "2"}


def test_hh_dual_numbers_table(capsys):
    rep = run_json(capsys, "hh", "--cap", "5", "algebra_dual_numbers_f2.json")
    assert [rep["homology"][str(n)]["total"] for n in range(4)] == [{"rank": 2, "torsion": []}] * 4
    _, out, _ = run(capsys, "hh", "--cap", "5", "algebra_dual_numbers_f2.json")
    assert "F2^2" in out


def test_twisted_hh_flags(capsys):
    a = run_json(capsys, "twisted-hh", "algebra_group_algebra_c2_f2.json")
    b = run_json(capsys, "twisted-hh", "--twist", "file:twist_identity_2.json", "algebra_group_algebra_c2_f2.json")
    assert a["homology"] == b["homology"]
    c = run_json(capsys, "twisted-hh", "--twist", "w", "algebra_gaussian_z.json")
    assert c["twist_order"] == 2 and "relative_green" in c


def test_ss_pages_two_column(capsys):
    rep = run_json(capsys, "ss-pages", "filtered_two_column.json")
    assert rep["comparison"]["matched"]


@pytest.mark.parametrize("cmd", ["bokstedt-shadow", "twisted-shadow"])
@pytest.mark.parametrize("name", ["algebra_f2.json", "algebra_dual_numbers_f2.json", "algebra_group_algebra_c2_f2.json"])
def test_shadows_match(capsys, cmd, name):
    rep = run_json(capsys, cmd, name)
    assert rep["comparison"]["matched"] and rep["checks_passed"]


def test_dg_shadow(capsys):
    rep = run_json(capsys, "bokstedt-shadow", "--cap", "2", "algebra_dga_f2.json")
    assert rep["comparison"]["matched"] and rep["notes"]


@pytest.mark.parametrize("name", sorted(p.name for p in FIXTURES.glob("simplicial_*.json")))
def test_sq_every_model(capsys, name):
    rep = run_json(capsys, "sq", name)
    assert rep["invariant"]
    y, _ = finsimp_from_json(rep["sq"])
    assert y.check() == []


def test_sign_file_and_ring_override(capsys):
    a = run_json(capsys, "hh", "--sign", "file:signs_koszul_table.json", "algebra_exterior_z.json")
    b = run_json(capsys, "hh", "algebra_exterior_z.json")
    assert a["homology"] == b["homology"]
    c = run_json(capsys, "hh", "--ring", "F2", "algebra_dual_numbers_z.json")
    assert c["ring"] == "F2"
    assert c["homology"]["1"]["total"] == {"rank": 2, "torsion": []}


def test_degree_window(capsys):
    rep = run_json(capsys, "hh", "--cap", "4", "--degrees", "1..2", "algebra_dual_numbers_f2.json")
    assert set(rep["homology"]) == {"1", "2"}


def test_fixtures_dir(capsys, tmp_path):
    (tmp_path / "mine.json").write_text((FIXTURES / "algebra_f2.json").read_text())
    assert run(capsys, "hh", "--fixtures-dir", str(tmp_path), "mine")[0] == 0


def test_malformed_json_cites_position(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"ring": "Z",\n "gens": 1,\n "rels": [[1,]]}')
    code, _, err = run(capsys, "hh", str(p))
    assert code == 2
    assert "line 3" in err and "column" in err


def test_schema_error_names_field(capsys, tmp_path):
    obj = json.loads((FIXTURES / "mackey_constant_z.json").read_text())
    del obj["tr"]
    p = tmp_path / "m.json"
    p.write_text(json.dumps(obj))
    code, _, err = run(capsys, "mackey-check", str(p))
    assert code == 2 and "tr" in err


@pytest.mark.parametrize(
    "argv",
    [["hh"], ["nope"], ["hh", "--cap", "0", "algebra_f2.json"], ["hh", "--ring", "Q", "algebra_f2.json"], ["hh", "--degrees", "3..1", "algebra_f2.json"], ["hh", "missing.json"], ["twisted-hh", "--twist", "bogus", "algebra_f2.json"]],
)
def test_bad_invocations_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_output_is_deterministic():
    argv = [sys.executable, "-m", "realhh", "box", "mackey_burnside.json", "mackey_sign_z.json", "--json"]
    outs = {subprocess.run(argv, capture_output=True, check=True).stdout for _ in range(2)}
    assert len(outs) == 1


def test_every_command_has_a_handler():
    from realhh.cli import HANDLERS

    assert set(COMMANDS) == set(HANDLERS)
