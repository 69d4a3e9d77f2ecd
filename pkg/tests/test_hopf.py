import pytest

from oracles import simplicial_homology
from realhh.hopf import build_maps, build_models, report_passed, run_mutations, verify_all, verify_homotopy_level, wrong_delta_prime


@pytest.fixture(scope="module")
def models():
    m = build_models()
    return m, build_maps(m)


def test_all_sections_pass(models):
    report = verify_all(*models)
    assert set(report) == {"strict", "pushouts", "homotopy"}
    for sec, entries in report.items():
        assert entries, sec
        failed = [e["name"] for e in entries if not e["passed"]]
        assert not failed, failed
    assert report_passed(report)


def test_entries_have_stable_shape(models):
    for entries in verify_all(*models).values():
        for e in entries:
            assert set(e) >= {"name", "passed", "witness"}


def test_model_homology_by_oracle(models):
    m, _ = models
    for x in (m.o2, m.d_o2):
        faces = {c: [f[1] for f in fs] for c, fs in x.faces.items()}
        h = simplicial_homology({n: list(cs) for n, cs in x.cells.items()}, faces)
        assert h == {0: (2, ()), 1: (2, ())}


def test_pi_invertible_is_reported(models):
    names = {e["name"]: e["passed"] for e in verify_all(*models)["homotopy"]}
    assert names["H_0(pi) is invertible over Z"] and names["H_1(pi) is invertible over Z"]


def test_wrong_coproduct_is_caught(models):
    m, s = models
    entries = verify_homotopy_level(m, s, wrong_delta_prime(m, s))
    assert any(not e["passed"] for e in entries)


def test_every_single_entry_mutation_is_caught():
    muts = run_mutations()
    assert len(muts) == 714
    missed = [(r["map"], r["cell"], r["image"]) for r in muts if not r["caught_by"]]
    assert not missed
