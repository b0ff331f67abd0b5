import json
import warnings
from importlib import resources

import pytest

from blockforge.classifier import (CELLS, CapWarning, GuardError, annihilation_check, brute_force_endok,
                                   candidate_tops, enumerate_endok, name_module, top_socle_disjoint)
from blockforge.repmod import Algebra, construct, end_dim, is_indecomposable, iso_test, projective


def golden(name):
    return json.loads((resources.files("blockforge") / "golden" / name).read_text())


def names(mods):
    return sorted(m.name for m in mods)


def test_sd2a1_matches_golden(sd4_report):
    g = golden("sd2a1_n4.json")
    assert sorted(sd4_report.names) == sorted(g["names"])
    assert {k: sorted(v) for k, v in sd4_report.partition.items()} == {k: sorted(v) for k, v in g["partition"].items()}


def test_q3b_matches_golden(q3b_report):
    g = golden("q3b_n4.json")
    assert len(q3b_report.modules) == g["count"] == 15
    assert sorted(q3b_report.names) == sorted(g["names"])


def test_klein_four(k4_report):
    assert k4_report.names == ["S"]
    assert k4_report.modules[0].d1 == 2


def test_cap_warning_for_modules_at_the_cap(q3b):
    with pytest.warns(CapWarning):
        rep = enumerate_endok(q3b, 4)
    assert rep.warnings


def test_names_rebuild_the_modules(sd4_report, q3b_report, sd4, q3b):
    for rep, alg in ((sd4_report, sd4), (q3b_report, q3b)):
        for c in rep.modules:
            assert c.named
            assert iso_test(construct(alg, c.name), c.representation)


def test_report_invariants(sd4_report, q3b_report, k4_report):
    for rep in (sd4_report, q3b_report, k4_report):
        mods = rep.modules
        for i, a in enumerate(mods):
            assert end_dim(a.representation) == 1
            assert is_indecomposable(a.representation)
            for b in mods[i + 1:]:
                assert not iso_test(a.representation, b.representation)
        cells = rep.partition
        assert set(CELLS) <= set(cells)
        flat = [x for v in cells.values() for x in v]
        assert sorted(flat) == sorted(rep.names)


def test_top_and_socle_disjoint(sd4_report, q3b_report):
    for rep in (sd4_report, q3b_report):
        for c in rep.modules:
            if c.representation.dim > 1:
                assert top_socle_disjoint(c.representation)


def test_d1_values(sd4_report, q3b_report):
    assert {c.d1 for c in sd4_report.modules} | {c.d1 for c in q3b_report.modules} <= {0, 1}
    assert sorted(sd4_report.partition["d1=1"]) == sorted(["S_0", "S_01", "S_10", "S_001", "S_100"])
    assert q3b_report.partition["d1=1"] == ["S_1"]


def test_tau3_only_for_ext_zero(sd4_report):
    for c in sd4_report.modules:
        assert (c.tau3 == "n/a") == (c.d1 != 0)


def test_independent_of_scalar(sd4_report, sd4c1):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CapWarning)
        rep = enumerate_endok(sd4c1, 4)
    assert sorted(rep.names) == sorted(sd4_report.names)
    assert rep.partition == sd4_report.partition


def test_brute_force_small_caps(k4, q3b, sd4):
    assert names(brute_force_endok(k4, 3)) == ["S"]
    assert names(brute_force_endok(q3b, 2)) == sorted(["S_0", "S_1", "S_2", "S_01", "S_10", "S_02", "S_20"])
    assert names(brute_force_endok(sd4, 1)) == ["S_0", "S_1"]


def test_brute_force_guards(sd4):
    with pytest.raises(GuardError):
        brute_force_endok(sd4, 6)
    gf4 = Algebra.family("SD2A1", 4, {"c": 2}, e=2)
    with pytest.raises(GuardError):
        brute_force_endok(gf4, 2)


def test_annihilation(sd4_report, q3b_report, sd4):
    assert all(annihilation_check(c.representation) for c in sd4_report.modules)
    assert all(annihilation_check(c.representation) for c in q3b_report.modules)
    assert not annihilation_check(projective(sd4, 1))


def test_annihilation_unsupported_family(k4_report):
    with pytest.raises(ValueError):
        annihilation_check(k4_report.modules[0].representation)


def test_candidate_tops(q3b):
    assert candidate_tops(q3b, 4) == [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1), (0, 1, 1)]
    assert (2, 0, 0) in candidate_tops(q3b, 2, all_tops=True)


def test_raw_names_for_unnamed_modules(sd4):
    from blockforge.repmod import uniserial
    name, ok = name_module(uniserial(sd4, ["1", "0", "1"]))
    assert (name, ok) == ("S_101", True)


def test_report_json(q3b_report):
    doc = q3b_report.to_json()
    assert doc["count"] == 15
    assert {m["name"] for m in doc["modules"]} == set(q3b_report.names)
    json.dumps(doc)


def test_invalid_cap(sd4):
    with pytest.raises(ValueError):
        enumerate_endok(sd4, 0)


@pytest.mark.parametrize("fixture,golden_file", [("sd4", "sd2a1_n4.json"), ("q3b", "q3b_n4.json"),
                                                 ("k4", "klein4.json")])
def test_no_new_classes_up_to_cap_six(request, fixture, golden_file):
    alg = request.getfixturevalue(fixture)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CapWarning)
        rep = enumerate_endok(alg, 6)
    assert sorted(rep.names) == sorted(golden(golden_file)["names"])
    assert not rep.warnings  # nothing at the cap any more


def test_all_tops_mode_agrees(q3b_report, q3b):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CapWarning)
        rep = enumerate_endok(q3b, 5, all_tops=True)
    assert sorted(rep.names) == sorted(q3b_report.names)


def test_extension_field_changes_nothing(sd4_report):
    # c = ω lies outside GF(2); the list and partition are the same over GF(4)
    alg = Algebra.family("SD2A1", 4, {"c": 2}, e=2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CapWarning)
        rep = enumerate_endok(alg, 4)
    assert sorted(rep.names) == sorted(sd4_report.names)
    assert rep.partition == sd4_report.partition
