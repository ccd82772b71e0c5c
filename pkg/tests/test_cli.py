import json
import time

import pytest

from curvclass.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


# -------------------------------------------------------------- classify

def test_classify_conformal(capsys):
    code, rep = run_json(capsys, "classify", "--named", "C", "--dim", "4")
    assert code == 0
    assert rep["class"] == 1 and rep["gct"] and rep["skew_endomorphism"]


def test_classify_riemann_proper(capsys):
    code, rep = run_json(capsys, "classify", "--named", "R", "--dim", "5")
    assert code == 0 and rep["class"] == 4 and rep["proper_gct"]


def test_inline_coefficients_match_named(capsys):
    _, a = run_json(capsys, "classify", "--a", "1,0,0,0,0,0,0,0,0,0,0", "--dim", "3")
    _, b = run_json(capsys, "classify", "--named", "R", "--dim", "3")
    a.pop("name"), b.pop("name")
    assert a == b


def test_parametrized_named_syntax(capsys):
    code, rep = run_json(capsys, "classify", "--named", "C*:a0=3,a2=-1", "--dim", "5")
    assert code == 0 and rep["class"] == 1
    code, rep = run_json(capsys, "classify", "--named", "W*:a0=1,b=1/4", "--dim", "4", "--verbatim")
    assert not rep["gct"]


def test_classify_human_output(capsys):
    code, out, _ = run(capsys, "classify", "--named", "C", "--dim", "4")
    assert code == 0
    assert "class: 1" in out
    assert "canonical form: 1 R + -1/2 g∧S + 1/12 r g∧g" in out


def test_coefficient_file(capsys, tmp_path):
    path = tmp_path / "b.json"
    path.write_text(json.dumps({"n": 4, "a": ["1", 0, 0, 0, 0, 0, 0, 0, "-1/12", "1/12", 0]}))
    code, rep = run_json(capsys, "classify", "--coeff-file", str(path))
    assert code == 0 and rep["class"] == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["classify", "--named", "nope", "--dim", "4"],
        ["classify", "--a", "1,2,3", "--dim", "4"],
        ["classify", "--named", "C"],
        ["classify", "--named", "C*:a0=1", "--dim", "4"],
        ["bogus"],
        [],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


# ------------------------------------------------------------------ eval

def test_eval_concircular_on_sphere(capsys):
    code, rep = run_json(capsys, "eval", "--named", "W", "--metric", "sphere:3:1")
    assert code == 0 and len(rep["points"]) == 8
    assert max(p["max_norm"] for p in rep["points"]) <= 1e-9


def test_eval_conformal_on_schwarzschild(capsys):
    code, rep = run_json(capsys, "eval", "--named", "C", "--metric", "schwarzschild:1", "--points", "3")
    assert code == 0
    assert max(p["minus_R"] for p in rep["points"]) <= 1e-8


def test_eval_flat_components(capsys):
    code, rep = run_json(capsys, "eval", "--named", "R", "--metric", "flat-euclidean:4", "--points", "2", "--components")
    assert code == 0
    for p in rep["points"]:
        assert p["max_norm"] == 0.0
        assert len(p["components"]) == 4


def test_eval_class_four_human_output(capsys):
    code, out, _ = run(capsys, "eval", "--named", "R", "--metric", "sphere:3:1", "--points", "1")
    assert code == 0 and "no class identity (class 4)" in out


def test_eval_dimension_mismatch(capsys):
    code, _, err = run(capsys, "eval", "--named", "W", "--dim", "4", "--metric", "sphere:3:1")
    assert code == 2 and "dimension" in err


def test_eval_metric_file(capsys, tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"kind": "builtin", "name": "sphere", "params": {"n": 3, "radius": 2.0}}))
    code, rep = run_json(capsys, "eval", "--named", "C", "--metric-file", str(path), "--points", "2")
    assert code == 0 and rep["metric"] == "sphere:3:2"


# ----------------------------------------------------------------- check

def test_check_recurrent_plane_wave(capsys):
    code, rep = run_json(capsys, "check", "recurrent", "--tensor", "R", "--metric", "pp-wave:exp", "--points", "3")
    assert code == 0 and rep["verdict"] == "holds"
    for p in rep["points"]:
        assert p["unknowns"]["Pi"] == pytest.approx([1, 0, 0, 0], abs=1e-8)


def test_check_semisym_sphere(capsys):
    code, rep = run_json(capsys, "check", "semisym", "--D", "R", "--tensor", "R", "--metric", "sphere:3:1", "--points", "3")
    assert code == 0 and rep["verdict"] == "holds"


def test_check_symmetric_metric(capsys):
    code, rep = run_json(capsys, "check", "symmetric", "--tensor", "g", "--metric", "random-polynomial:3:42", "--points", "3")
    assert code == 0 and rep["verdict"] == "holds"


def test_check_exit_codes(capsys):
    code, _, _ = run(capsys, "check", "symmetric", "--tensor", "R", "--metric", "pp-wave:exp", "--points", "2")
    assert code == 1
    code, _, _ = run(capsys, "check", "generalized-recurrent", "--variant", "hyper", "--metric", "schwarzschild:1", "--points", "2")
    assert code == 3
    code, _, err = run(capsys, "check", "nonsense", "--metric", "sphere:3:1")
    assert code == 2 and "unknown condition" in err
    code, _, _ = run(capsys, "check", "flat", "--metric", "nowhere:3")
    assert code == 2


def test_check_tolerance_and_env(capsys, monkeypatch):
    code, _, _ = run(capsys, "check", "symmetric", "--metric", "pp-wave:exp", "--points", "2", "--tol", "1e6")
    assert code == 0
    monkeypatch.setenv("CURVCLASS_TOL", "1e6")
    code, _, _ = run(capsys, "check", "symmetric", "--metric", "pp-wave:exp", "--points", "2")
    assert code == 0


def test_check_other_conditions_run(capsys):
    for argv in (
        ["check", "chaki", "--metric", "sphere:3:1"],
        ["check", "weakly-symmetric", "--type", "I", "--metric", "sphere:3:1"],
        ["check", "order2", "--kind", "recurrent", "--metric", "pp-wave:exp"],
        ["check", "pseudosym", "--metric", "pp-wave:const"],
        ["check", "generalized-recurrent", "--variant", "quasi", "--psi", "0.1,0,0", "--metric", "sphere:3:1"],
        ["check", "flat", "--tensor", "W", "--metric", "sphere:3:1"],
    ):
        code, rep = run_json(capsys, *argv, "--points", "2")
        assert code == 0, argv
        assert rep["verdict"] == "holds"


# ------------------------------------------------------- json and --out

def test_json_round_trip_is_idempotent(capsys):
    _, out, _ = run(capsys, "classify", "--named", "P*:a0=1,a2=1/2", "--dim", "4", "--format", "json")
    from curvclass.cli import dumps

    assert dumps(json.loads(out)) == out.strip()


def test_out_file(capsys, tmp_path):
    path = tmp_path / "rep.json"
    code, out, _ = run(capsys, "check", "recurrent", "--metric", "pp-wave:exp", "--points", "2", "--out", str(path))
    assert code == 0 and "holds" in out
    rep = json.loads(path.read_text())
    assert rep["verdict"] == "holds" and rep["condition"] == "recurrent"


# -------------------------------------------------------- catalog, verify

def test_catalog_listing(capsys):
    code, rep = run_json(capsys, "catalog")
    assert code == 0
    assert "pp-wave" in rep["families"] and "W3*" in rep["tensors"]
    assert rep["tensors"]["C*"] == ["a0", "a2"]


def test_catalog_self_test(capsys):
    code, rep = run_json(capsys, "catalog", "--self-test", "--points", "2")
    assert code == 0
    assert all(m["self_test"]["ok"] for m in rep["metrics"])


def test_verify_minimal_run_is_fast(capsys):
    start = time.perf_counter()
    code, out, _ = run(capsys, "verify-theorems", "--seed", "0", "--points", "1")
    elapsed = time.perf_counter() - start
    lines = [l for l in out.splitlines() if l.startswith(("PASS", "FAIL"))]
    assert len(lines) == 10
    assert elapsed < 10.0
    # exit 0 iff every block passes
    assert code == (0 if all(l.startswith("PASS") for l in lines) else 1)


def test_verify_block_selection_and_json(capsys, tmp_path):
    path = tmp_path / "v.json"
    code, rep = run_json(capsys, "verify-theorems", "--dims", "5,6", "--seed", "0", "--blocks", "2,3", "--points", "1", "--out", str(path))
    assert code == 0 and rep["passed"]
    assert [b["key"] for b in rep["blocks"]] == [2, 3]
    assert json.loads(path.read_text()) == rep


def test_verify_bad_dims(capsys):
    code, _, _ = run(capsys, "verify-theorems", "--dims", "2,3")
    assert code == 2
