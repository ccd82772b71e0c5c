import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvclass import catalog as cat
from curvclass import structure as sc
from curvclass import tensor as tc
from curvclass.btensor import build_tensor, catalog
from curvclass.engine import curvature_package
from curvclass.structure import LinearCondition, TensorField
from curvclass.tensor import Tensor

S3 = cat.sphere(3)
PP = cat.pp_wave("exp")
PP_CONST = cat.pp_wave("const")
SCHW = cat.schwarzschild(1.0)
RP3 = cat.random_polynomial(3, 0)
RP4 = cat.random_polynomial(4, 1)
FLAT = cat.flat_euclidean(4)


def pts(cm, k=3):
    return cm.sample_points(k)


# ------------------------------------------------------------------ flat

def test_check_flat_examples():
    assert sc.check_flat(TensorField(S3.field, "W"), pts(S3)).holds
    assert sc.check_flat(TensorField(SCHW.field, "R"), pts(SCHW)).verdict == "fails"
    for name in ["R", "C", "P", "W2", "T"]:
        assert sc.check_flat(TensorField(FLAT.field, name), pts(FLAT)).holds


def test_check_flat_single_tensor():
    rep = sc.check_flat(Tensor(np.full((3,) * 4, 1e-3)))
    assert rep.verdict == "fails" and rep.max_residual == pytest.approx(1e-3)


# ------------------------------------------------------------- symmetric

def test_check_symmetric_examples():
    assert sc.check_symmetric(TensorField(S3.field, "R"), pts(S3)).holds
    assert sc.check_symmetric(TensorField(PP.field, "R"), pts(PP)).verdict == "fails"
    assert sc.check_symmetric(TensorField(RP4.field, "g"), pts(RP4)).holds


# ------------------------------------------------------------ recurrence

def test_pp_wave_recurrence_form_is_du():
    for name in ["R", "W", "P"]:
        rep = sc.fit_recurrence(TensorField(PP.field, name), pts(PP))
        assert rep.holds and rep.max_residual <= 1e-8
        for i in range(len(rep.points)):
            assert np.allclose(rep.unknown("Pi", i), [1, 0, 0, 0], atol=1e-8)


def test_locally_symmetric_recurrence_is_zero():
    rep = sc.fit_recurrence(TensorField(S3.field, "R"), pts(S3))
    assert rep.holds
    assert np.abs(rep.unknown("Pi")).max() < 1e-10


def test_metric_pairing_is_degenerate_on_null_curvature():
    rep = sc.fit_recurrence(TensorField(PP.field, "R"), pts(PP, 2), pairing="metric")
    assert rep.verdict == "degenerate"
    with pytest.raises(ValueError):
        sc.fit_recurrence(TensorField(PP.field, "R"), pts(PP, 1), pairing="bogus")


def test_recurrence_two_code_paths_agree():
    field = TensorField(RP3.field, "R")
    direct = sc.fit_recurrence(field, pts(RP3))
    conds = []
    for p in pts(RP3):
        T, dT = field.values(p, 1)
        conds.append(sc._recurrence_condition(T, dT, []))
    via_lsq = sc.fit_linear_condition(conds, points=pts(RP3))
    for a, b in zip(direct.points, via_lsq.points):
        assert np.abs(np.asarray(a.unknowns["Pi"]) - np.asarray(b.unknowns["Pi"])).max() <= 1e-12
        assert abs(a.residual - b.residual) <= 1e-12
    assert direct.verdict == via_lsq.verdict == "fails"


# ------------------------------------------------------- linear conditions

def test_zero_fixed_term_gives_zero_unknowns():
    rng = np.random.default_rng(0)
    basis = tuple(("x", (a,), rng.normal(size=(3, 3))) for a in range(3))
    rep = sc.fit_linear_condition(LinearCondition(np.zeros((3, 3)), basis))
    assert rep.holds
    assert np.abs(rep.unknown("x")).max() == 0.0


def test_inconsistent_toy_system_residual_is_norm_of_fixed():
    fixed = np.zeros((2, 2))
    fixed[1, 1] = 0.5
    e = np.zeros((2, 2))
    e[0, 0] = 1.0
    rep = sc.fit_linear_condition(LinearCondition(fixed, (("x", (), e),), scale=1.0))
    assert rep.verdict == "fails"
    assert rep.max_residual == pytest.approx(0.5)
    assert rep.unknown("x") == 0.0


def test_underdetermined_system_is_flagged_min_norm():
    e = np.zeros((2, 2))
    e[0, 0] = 1.0
    fixed = -2 * e
    rep = sc.fit_linear_condition(LinearCondition(fixed, (("x", (), e), ("y", (), e))))
    pt = rep.points[0]
    assert rep.holds and pt.underdetermined
    assert pt.unknowns["x"] == pytest.approx(1.0) and pt.unknowns["y"] == pytest.approx(1.0)


def test_shape_mismatch_is_rejected():
    with pytest.raises(tc.TensorError):
        LinearCondition(np.zeros((2, 2)), (("x", (), np.zeros(3)),))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_fit_is_bit_reproducible(seed, m):
    rng = np.random.default_rng(seed)
    fixed = rng.normal(size=(3, 3, 3))
    basis = tuple(("x", (a,), rng.normal(size=(3, 3, 3))) for a in range(m))
    c = LinearCondition(fixed, basis)
    a = sc.fit_linear_condition(c).to_json()
    b = sc.fit_linear_condition(c).to_json()
    assert a == b


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_planted_solution_is_recovered(seed, m):
    rng = np.random.default_rng(seed)
    basis = tuple(("x", (a,), rng.normal(size=(4, 4))) for a in range(m))
    x = rng.normal(size=m)
    fixed = -sum(xi * t for xi, (_, _, t) in zip(x, basis))
    rep = sc.fit_linear_condition(LinearCondition(fixed, basis))
    assert rep.holds
    assert np.allclose(rep.unknown("x"), x, atol=1e-9)


# ---------------------------------------------------- generalized family

def test_generalized_family_examples():
    rep = sc.check_generalized_recurrent_family(TensorField(PP.field, "R"), pts(PP, 2))
    assert rep.holds
    assert np.abs(rep.unknown("Phi")).max() < 1e-8
    assert np.allclose(rep.unknown("Pi"), [1, 0, 0, 0], atol=1e-8)
    rep = sc.check_generalized_recurrent_family(TensorField(SCHW.field, "R"), pts(SCHW, 2), variant="hyper")
    assert rep.verdict == "degenerate"
    rep = sc.check_generalized_recurrent_family(TensorField(S3.field, "R"), pts(S3, 2))
    assert rep.holds
    assert np.abs(rep.unknown("Pi")).max() < 1e-8 and np.abs(rep.unknown("Phi")).max() < 1e-8


def test_generalized_family_variants():
    field = TensorField(S3.field, "R")
    for variant in ["weakly", "super"]:
        assert sc.check_generalized_recurrent_family(field, pts(S3, 2), variant=variant).holds
    rep = sc.check_generalized_recurrent_family(field, pts(S3, 2), variant="quasi", psi=[0.1, 0.2, 0.0])
    assert rep.holds
    with pytest.raises(ValueError):
        sc.check_generalized_recurrent_family(field, pts(S3, 1), variant="quasi")
    with pytest.raises(ValueError):
        sc.check_generalized_recurrent_family(field, pts(S3, 1), variant="nope")
    with pytest.raises(tc.TensorError):
        sc.check_generalized_recurrent_family(TensorField(S3.field, "S"), pts(S3, 1))


# --------------------------------------------------------- chaki, weak

def test_chaki_examples():
    rep = sc.check_chaki_pseudosymmetric(TensorField(S3.field, "R"), pts(S3, 2))
    assert rep.holds and np.abs(rep.unknown("Pi")).max() < 1e-10
    assert sc.check_chaki_pseudosymmetric(TensorField(RP3.field, "R"), pts(RP3, 2)).verdict == "fails"
    assert sc.check_chaki_pseudosymmetric(TensorField(FLAT.field, "R"), pts(FLAT, 2)).verdict == "degenerate"


def test_weak_symmetry_examples():
    assert sc.check_weak_symmetry(TensorField(PP.field, "R"), pts(PP, 2), type="III").holds
    for kind in ["I", "II", "III"]:
        rep = sc.check_weak_symmetry(TensorField(S3.field, "R"), pts(S3, 2), type=kind)
        assert rep.holds
        for vals in rep.points[0].unknowns.values():
            assert np.abs(np.asarray(vals)).max() < 1e-10
    assert sc.check_weak_symmetry(TensorField(RP3.field, "R"), pts(RP3, 2), type="I").verdict == "fails"
    with pytest.raises(ValueError):
        sc.check_weak_symmetry(TensorField(S3.field, "R"), pts(S3, 1), type="IV")


def test_weak_type_one_on_ricci_tensor():
    # three permutations-worth of unknowns on a (0,2) tensor; generic metric fails
    rep = sc.check_weak_symmetry(TensorField(RP3.field, "S"), pts(RP3, 2), type="I")
    assert len(rep.points[0].unknowns) == 6


# ------------------------------------------------ semi/pseudosymmetry

def pkg_at(cm, k=0, depth=0):
    return curvature_package(cm.field, cm.sample_points(k + 1)[k], depth)


def test_semisymmetric_examples():
    pkg = pkg_at(S3)
    assert sc.check_semisymmetric_type(pkg.R, pkg.R, pkg.metric).holds
    pkg = pkg_at(RP4)
    RC = tc.curvature_dot(pkg.R, build_tensor(catalog("C", 4), pkg), pkg.metric).data
    RK = tc.curvature_dot(pkg.R, build_tensor(catalog("K", 4), pkg), pkg.metric).data
    assert np.abs(RC - RK).max() <= 1e-10 * max(1.0, np.abs(RC).max())
    RW = tc.curvature_dot(pkg.R, build_tensor(catalog("W", 4), pkg), pkg.metric).data
    RR = tc.curvature_dot(pkg.R, pkg.R, pkg.metric).data
    assert np.abs(RW - RR).max() <= 1e-10 * max(1.0, np.abs(RR).max())
    assert not sc.check_semisymmetric_type(pkg.R, pkg.R, pkg.metric).holds


def test_skew_operator_kills_g_wedge_g():
    pkg = pkg_at(RP4)
    G = Tensor(0.5 * tc.kulkarni_nomizu(pkg.g, pkg.g).data)
    for name in ["R", "C", "K", "W"]:
        D = build_tensor(catalog(name, 4), pkg)
        assert sc.check_semisymmetric_type(D, G, pkg.metric, tol=1e-10).holds


def test_operator_on_g_wedge_S_is_not_zero():
    # D·(g∧S) = g∧(D·S) ≠ 0 in general, which is why D·M differs from D·R
    pkg = pkg_at(RP4)
    gS = tc.kulkarni_nomizu(pkg.g, pkg.S)
    assert not sc.check_semisymmetric_type(pkg.R, gS, pkg.metric).holds
    RM = tc.curvature_dot(pkg.R, build_tensor(catalog("M", 4), pkg), pkg.metric).data
    RR = tc.curvature_dot(pkg.R, pkg.R, pkg.metric).data
    assert np.abs(RM - RR).max() > 1e-6 * np.abs(RR).max()


def test_pseudosymmetric_type_fits_coefficient():
    pkg = pkg_at(RP4)
    G = Tensor(0.5 * tc.kulkarni_nomizu(pkg.g, pkg.g).data)
    # D_0 = -1.75 R, D_1 = R: the fitted c1 must undo the planted multiple
    R = pkg.R
    D0 = Tensor(-1.75 * np.asarray(R.data))
    rep = sc.check_pseudosymmetric_type([D0, R], R, pkg.metric)
    assert rep.holds and rep.unknown("c1") == pytest.approx(1.75)
    with pytest.raises(ValueError):
        sc.check_pseudosymmetric_type([R], R, pkg.metric)
    assert sc.check_semisymmetric_type(R, G, pkg.metric).holds


def test_deszcz_examples():
    pkg = pkg_at(PP_CONST)
    rep = sc.fit_deszcz_L(pkg.R, pkg.R, pkg.metric)
    assert rep.holds and rep.unknown("L") == 0.0
    # constant curvature: R·R and Q(g, R) both vanish, so L is undetermined
    pkg = pkg_at(S3)
    assert sc.fit_deszcz_L(pkg.R, pkg.R, pkg.metric).verdict == "degenerate"
    # on the recurrent plane wave R·R = 0 already, so L = 0 fits
    pkg = pkg_at(PP)
    rep = sc.fit_deszcz_L(pkg.R, pkg.R, pkg.metric)
    assert rep.holds and abs(float(rep.unknown("L"))) < 1e-8


def test_deszcz_recovers_planted_L():
    # G·T = Q(g, T), so D = 0.3 G fits with L = 0.3 for any T
    pkg = pkg_at(RP4)
    G = 0.5 * np.asarray(tc.kulkarni_nomizu(pkg.g, pkg.g).data)
    rep = sc.fit_deszcz_L(Tensor(0.3 * G), pkg.R, pkg.metric)
    assert rep.holds and float(rep.unknown("L")) == pytest.approx(0.3)
    rep = sc.fit_deszcz_L(pkg.R, pkg.R, pkg.metric, A=pkg.S)
    assert rep.condition == "ricci-generalized-pseudosymmetric"
    assert rep.verdict == "fails"


# ------------------------------------------------------------- order 2

def test_order2_symmetric_examples():
    rep = sc.check_order2_family(TensorField(S3.field, "R"), pts(S3, 2))
    assert rep.holds
    rep = sc.check_order2_family(TensorField(PP_CONST.field, "R"), pts(PP_CONST, 2))
    assert rep.holds


def test_order2_recurrent_on_plane_wave():
    field = TensorField(PP.field, "R")
    rep = sc.check_order2_family(field, pts(PP, 2), kind="recurrent")
    assert rep.holds and rep.max_residual <= 1e-7
    # hand-built solution: ∇Π = 0 for Π = du, so ∇²R = Π⊗Π⊗R
    for p in pts(PP, 2):
        T, dT, d2 = field.values(p, 2)
        du = np.array([1.0, 0, 0, 0])
        res = np.abs(sc.nabla2_xy(d2) - np.multiply.outer(T, np.outer(du, du))).max()
        assert res <= 1e-7 * max(1.0, np.abs(d2).max())


def test_ricci_identity_as_alpha_minus_one():
    field = TensorField(RP3.field, "R")
    for p in pts(RP3, 2):
        T, dT, d2 = field.values(p, 2)
        pkg = curvature_package(RP3.field, p)
        RR = tc.curvature_dot(pkg.R, pkg.R, pkg.metric).data
        assert np.abs(sc.nabla2_xy(d2) - d2 - RR).max() <= 1e-8 * max(1.0, np.abs(RR).max())
    with pytest.raises(ValueError):
        sc.check_order2_family(field, pts(RP3, 1), kind="bogus")


# ------------------------------------------------------------ reports

def test_report_json_shape():
    rep = sc.fit_recurrence(TensorField(PP.field, "R"), pts(PP, 2))
    js = rep.to_json()
    assert set(js) == {"condition", "metric", "tensor", "points", "verdict", "tolerance"}
    assert js["metric"] == "pp-wave:exp" and js["tensor"] == "R"
    assert set(js["points"][0]) >= {"coords", "residual", "unknowns"}


def test_verdict_precedence():
    live = sc.PointResult([], 1.0)
    dead = sc.PointResult([], 0.0, degenerate=True)
    ok = sc.PointResult([], 0.0)
    assert sc.ConditionReport("x", [live, dead], 1e-6).verdict == "fails"
    assert sc.ConditionReport("x", [ok, dead], 1e-6).verdict == "degenerate"
    assert sc.ConditionReport("x", [ok, ok], 1e-6).verdict == "holds"


def test_tolerance_from_environment(monkeypatch):
    monkeypatch.setenv("CURVCLASS_TOL", "0.5")
    rep = sc.check_flat(Tensor(np.full((3,) * 4, 0.1)))
    assert rep.tolerance == 0.5 and rep.holds
