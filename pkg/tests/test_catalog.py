import json

import numpy as np
import pytest

from curvclass import catalog as cat
from curvclass.engine import curvature_package


@pytest.mark.parametrize("spec", cat.DEFAULT_NAMES)
def test_self_test_passes(spec):
    res = cat.self_test(cat.get(spec), count=4)
    assert res["ok"], res


def test_random_polynomial_is_reproducible():
    a, b = cat.random_polynomial(4, 7), cat.random_polynomial(4, 7)
    p = a.sample_points(1)[0]
    assert np.array_equal(a.field.at(p).g.data, b.field.at(p).g.data)
    c = cat.random_polynomial(4, 8)
    assert not np.array_equal(a.field.at(p).g.data, c.field.at(p).g.data)
    assert a.name == "random-polynomial:4:7"


def test_random_polynomial_is_curved_and_riemannian():
    cm = cat.random_polynomial(3, 0)
    for p in cm.sample_points(4):
        g = cm.field.at(p).g.data
        assert np.linalg.eigvalsh(np.asarray(g, dtype=float)).min() > 0
        assert np.abs(curvature_package(cm.field, p).R.data).max() > 1e-6


def test_sample_points_are_deterministic_and_in_box():
    cm = cat.schwarzschild(1.0)
    a, b = cm.sample_points(5), cm.sample_points(5)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    lo, hi = cm.field.box
    for p in a:
        assert np.all(p >= lo) and np.all(p <= hi)
    assert 3.0 <= min(p[1] for p in a) and max(p[1] for p in a) <= 10.0


def test_get_parses_arguments():
    assert cat.get("sphere:4:2").dim == 4
    assert cat.get("flrw:1,0.5,0.25").dim == 4
    with pytest.raises(KeyError):
        cat.get("torus:3")
    with pytest.raises(ValueError):
        cat.get("sphere:x")
    with pytest.raises(ValueError):
        cat.get("schwarzschild:1:2")
    with pytest.raises(KeyError):
        cat.get("pp-wave:sin")


def test_from_spec_builtin_and_polynomial(tmp_path):
    cm = cat.from_spec({"kind": "builtin", "name": "hyperbolic", "dim": 3, "params": {"n": 3}})
    assert cm.dim == 3
    with pytest.raises(ValueError):
        cat.from_spec({"kind": "builtin", "name": "hyperbolic", "dim": 4, "params": {"n": 3}})
    # g = dx² + (1 + x²) dy²
    spec = {"kind": "polynomial", "dim": 2, "params": {"components": [[[[1, [0, 0]]], []], [[], [[1, [0, 0]], [1, [2, 0]]]]]}}
    path = tmp_path / "m.json"
    path.write_text(json.dumps(spec))
    cm = cat.load_spec(str(path))
    g = cm.field.at([0.5, 0.1]).g.data
    assert np.allclose(g, [[1, 0], [0, 1.25]])
    with pytest.raises(ValueError):
        cat.from_spec({"kind": "mystery"})


def test_polynomial_metric_curvature_matches_closed_form():
    # g = dx² + f(x)² dy² with f = 1 + x²: Gaussian curvature K = -f''/f
    spec = {"kind": "polynomial", "dim": 2,
            "params": {"components": [[[[1, [0, 0]]], []], [[], [[1, [0, 0]], [2, [2, 0]], [1, [4, 0]]]]]}}
    cm = cat.from_spec(spec)
    x = 0.3
    pkg = curvature_package(cm.field, [x, 0.2])
    f = 1 + x * x
    K = -2.0 / f
    # R_0110 = K (g_00 g_11 - 0)
    assert pkg.R.data[0, 1, 1, 0] == pytest.approx(K * f * f, rel=1e-12)


def test_catalog_json():
    js = cat.get("pp-wave:exp").to_json()
    assert js["name"] == "pp-wave:exp" and js["dim"] == 4
    json.dumps(js)


def test_expected_claims_match_fixture_properties():
    assert cat.get("sphere:3:1").expected.constant_curvature == 1.0
    assert cat.get("schwarzschild:1").expected.ricci_flat
    assert cat.get("pp-wave:exp").expected.locally_symmetric is False
