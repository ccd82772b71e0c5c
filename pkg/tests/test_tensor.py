from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvclass import tensor as tc
from curvclass.tensor import Metric, Tensor, TensorError


def rand_sym(rng, n, shift=0.0):
    a = rng.normal(size=(n, n))
    return a + a.T + shift * np.eye(n)


def rand_metric(rng, n):
    return Metric.from_array(rand_sym(rng, n, 3 * n))


def frac_tensor(rng, n, k):
    data = np.empty((n,) * k, dtype=object)
    for idx in np.ndindex(data.shape):
        data[idx] = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 5)))
    return Tensor(data)


def test_tensor_shape_validation():
    with pytest.raises(TensorError):
        Tensor(np.zeros((3, 4)))
    with pytest.raises(TensorError):
        Tensor(np.array(1.0))
    t = Tensor(np.zeros((3, 3, 3)), contravariant=1)
    assert t.valence == (1, 2)
    assert not t.data.flags.writeable


def test_json_round_trip_float_and_rational():
    rng = np.random.default_rng(0)
    t = Tensor(rng.normal(size=(3, 3, 3)))
    back = Tensor.from_json(t.to_json())
    assert np.array_equal(back.data, t.data)
    q = frac_tensor(rng, 3, 2)
    back = Tensor.from_json(q.to_json())
    assert back.scalar_kind == "rational"
    assert all(a == b for a, b in zip(back.flat, q.flat))


def test_metric_validation():
    with pytest.raises(TensorError):
        Metric.from_array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(TensorError):
        Metric.from_array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(TensorError):
        Metric.from_array([[Fraction(1), Fraction(1)], [Fraction(1), Fraction(1)]], kind="rational")


def test_rational_metric_inverse_is_exact():
    g = np.array([[2, 1, 0], [1, 3, 1], [0, 1, 4]], dtype=object)
    m = Metric.from_array(g, kind="rational")
    prod = np.dot(m.g.data, m.g_inv.data)
    assert all(prod[i, j] == (1 if i == j else 0) for i in range(3) for j in range(3))


def test_permute_moves_slots():
    rng = np.random.default_rng(1)
    T = Tensor(rng.normal(size=(3, 3, 3)))
    P = tc.permute(T, [2, 0, 1])
    # slot 0 -> 2, 1 -> 0, 2 -> 1
    assert P.data[1, 2, 0] == T.data[0, 1, 2]
    with pytest.raises(TensorError):
        tc.permute(T, [0, 0, 1])


def test_metric_contract_euclidean_is_trace():
    rng = np.random.default_rng(2)
    T = Tensor(rng.normal(size=(4, 4, 4)))
    out = tc.metric_contract(T, 0, 2, Metric.euclidean(4))
    assert np.allclose(out.data, np.einsum("aja->j", T.data))
    with pytest.raises(TensorError):
        tc.metric_contract(T, 2, 1, Metric.euclidean(4))


def test_kulkarni_nomizu_has_curvature_symmetries():
    rng = np.random.default_rng(3)
    A, E = Tensor(rand_sym(rng, 4)), Tensor(rand_sym(rng, 4))
    res = tc.gct_symmetry_residuals(tc.kulkarni_nomizu(A, E))
    assert max(res.values()) < 1e-12
    # symmetric in its two arguments
    assert np.allclose(tc.kulkarni_nomizu(A, E).data, tc.kulkarni_nomizu(E, A).data)


def test_half_g_wedge_g_is_unit_sphere_pattern():
    g = Metric.euclidean(3).g
    G = 0.5 * tc.kulkarni_nomizu(g, g).data
    # R_ijkl = g_il g_jk - g_ik g_jl
    assert G[0, 1, 1, 0] == 1.0
    assert G[0, 1, 0, 1] == -1.0


def test_curvature_dot_of_metric_vanishes():
    rng = np.random.default_rng(4)
    m = rand_metric(rng, 4)
    G = Tensor(0.5 * tc.kulkarni_nomizu(m.g, m.g).data)
    D = Tensor(tc.kulkarni_nomizu(Tensor(rand_sym(rng, 4)), m.g).data)
    assert tc.max_norm(tc.curvature_dot(D, m.g, m)) < 1e-12
    assert tc.max_norm(tc.curvature_dot(G, m.g, m)) < 1e-12


def test_curvature_dot_on_scalar_is_zero():
    m = Metric.euclidean(3)
    out = tc.curvature_dot(Tensor(np.zeros((3,) * 4)), Tensor(np.array(2.0), 3), m)
    assert out.rank == 2 and tc.max_norm(out) == 0.0


def test_tachibana_identity_rational_small():
    rng = np.random.default_rng(5)
    g = np.array([[2, 1, 0], [1, 2, 0], [0, 0, 1]], dtype=object)
    m = Metric.from_array(g, kind="rational")
    G = tc.kulkarni_nomizu(m.g, m.g) * Fraction(1, 2)
    for k in (1, 2, 3):
        T = frac_tensor(rng, 3, k)
        assert tc.is_zero(tc.q_operator(m.g, T) - tc.curvature_dot(G, T, m))


def test_oneform_action_on_metric():
    # (Π_X g)(Y, Z) = -Π(Y) g(X, Z) - Π(Z) g(Y, X)
    m = Metric.euclidean(3)
    Pi = Tensor(np.array([1.0, 2.0, 3.0]))
    out = tc.oneform_action(Pi, m.g).data
    expected = -(np.einsum("y,xz->yzx", Pi.data, np.eye(3)) + np.einsum("z,yx->yzx", Pi.data, np.eye(3)))
    assert np.allclose(out, expected)


def test_metric_inner_can_vanish_on_null_tensor():
    m = Metric.from_array(np.diag([-1.0, 1.0]))
    null = Tensor(np.array([1.0, 1.0]))
    assert tc.metric_inner(null, null, m) == 0.0
    assert tc.component_inner(null, null) == 2.0


def test_is_zero_modes():
    assert tc.is_zero(Tensor(np.full((2, 2), 1e-12)))
    assert not tc.is_zero(Tensor(np.full((2, 2), 1e-6)))
    assert tc.is_zero(Tensor(np.full((2, 2), 1e-6)), scale=1e4)
    q = Tensor(np.array([Fraction(0), Fraction(1, 10**12)], dtype=object))
    assert not tc.is_zero(q)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 5), st.integers(1, 3))
def test_tachibana_identity_property(seed, n, k):
    rng = np.random.default_rng(seed)
    m = rand_metric(rng, n)
    T = Tensor(rng.normal(size=(n,) * k))
    G = Tensor(0.5 * tc.kulkarni_nomizu(m.g, m.g).data)
    diff = tc.q_operator(m.g, T) - tc.curvature_dot(G, T, m)
    assert tc.max_norm(diff) <= 1e-10 * max(1.0, tc.max_norm(T))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 4))
def test_contraction_commutes_with_permutation(seed, n):
    rng = np.random.default_rng(seed)
    m = rand_metric(rng, n)
    T = Tensor(rng.normal(size=(n,) * 3))
    a = tc.metric_contract(T, 0, 1, m)
    b = tc.metric_contract(tc.permute(T, [1, 0, 2]), 0, 1, m)
    assert np.allclose(a.data, b.data)


def test_permute_identity_and_involution():
    T = frac_tensor(np.random.default_rng(3), 3, 4)
    assert np.array_equal(tc.permute(T, [0, 1, 2, 3]).data, T.data)
    sigma = [1, 0, 3, 2]
    assert np.array_equal(tc.permute(tc.permute(T, sigma), sigma).data, T.data)
    with pytest.raises(TensorError):
        tc.permute(T, [0, 0, 1, 2])


def test_linear_combine_examples():
    g = Metric.from_array(np.eye(3)).g
    assert np.allclose(tc.linear_combine([(2, g), (3, g)]).data, 5 * np.eye(3))
    T = frac_tensor(np.random.default_rng(4), 3, 3)
    assert tc.is_zero(tc.linear_combine([(1, T), (-1, T)]))


def test_trace_of_metric_is_dimension():
    m = Metric.from_array(np.diag([-1.0, 1.0, 1.0, 1.0]))
    assert float(tc.metric_contract(m.g, 0, 1, m).data) == pytest.approx(4.0)


def test_kn_of_metric_with_itself():
    m = Metric.from_array(np.eye(3))
    G = tc.kulkarni_nomizu(m.g, m.g).data
    assert G[0, 1, 0, 1] == -2 and G[0, 1, 1, 0] == 2


def test_q_operator_antisymmetry_and_metric():
    rng = np.random.default_rng(5)
    m = rand_metric(rng, 3)
    A = Tensor(rand_sym(rng, 3))
    T = Tensor(rng.normal(size=(3, 3)))
    assert tc.is_zero(tc.q_operator(m.g, m.g), tol=1e-12)
    lhs = tc.q_operator(A, T).data
    assert np.allclose(lhs, -np.swapaxes(lhs, -1, -2))


def test_oneform_action_rank_one_and_zero_form():
    rng = np.random.default_rng(6)
    Pi = Tensor(rng.normal(size=3))
    w = Tensor(rng.normal(size=3))
    out = tc.oneform_action(Pi, w).data
    assert np.allclose(out, -np.outer(Pi.data, w.data))
    assert tc.is_zero(tc.oneform_action(Tensor(np.zeros(3)), w))
