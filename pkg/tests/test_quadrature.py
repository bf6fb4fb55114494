import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tempered_ldg.quadrature import (
    MAX_QUAD_POINTS,
    LegendreBasis,
    default_quad_order,
    gauss_legendre,
    legendre_eval,
)


def test_one_point_rule_is_midpoint():
    rule = gauss_legendre(1)
    assert rule.nodes == pytest.approx([0.0], abs=1e-15)
    assert rule.weights == pytest.approx([2.0], abs=1e-15)


def test_two_point_rule():
    rule = gauss_legendre(2)
    assert rule.nodes == pytest.approx([-1 / np.sqrt(3), 1 / np.sqrt(3)], abs=1e-15)
    assert rule.weights == pytest.approx([1.0, 1.0], abs=1e-15)


def test_five_point_rule_integrates_x8():
    rule = gauss_legendre(5)
    value = rule.integrate(rule.nodes**8)
    assert value == pytest.approx(2.0 / 9.0, rel=1e-13)


@pytest.mark.parametrize("q", range(1, MAX_QUAD_POINTS + 1))
def test_rule_invariants(q):
    rule = gauss_legendre(q)
    assert abs(rule.weights.sum() - 2.0) < 1e-14
    assert np.all(rule.weights > 0)
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.max(np.abs(rule.nodes + rule.nodes[::-1])) < 1e-14
    # exact for monomials up to degree 2q - 1
    for m in range(2 * q):
        exact = 0.0 if m % 2 else 2.0 / (m + 1)
        got = rule.integrate(rule.nodes**m)
        assert abs(got - exact) < 1e-13 * max(abs(exact), 1.0), (q, m)


@pytest.mark.parametrize("q", [1, 2, 3, 5, 8, 13, 21, 32])
def test_rule_matches_numpy_reference(q):
    x, w = np.polynomial.legendre.leggauss(q)
    rule = gauss_legendre(q)
    assert np.max(np.abs(rule.nodes - x)) < 1e-13
    assert np.max(np.abs(rule.weights - w)) < 1e-13


@pytest.mark.parametrize("q", [0, -3, 33])
def test_rule_rejects_bad_order(q):
    with pytest.raises(ValueError):
        gauss_legendre(q)


def test_legendre_small_values():
    vals, _ = legendre_eval(2, 0.0)
    assert vals == pytest.approx([1.0, 0.0, -0.5], abs=1e-15)
    vals, ders = legendre_eval(1, 0.7)
    assert vals == pytest.approx([1.0, 0.7], abs=1e-15)
    assert ders == pytest.approx([0.0, 1.0], abs=1e-15)
    vals, _ = legendre_eval(3, 0.5)
    assert vals[3] == pytest.approx(-0.4375, abs=1e-15)


def test_legendre_endpoint_values():
    k = 10
    vals_r, _ = legendre_eval(k, 1.0)
    vals_l, _ = legendre_eval(k, -1.0)
    for m in range(k + 1):
        assert abs(vals_r[m] - 1.0) < 1e-14
        assert abs(vals_l[m] - (-1.0) ** m) < 1e-14


def test_legendre_rejects_outside_reference_cell():
    with pytest.raises(ValueError):
        legendre_eval(3, 1.5)
    with pytest.raises(ValueError):
        legendre_eval(3, np.array([0.0, -1.0001]))


@pytest.mark.parametrize("k", [0, 1, 2, 3, 5])
def test_orthogonality(k):
    rule = gauss_legendre(k + 1)
    vals, _ = legendre_eval(k, rule.nodes)
    gram = (vals * rule.weights) @ vals.T
    expected = np.diag([2.0 / (2 * m + 1) for m in range(k + 1)])
    assert np.max(np.abs(gram - expected)) < 1e-13


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=-0.99, max_value=0.99), st.integers(min_value=1, max_value=8))
def test_derivatives_match_finite_differences(xi, k):
    h = 1e-6
    _, ders = legendre_eval(k, xi)
    vp, _ = legendre_eval(k, xi + h)
    vm, _ = legendre_eval(k, xi - h)
    fd = (vp - vm) / (2 * h)
    assert np.max(np.abs(ders - fd)) < 1e-7


def test_basis_traces():
    basis = LegendreBasis(3)
    assert basis.right_traces == pytest.approx([1, 1, 1, 1])
    assert basis.left_traces == pytest.approx([1, -1, 1, -1])
    with pytest.raises(ValueError):
        LegendreBasis(-1)


def test_default_quad_order():
    assert default_quad_order(0) == 6
    assert default_quad_order(4) == 6
    assert default_quad_order(5) == 7
