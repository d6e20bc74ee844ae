import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mvgegenbauer.matpoly import MatrixPolynomial
from mvgegenbauer.params import WeightParams
from mvgegenbauer.quadrature import (
    gauss_rule, jacobi_matrix, moment, pair, pair_with_weight, rule_size_for, total_mass,
)
from mvgegenbauer.weight import weight_pol


@pytest.mark.parametrize("nu", [0.5, 1.0, 2.3, 5.0, 0.1])
@pytest.mark.parametrize("N", [1, 3, 8, 20])
def test_moment_exactness(nu, N):
    rule = gauss_rule(nu, N)
    for k in range(2 * N):
        m = moment(nu, k)
        q = float(rule.integrate(rule.nodes ** k))
        if k % 2:
            assert abs(q) <= 1e-14 * moment(nu, k - 1)
        else:
            assert q == pytest.approx(m, rel=1e-12)


def test_chebyshev_u_closed_form():
    N = 9
    rule = gauss_rule(1.0, N)
    k = np.arange(1, N + 1)
    theta = k * math.pi / (N + 1)
    nodes = np.sort(np.cos(theta))
    weights = (math.pi / (N + 1) * np.sin(theta) ** 2)[np.argsort(np.cos(theta))]
    np.testing.assert_allclose(rule.nodes, nodes, atol=1e-13)
    np.testing.assert_allclose(rule.weights, weights, atol=1e-13)


def test_two_point_legendre():
    rule = gauss_rule(0.5, 2)
    np.testing.assert_allclose(rule.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-13)
    np.testing.assert_allclose(rule.weights, [1.0, 1.0], atol=1e-13)


@given(st.floats(0.05, 8.0))
def test_total_mass_is_zeroth_moment(nu):
    assert total_mass(nu) == pytest.approx(moment(nu, 0), rel=1e-13)
    assert float(np.sum(gauss_rule(nu, 4).weights)) == pytest.approx(total_mass(nu), rel=1e-13)


def test_rule_symmetry_and_jacobi_matrix():
    rule = gauss_rule(2.3, 7)
    np.testing.assert_array_equal(rule.nodes, -rule.nodes[::-1])
    ev = np.linalg.eigvalsh(jacobi_matrix(2.3, 7))
    np.testing.assert_allclose(ev, rule.nodes, atol=1e-14)
    assert rule.exact_degree == 13


def test_rule_size():
    for deg in range(0, 30):
        assert 2 * rule_size_for(deg) - 1 >= deg


def test_rule_rejects_bad_input():
    with pytest.raises(ValueError):
        gauss_rule(1.0, 0)
    with pytest.raises(ValueError):
        gauss_rule(-1.0, 3)


def test_pairing_is_hermitian_form():
    p = WeightParams(2, 1.4)
    rng = np.random.default_rng(1)
    P = MatrixPolynomial(rng.standard_normal((3, 3, 3)))
    Q = MatrixPolynomial(rng.standard_normal((2, 3, 3)))
    np.testing.assert_allclose(pair(P, Q, p), pair(Q, P, p).T, atol=1e-12)
    G = pair(P, P, p)
    assert np.all(np.linalg.eigvalsh(0.5 * (G + G.T)) > 0)
    np.testing.assert_allclose(pair_with_weight(P, Q, weight_pol(p), 1.4), pair(P, Q, p), atol=1e-13)


def test_pairing_rejects_u_variable():
    p = WeightParams(1, 1.0)
    with pytest.raises(ValueError):
        pair(MatrixPolynomial.identity(2, "u"), MatrixPolynomial.identity(2, "u"), p)
