import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mvgegenbauer.matpoly import (
    MatrixPolynomial, WeightedMatrixFunction, dumps, linear, max_coeff_diff, mp_change_var,
    mp_diff, mp_invert_unipotent_lower, one_minus_x2, wmf_diff,
)

finite = st.floats(-4, 4, allow_nan=False, allow_infinity=False)


def polys(d=2, max_len=4):
    return st.integers(1, max_len).flatmap(
        lambda n: arrays(np.float64, (n, d, d), elements=finite)).map(lambda c: MatrixPolynomial(c, "x", d))


@given(polys(), polys(), polys())
def test_product_associative(a, b, c):
    assert max_coeff_diff((a * b) * c, a * (b * c)) <= 1e-10 * max(1.0, (a * b * c).max_abs())


@given(polys(), polys(), polys())
def test_distributive(a, b, c):
    assert max_coeff_diff(a * (b + c), a * b + a * c) <= 1e-11 * max(1.0, (a * (b + c)).max_abs(), 64)


@given(polys(), polys())
def test_transpose_reverses_product(a, b):
    assert max_coeff_diff((a * b).T(), b.T() * a.T()) <= 1e-12 * max(1.0, (a * b).max_abs())


@given(polys(), st.floats(-1, 1))
def test_evaluation_is_multiplicative(a, x):
    b = a.T()
    np.testing.assert_allclose((a * b)(x), a(x) @ b(x), atol=1e-9)


@given(polys(), polys())
def test_leibniz(a, b):
    lhs = mp_diff(a * b)
    rhs = mp_diff(a) * b + a * mp_diff(b)
    assert max_coeff_diff(lhs, rhs) <= 1e-10 * max(1.0, lhs.max_abs())


@given(polys())
def test_change_var_is_involution(a):
    back = mp_change_var(mp_change_var(a))
    assert back.var == "x"
    assert max_coeff_diff(back, a) <= 1e-11 * max(1.0, a.max_abs()) * 8


@given(polys(), st.floats(0, 1))
def test_change_var_values(a, u):
    np.testing.assert_allclose(mp_change_var(a)(u), a(1 - 2 * u), atol=1e-9)


@given(polys(3))
def test_json_roundtrip_is_exact(a):
    b = MatrixPolynomial.from_json(a.to_json())
    assert b == a


def test_dumps_uses_17_digits():
    text = dumps({"v": 0.1, "n": 3, "arr": np.array([1 / 3])})
    assert '"v": 0.10000000000000001' in text and '"n": 3' in text
    assert json.loads(text)["arr"][0] == 1 / 3
    with pytest.raises(ValueError):
        dumps({"bad": float("nan")})


def test_trimming_and_zero():
    p = MatrixPolynomial(np.array([np.eye(2), np.zeros((2, 2)), 1e-16 * np.eye(2)]))
    assert p.degree == 0
    z = p - p
    assert z.is_zero() and z.degree == -1 and z.max_abs() == 0.0
    with pytest.raises(ValueError):
        MatrixPolynomial(np.zeros((0, 2, 2)))


def test_ndarray_left_multiplication_is_matrix_product():
    A = np.array([[0.0, 1.0], [2.0, 0.0]])
    p = linear(np.eye(2), np.diag([1.0, 3.0]))
    q = A * p
    np.testing.assert_allclose(q.coeffs[1], A @ np.diag([1.0, 3.0]))


def test_variable_mismatch_rejected():
    with pytest.raises(ValueError):
        MatrixPolynomial.identity(2, "x") + MatrixPolynomial.identity(2, "u")
    with pytest.raises(ValueError):
        MatrixPolynomial.identity(2, "y")


def test_unipotent_inverse():
    rng = np.random.default_rng(4)
    c = np.zeros((3, 3, 3))
    c[0] = np.eye(3)
    for k in range(3):
        c[k] += np.tril(rng.standard_normal((3, 3)), -1)
    L = MatrixPolynomial(c)
    Li = mp_invert_unipotent_lower(L)
    assert max_coeff_diff(L * Li, MatrixPolynomial.identity(3)) < 1e-12


@given(st.floats(0.1, 4), polys(2, 3), st.floats(-0.9, 0.9))
def test_weighted_derivative_matches_finite_difference(s, q, x):
    f = WeightedMatrixFunction(s, q)
    h = 1e-6
    fd = (f(x + h) - f(x - h)) / (2 * h)
    np.testing.assert_allclose(wmf_diff(f)(x), fd, atol=1e-4 * max(1.0, q.max_abs()) * 10)


def test_weighted_lowering():
    f = WeightedMatrixFunction(1.5, MatrixPolynomial.identity(2))
    g = f.lowered(0.5)
    assert max_coeff_diff(g.poly, one_minus_x2(2)) == 0.0
    with pytest.raises(ValueError):
        f.lowered(1.2)


def test_dumps_list_of_arrays():
    text = dumps({"rows": [np.array([1.0, 0.1]), np.array([2.0, 3.0])]})
    assert json.loads(text) == {"rows": [[1.0, 0.1], [2.0, 3.0]]}


def test_dumps_numpy_scalars():
    assert dumps([np.bool_(True), np.float64(0.5), np.int64(3), None]) == "[true, 0.5, 3, null]"
