import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mvgegenbauer import hyper2h1 as h
from mvgegenbauer import mvop, operators as op
from mvgegenbauer.matpoly import max_coeff_diff
from mvgegenbauer.params import WeightParams

GRID = [WeightParams(L, nu) for L in (1, 2, 3) for nu in (0.6, 1.0, 2.3)]


@pytest.mark.parametrize("p", GRID, ids=str)
def test_route_matches_recurrence(p):
    for n in range(6):
        assert max_coeff_diff(h.monic_P_2h1(p, n), mvop.monic(p, n)) <= 1e-8


@pytest.mark.parametrize("p", GRID, ids=str)
def test_alpha_independence(p):
    for n in range(6):
        assert max_coeff_diff(h.monic_P_2h1(p, n, math.sqrt(2)), h.monic_P_2h1(p, n, 1 / math.pi)) <= 1e-9


@given(st.sampled_from([(1, 0.8), (2, 1.0), (3, 2.5)]), st.floats(0.1, 3.0), st.integers(0, 6))
def test_eigenvalue_is_linear_in_alpha(lp, alpha, n):
    p = WeightParams(*lp)
    lam = h.eigen_D_alpha(p, alpha, n)
    np.testing.assert_allclose(lam, op.eigen_D(p, n) + alpha * op.eigen_E(p, n), atol=1e-11)
    for j in range(p.d):
        assert h.lambda_n_alpha(p, alpha, n, j) == pytest.approx(lam[j], abs=1e-11)


def test_lambda_index_check():
    with pytest.raises(ValueError):
        h.lambda_n_alpha(WeightParams(2, 1.0), 1.0, 0, 3)


@pytest.mark.parametrize("p", GRID, ids=str)
def test_u_variable_eigen_equations(p):
    D, _ = h.build_D_alpha(p, h.DEFAULT_ALPHA)
    for n in range(6):
        R = h.R_from_P(mvop.monic(p, n), n)
        np.testing.assert_allclose(R.leading(), np.eye(p.d), atol=1e-12)
        assert h.eigen_residual_u(D, R, h.eigen_D_alpha(p, h.DEFAULT_ALPHA, n)) <= 1e-10
        assert h.eigen_residual_u(h.build_D_tilde(p), R, op.eigen_D(p, n)) <= 1e-10
        assert h.eigen_residual_u(h.build_E_tilde(p), R, op.eigen_E(p, n)) <= 1e-10


def test_C_alpha_spectrum():
    for p in GRID:
        C, _, _ = h.alpha_matrices(p, h.DEFAULT_ALPHA)
        ev = np.sort(np.linalg.eigvals(C).real)
        np.testing.assert_allclose(ev, (2 * np.arange(p.d) + 2 * p.nu + 1) / 2, atol=1e-12)


def test_collision_gap_is_positive():
    assert h.collision_gap(WeightParams(3, 2.5), h.DEFAULT_ALPHA, 10) > 1e-6


@pytest.mark.parametrize("p", GRID, ids=str)
def test_subleading_and_X(p):
    for n in range(1, 7):
        R = h.R_from_P(mvop.monic(p, n), n)
        np.testing.assert_allclose(R.coeffs[n - 1], h.subleading_coefficient(p, n), atol=1e-12)
        np.testing.assert_allclose(h.x_from_subleading(p, n), mvop.recurrence_coefficients(p, n)[0], atol=1e-12)
    with pytest.raises(ValueError):
        h.subleading_coefficient(p, 0)


@given(st.sampled_from([(1, 0.8), (2, 1.7), (3, 2.5)]), st.integers(1, 5))
def test_bracket_identities(lp, n):
    p = WeightParams(*lp)
    for i in range(p.d):
        data = h.row_data(p, h.DEFAULT_ALPHA, n, i)
        assert h.bracket_recursion_defect(data, n + 1) <= 1e-12
        assert h.bracket_shift_defect(data, n) <= 1e-10
        assert h.derivative_parameter_defect(p, h.DEFAULT_ALPHA, n, i) <= 1e-12


def test_hypergeometric_data_rejects_integer_spectrum():
    with pytest.raises(ValueError):
        h.HypergeometricData(np.diag([1.0, -2.0]), np.eye(2), np.eye(2))


def test_termination_depends_on_degree():
    """The bracket of order n+1 kills the start vector only at the matching degree."""
    p = WeightParams(2, 1.3)
    data = h.row_data(p, h.DEFAULT_ALPHA, 3, 0)
    br = h.h2f1_bracket(data, 4)
    e = np.eye(p.d)[0]
    assert np.max(np.abs(br[4] @ np.linalg.solve(br[3], e))) < 1e-10
    assert np.max(np.abs(br[3] @ np.linalg.solve(br[2], e))) > 1e-3
