import numpy as np
import pytest
from hypothesis import given, strategies as st

from mvgegenbauer import hyper2h1 as h
from mvgegenbauer import mvop, operators as op, racah
from mvgegenbauer.matpoly import MatrixPolynomial, max_coeff_diff, mp_invert_unipotent_lower
from mvgegenbauer.params import WeightParams
from mvgegenbauer.weight import ldu_factors

GRID = [WeightParams(L, nu) for L in (1, 2, 3) for nu in (0.6, 1.3, 2.5)]


@pytest.mark.parametrize("p", GRID, ids=str)
def test_routes(p):
    for n in range(6):
        P = mvop.monic(p, n)
        assert max_coeff_diff(racah.monic_P_racah(p, n), P) <= 1e-9
        assert max_coeff_diff(racah.monic_P_entries(p, n), P) <= 1e-9
        assert racah.excess_degree(p, n) <= 1e-9
        assert racah.pl_entries_residual(p, P, n) <= 1e-9


@pytest.mark.parametrize("p", GRID, ids=str)
def test_l_inverse(p):
    assert max_coeff_diff(racah.l_inverse(p), mp_invert_unipotent_lower(ldu_factors(p).L)) <= 1e-10


def test_degenerate_nu_rejected():
    with pytest.raises(ValueError):
        racah.entries_via_racah(WeightParams(2, 0.5), 2, 0, 0)
    # the matrix route stays available there
    p = WeightParams(2, 0.5)
    assert max_coeff_diff(racah.monic_P_racah(p, 3), mvop.monic(p, 3)) <= 1e-9


@pytest.mark.parametrize("p", GRID, ids=str)
def test_conjugated_operators(p):
    rng = np.random.default_rng(7)
    G = MatrixPolynomial(rng.standard_normal((4, p.d, p.d)), "u")
    assert max_coeff_diff(racah.conjugated_action(p, G), racah.diagonal_action(p, G)) <= 1e-9
    assert op.operator_diff(racah.build_D0(p), racah.build_D0_closed(p)) <= 1e-10
    calD = racah.diagonal_operator(p).operator()
    calE = racah.calE_operator(p)
    assert max_coeff_diff(racah.conjugated_action(p, G, h.build_E_tilde(p)), op.apply(calE, G)) <= 1e-9
    assert max_coeff_diff(op.apply(calE, op.apply(calD, G)), op.apply(calD, op.apply(calE, G))) <= 1e-9


@pytest.mark.parametrize("p", GRID, ids=str)
def test_calR(p):
    for n in range(6):
        R = h.R_from_P(mvop.monic(p, n), n)
        cR = racah.calR(p, n)
        assert max_coeff_diff(cR, R * racah.build_M(p)) <= 1e-10
        lam = racah.eigen_calD(p, n)
        calD = racah.diagonal_operator(p).operator()
        assert max_coeff_diff(op.apply(calD, cR), MatrixPolynomial(np.diag(lam) @ cR.coeffs, "u", p.d)) <= 1e-9


@pytest.mark.parametrize("p", GRID, ids=str)
def test_coefficient_rows(p):
    for n in range(6):
        rc = racah.racah_coefficients(p, n)
        lam = racah.eigen_calD(p, n)
        mu = racah.mu_n(p, n)
        for k in range(p.d):
            ck = rc.c[k]
            assert np.max(np.abs(ck @ racah.N_matrix(p, lam[k]) - mu[k] * ck)) <= 1e-9 * np.max(np.abs(ck))
            assert racah.ck_recurrence_residual(p, n, k) <= 1e-10
            assert racah.c_k0_step_residual(p, n, k) <= 1e-12
            assert racah.sign_step_residual(p, n, k) <= 1e-14
            c0 = racah.c_k0_from_recurrence(p, n, k)
            assert np.sign(c0) == (-1) ** n
            assert c0 * c0 == pytest.approx(racah.c_k0_modulus_squared(p, n, k), rel=1e-12)
            H = mvop.norm_matrix(p, n)[k, k]
            assert racah.modulus_from_orthogonality(p, n, k, H) == pytest.approx(
                racah.c_k0_modulus_squared(p, n, k), rel=1e-12)
            for i in range(k):
                s, size = racah.final_vanishing_sum(p, n, k, i)
                assert abs(s) <= 1e-10 * size
        np.testing.assert_allclose(np.diag(racah.norm_from_coefficients(p, n)),
                                   np.diag(mvop.norm_matrix(p, n)), rtol=1e-12)


@given(st.sampled_from([(2, 1.3), (3, 0.6), (4, 2.5)]), st.integers(0, 6))
def test_racah_orthogonality(lp, N):
    p = WeightParams(*lp)
    G = racah.racah_gram(p, N)
    diag = np.array([racah.racah_norm(p, N - k, k) for k in range(G.shape[0])])
    assert np.max(np.abs(G - np.diag(diag))) <= 1e-10 * np.max(np.abs(diag))
