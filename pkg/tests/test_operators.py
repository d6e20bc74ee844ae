from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mvgegenbauer import operators as op
from mvgegenbauer.matpoly import MatrixPolynomial, max_coeff_diff, residual_max
from mvgegenbauer.mvop import monic_family
from mvgegenbauer.params import WeightParams
from mvgegenbauer.weight import weight_pol

GRID = [WeightParams(L, nu) for L in (1, 2, 3, 4) for nu in (0.5, 1.0, 2.3)]
ids = [p.label() for p in GRID]


@pytest.mark.parametrize("p", [WeightParams(L, nu) for L in (1, 2, 3) for nu in (0.6, 1.0, 2.3)], ids=str)
def test_eigen_equations(p):
    fam = monic_family(p, 8)
    D, E = op.build_D(p), op.build_E(p)
    for n in range(9):
        assert op.eigen_residual(D, fam[n], op.eigen_D(p, n)) <= 1e-10
        assert op.eigen_residual(E, fam[n], op.eigen_E(p, n)) <= 1e-10


@pytest.mark.parametrize("p", GRID, ids=ids)
def test_symmetry_residual_identities(p):
    for key, res in op.symmetry_residuals(p).items():
        assert residual_max(res) <= 1e-10, key
    assert op.boundary_residual(p) <= 1e-12


@pytest.mark.parametrize("p", GRID, ids=ids)
def test_pearson_and_nu_step(p):
    assert residual_max(op.pearson_residual(p)) <= 1e-10
    assert op.nu_step_residual(p).max_abs() <= 1e-10
    assert residual_max(op.nu_step_derivative_residual(p)) <= 1e-10
    assert op.darboux_residual(p) <= 1e-10
    assert op.operator_diff(op.d_phi_psi_combination(p), op.d_phi_psi_factored(p)) <= 1e-10


def exact_c(two_ell, nu):
    ell = Fraction(two_ell, 2)
    return (2 * nu + 1) * (two_ell + nu + 1) * ell ** 2 / (nu * (2 * nu + two_ell + 1) * (two_ell + nu) * (ell + nu))


def test_nu_step_constant_exact():
    # l = 1/2, nu = 1: 3 * 3 * (1/4) / (1 * 4 * 2 * 3/2) = 3/16
    assert exact_c(1, Fraction(1)) == Fraction(3, 16)
    assert op.nu_step_constant(WeightParams(1, 1.0)) == pytest.approx(3 / 16, rel=1e-15)
    for L, nu in [(2, Fraction(7, 3)), (5, Fraction(1, 2))]:
        assert op.nu_step_constant(WeightParams(L, float(nu))) == pytest.approx(float(exact_c(L, nu)), rel=1e-14)


def test_nu_step_fixes_the_constant():
    """Only c = 3/16 makes c W Phi = (1-x^2) W^(nu+1) at l = 1/2, nu = 1."""
    p = WeightParams(1, 1.0)
    phi, _ = op.build_phi_psi(p)
    lhs = weight_pol(p) * phi
    rhs = (MatrixPolynomial(np.array([np.eye(2), 0 * np.eye(2), -np.eye(2)]))) * weight_pol(p.shifted())
    assert max_coeff_diff(lhs * (3 / 16), rhs) <= 1e-13
    assert max_coeff_diff(lhs * 0.125, rhs) > 0.1


@given(st.integers(0, 2**32 - 1), st.sampled_from([(1, 0.7), (2, 1.0), (3, 2.3)]))
def test_operator_symmetry_random(seed, lp):
    p = WeightParams(*lp)
    rng = np.random.default_rng(seed)
    P = op.random_polynomial(rng, p.d, int(rng.integers(0, 4)))
    Q = op.random_polynomial(rng, p.d, int(rng.integers(0, 4)))
    from mvgegenbauer.quadrature import pair

    for O in (op.build_D(p), op.build_E(p)):
        scale = max(1.0, float(np.max(np.abs(pair(op.apply(O, P), Q, p)))))
        assert op.symmetry_defect(O, P, Q, p) <= 1e-9 * scale


@given(st.integers(0, 2**32 - 1))
def test_then_is_composition(seed):
    rng = np.random.default_rng(seed)
    p = WeightParams(2, 1.3)
    A, B = op.build_D(p), op.build_E(p)
    P = op.random_polynomial(rng, 3, 4)
    lhs = op.apply(B, op.apply(A, P))
    assert max_coeff_diff(lhs, op.apply(A.then(B), P)) <= 1e-11 * max(1.0, lhs.max_abs())


@pytest.mark.parametrize("p", GRID[:6], ids=ids[:6])
def test_commutant_conjugations(p):
    jd, je = op.j_conjugation_residuals(p)
    assert jd <= 1e-12 and je <= 1e-12
    rng = np.random.default_rng(0)
    P = op.random_polynomial(rng, p.d, 3)
    assert op.commutator_residual(p, P) <= 1e-10


def test_adjoint_identity(params):
    rng = np.random.default_rng(2)
    for _ in range(5):
        P = op.random_polynomial(rng, params.d, 3)
        Q = op.random_polynomial(rng, params.d, 2)
        from mvgegenbauer.matpoly import mp_diff
        from mvgegenbauer.quadrature import pair

        scale = max(1.0, float(np.max(np.abs(pair(mp_diff(P), Q, params.shifted())))))
        assert op.adjoint_defect(P, Q, params) <= 1e-9 * scale



def test_E_needs_matrix_case():
    with pytest.raises(ValueError):
        op.e_matrices(WeightParams(0, 1.0, scalar_ok=True))


def test_operator_json_and_arithmetic():
    p = WeightParams(1, 1.0)
    D = op.build_D(p)
    out = op.operator_matrices_json(D)
    assert set(out) == {"A0", "A1", "A2"}
    assert op.operator_diff(D + D, D.scale(2.0)) == 0.0
    assert op.operator_diff(D - D, op.identity_operator(2, scale=0.0)) == 0.0
    I = op.identity_operator(2)
    P = MatrixPolynomial(np.arange(8.0).reshape(2, 2, 2))
    assert max_coeff_diff(op.apply(I, P), P) == 0.0
    assert max_coeff_diff(op.apply(op.derivative_operator(2), P), MatrixPolynomial(P.coeffs[1:])) == 0.0
