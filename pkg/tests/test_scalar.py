import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from scipy.special import eval_gegenbauer
from hypothesis import given, strategies as st

from mvgegenbauer import scalar
from mvgegenbauer.params import WeightParams
from mvgegenbauer.quadrature import gauss_rule


def power_sum_gegenbauer(n, lam):
    """Ascending coefficients of C_n^(lam) from sum_k (-1)^k (lam)_{n-k}/(k!(n-2k)!) (2x)^{n-2k}."""
    c = [Fraction(0)] * (n + 1)
    for k in range(n // 2 + 1):
        poch = Fraction(1)
        for i in range(n - k):
            poch *= lam + i
        c[n - 2 * k] += (-1) ** k * poch / (math.factorial(k) * math.factorial(n - 2 * k)) * 2 ** (n - 2 * k)
    return c


@given(st.floats(-20, 20, allow_nan=False), st.integers(0, 12))
def test_pochhammer_matches_gamma_ratio(a, k):
    expected = float(mpmath.rf(a, k))
    assert scalar.pochhammer(a, k, "double") == pytest.approx(expected, rel=1e-12, abs=1e-300)


def test_pochhammer_exact_rational():
    val = scalar.pochhammer(Fraction(1, 3), 4, "double")
    assert val == pytest.approx(float(Fraction(1, 3) * Fraction(4, 3) * Fraction(7, 3) * Fraction(10, 3)))
    assert scalar.pochhammer(5, 0) == 1
    with pytest.raises(ValueError):
        scalar.pochhammer(1.0, -1)


@pytest.mark.parametrize("lam", [Fraction(1, 2), Fraction(1), Fraction(7, 3), Fraction(-4, 3), Fraction(-5, 4)])
@pytest.mark.parametrize("n", [0, 1, 2, 5, 8])
def test_gegenbauer_coeffs_power_sum(n, lam):
    exact = np.array([float(v) for v in power_sum_gegenbauer(n, lam)])
    got = scalar.gegenbauer_coeffs(n, float(lam))
    np.testing.assert_allclose(got, exact, rtol=1e-12, atol=1e-12 * max(1.0, np.max(np.abs(exact))))


@given(st.integers(0, 10), st.floats(0.05, 6.0), st.floats(-1, 1))
def test_gegenbauer_value_matches_scipy(n, nu, x):
    assert scalar.gegenbauer(n, nu, x, "double") == pytest.approx(
        float(eval_gegenbauer(n, nu, x)), rel=1e-10, abs=1e-10)


def test_gegenbauer_coeffs_nongeneric_parameter_rejected():
    # the 2F1 form needs (nu + 1/2)_k != 0; nu = -3/2 fails at k = 2
    with pytest.raises(scalar.DomainError):
        scalar.gegenbauer_coeffs(3, -1.5)


def test_gegenbauer_negative_parameter_domain_error():
    # (nu + 1/2)_k vanishes for nu = -1/2 at k = 1
    with pytest.raises(scalar.DomainError):
        scalar.gegenbauer(3, -0.5, 0.2)


@pytest.mark.parametrize("nu", [0.3, 1.0, 2.5])
def test_gegenbauer_norm_by_quadrature(nu):
    rule = gauss_rule(nu, 12)
    for n in range(11):
        vals = scalar.gegenbauer_values(n, nu, rule.nodes)[n]
        assert scalar.gegenbauer_norm(n, nu, "double") == pytest.approx(rule.integrate(vals ** 2), rel=1e-12)


def test_extended_precision_agrees_with_double():
    d = scalar.gegenbauer_norm(7, 1.3, "double")
    e = scalar.gegenbauer_norm(7, 1.3, "extended")
    assert abs(float(e) - d) <= 1e-14 * d
    with mpmath.workdps(40):
        nu = mpmath.mpf(1.3)  # the binary value the double path also sees
        ref = mpmath.sqrt(mpmath.pi) * mpmath.gamma(nu + 0.5) / mpmath.gamma(nu + 1)
        ref *= mpmath.rf(2 * nu, 7) / mpmath.factorial(7) * nu / (7 + nu)
        assert abs(mpmath.mpf(e) - ref) < mpmath.mpf(10) ** -30


def test_precision_env(monkeypatch):
    monkeypatch.setenv("MVGEG_PRECISION", "extended")
    assert scalar.default_precision() == "extended"
    monkeypatch.setenv("MVGEG_PRECISION", "quad")
    with pytest.raises(ValueError):
        scalar.default_precision()


def test_terminating_series_spec():
    spec = scalar.TerminatingSeriesSpec((-3, 2.5), (1.5,), 0.4)
    assert spec.length == 3
    assert scalar.hyp_terminating(spec, "double") == pytest.approx(float(mpmath.hyp2f1(-3, 2.5, 1.5, 0.4)), rel=1e-14)
    with pytest.raises(ValueError):
        scalar.TerminatingSeriesSpec((-2.5, 1), (1,), 0.1)
    with pytest.raises(scalar.DomainError):
        scalar.hyp_terminating(scalar.TerminatingSeriesSpec((-4, 1), (-2,), 0.5))


def exact_4f3(j, k, two_ell, nu, n):
    total = Fraction(0)
    term = Fraction(1)
    numer = (-j, j + 2 * nu - 1, -k, -n - nu - two_ell)
    denom = (nu, -n - k, -two_ell)
    for i in range(min(j, k) + 1):
        total += term
        if i == min(j, k):
            break
        r = Fraction(1)
        for a in numer:
            r *= a + i
        for b in denom:
            r /= b + i
        term = term * r / (i + 1)
    return total


@pytest.mark.parametrize("two_ell,nu", [(2, Fraction(3, 2)), (3, Fraction(7, 5)), (4, Fraction(2))])
def test_racah_4f3_exact_rational(two_ell, nu):
    p = WeightParams(two_ell, float(nu))
    for n in range(4):
        for k in range(two_ell + 1):
            for j in range(min(two_ell, n + k) + 1):
                exact = float(exact_4f3(j, k, two_ell, nu, n))
                assert float(scalar.racah_4f3(j, k, p, n)) == pytest.approx(exact, rel=1e-12, abs=1e-14)


def test_racah_4f3_bounds():
    with pytest.raises(ValueError):
        scalar.racah_4f3(0, 3, WeightParams(2, 1.0), 0)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=6), st.floats(-2, 2), st.floats(-2, 2), st.floats(-1, 1))
def test_compose_affine(c, a, b, t):
    lhs = np.polynomial.polynomial.polyval(t, scalar.compose_affine(np.array(c), a, b))
    rhs = np.polynomial.polynomial.polyval(a + b * t, np.array(c))
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)
