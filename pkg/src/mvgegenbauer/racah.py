"""Racah route: conjugation by M(u) = L(1 - 2u) diagonalizes D0 = D~ - 2l E~.

After conjugation the rows of the polynomials are scalar 2F1 solutions whose
constants c_{k,j} are Racah-type 4F3 values; undoing the conjugation (with
the explicit inverse of L) gives each entry of P_n as a finite sum of
products of two Gegenbauer polynomials.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hyper2h1 import P_from_R, R_from_P, build_D_tilde, build_E_tilde, tilde_matrices
from .matpoly import (
    MatrixPolynomial,
    linear,
    max_coeff_diff,
    mp_change_var,
    mp_invert_unipotent_lower,
)
from .operators import RightOperator, apply, eigen_D, eigen_E
from .params import WeightParams
from .scalar import (
    gamma_ratio_seed,
    gegenbauer_coeffs,
    hyp_terminating_coeffs,
    pochhammer,
    racah_4f3,
)
from .weight import ldu_factors, t_diag

DEGENERATE_NU = (0.5,)
DEGENERATE_GUARD = 1e-6


def build_M(params: WeightParams) -> MatrixPolynomial:
    """M(u) = L(1 - 2u), unipotent lower triangular in u."""
    return mp_change_var(ldu_factors(params).L)


def build_D0(params: WeightParams) -> RightOperator:
    """D~ - 2l E~ as an operator in u."""
    return build_D_tilde(params) - build_E_tilde(params).scale(params.two_ell)


def d0_matrices(params: WeightParams) -> dict:
    """K^1_1, K^1_0, K_0 of D0 = u(1-u) d^2 + d (K^1_0 - u K^1_1) + K_0."""
    L, nu = params.two_ell, params.nu
    i = np.arange(params.d, dtype=float)
    K11 = np.diag(2 * i + 2 * nu + 1)
    K10 = -np.diag(i[1:], -1) + np.diag((2 * i + 2 * nu + 1) / 2)
    K0 = np.diag((L - i) * (L + i + 2) - (nu - 1) * (nu + 2 * i + 1))
    return {"K11": K11, "K10": K10, "K0": K0}


def build_D0_closed(params: WeightParams) -> RightOperator:
    m = d0_matrices(params)
    d = params.d
    A2 = MatrixPolynomial(np.stack([np.zeros((d, d)), np.eye(d), -np.eye(d)]), "u")
    return RightOperator((MatrixPolynomial.constant(m["K0"], "u"), linear(m["K10"], -m["K11"], "u"), A2))


@dataclass(frozen=True)
class DiagonalHyperOp:
    """u(1-u) d^2/du^2 + d/du (T11/2 - u T11) + T0 with diagonal T11, T0."""

    T1diag: np.ndarray
    T0diag: np.ndarray

    def operator(self) -> RightOperator:
        d = len(self.T1diag)
        T11 = np.diag(self.T1diag)
        A2 = MatrixPolynomial(np.stack([np.zeros((d, d)), np.eye(d), -np.eye(d)]), "u")
        return RightOperator((MatrixPolynomial.constant(np.diag(self.T0diag), "u"),
                              linear(0.5 * T11, -T11, "u"), A2))

    def act(self, G: MatrixPolynomial) -> MatrixPolynomial:
        return apply(self.operator(), G)


def diagonal_operator(params: WeightParams) -> DiagonalHyperOp:
    L, nu = params.two_ell, params.nu
    k = np.arange(params.d, dtype=float)
    return DiagonalHyperOp(2 * k + 2 * nu + 1, (L - k - nu + 1) * (L + k + nu + 1))


def conjugated_action(params: WeightParams, G: MatrixPolynomial,
                      op: RightOperator | None = None) -> MatrixPolynomial:
    """((G M^-1) . op) M, with op = D0 by default."""
    M = build_M(params)
    Minv = mp_invert_unipotent_lower(M)
    op = build_D0(params) if op is None else op
    return apply(op, G * Minv) * M


def diagonal_action(params: WeightParams, G: MatrixPolynomial) -> MatrixPolynomial:
    return diagonal_operator(params).act(G)


def eigen_calD(params: WeightParams, n: int) -> np.ndarray:
    """Lambda_n(D~) - 2l Lambda_n(E~) (diagonal)."""
    return eigen_D(params, n) - params.two_ell * eigen_E(params, n)


def _s_lower_factor(i: int, nu: float) -> float:
    # (i + 2nu - 2)/(2nu + 2i - 3); equal to 1 at i = 1, where it would read 0/0 at nu = 1/2
    return 1.0 if i == 1 else (i + 2 * nu - 2) / (2 * nu + 2 * i - 3)


def build_E_conjugated(params: WeightParams):
    """(S1(u), S0(u)) with calE = d/du S1(u) + S0(u)."""
    L, nu = params.two_ell, params.nu
    ell = L / 2
    d = params.d
    low1 = np.zeros((d, d))
    up1 = np.zeros((d, d))
    low0 = np.zeros((d, d))
    diag0 = np.zeros((d, d))
    for i in range(d):
        diag0[i, i] = (i * (2 * nu + i - 1) - 4 * ell * (ell + 1) - L * (nu - 1)) / L
        if i >= 1:
            f = _s_lower_factor(i, nu)
            low1[i, i - 1] = i * f * (2 * nu + i + L - 1) / (ell * (2 * nu + 2 * i - 1))
            low0[i, i - 1] = i * f * (2 * nu + i + L - 1) / L
        if i <= L - 1:
            # the upper band is inherited unchanged from B~0 (M is unipotent lower)
            up1[i, i + 1] = -(L - i) / (4 * ell)
    # u(1-u) low1 + up1
    S1 = MatrixPolynomial(np.stack([up1, low1, -low1]), "u")
    S0 = MatrixPolynomial(np.stack([low0 + diag0, -2 * low0]), "u")
    return S1, S0


def calE_operator(params: WeightParams) -> RightOperator:
    S1, S0 = build_E_conjugated(params)
    return RightOperator((S0, S1))


def N_matrix(params: WeightParams, lam: float) -> np.ndarray:
    """(lambda - T0)(T11/2)^-1 S1(0) + S0(0), acting from the right on rows."""
    D = diagonal_operator(params)
    S1, S0 = build_E_conjugated(params)
    return np.diag((lam - D.T0diag) / (0.5 * D.T1diag)) @ S1(0.0) + S0(0.0)


def mu_n(params: WeightParams, n: int) -> np.ndarray:
    return eigen_E(params, n)


@dataclass(frozen=True)
class RacahCoefficients:
    n: int
    c: np.ndarray  # c[k, j]; zero where j > n + k

    def row(self, k: int) -> np.ndarray:
        return self.c[k]


def c_k0(params: WeightParams, n: int, k: int) -> float:
    L, nu = params.two_ell, params.nu
    val = (-1.0) ** n * 4.0 ** (-n)
    for i in range(n):
        val *= (nu + i) * (L + 2 * nu + i) / ((k + nu + i) * (L + nu - k + i))
    return val


def c_k0_modulus_squared(params: WeightParams, n: int, k: int) -> float:
    L, nu = params.two_ell, params.nu
    val = 4.0 ** (-2 * n)
    for i in range(n):
        val *= ((nu + i) * (L + 2 * nu + i) / ((k + nu + i) * (L + nu - k + i))) ** 2
    return val


def racah_coefficients(params: WeightParams, n: int, precision: str = "double") -> RacahCoefficients:
    L, nu = params.two_ell, params.nu
    d = params.d
    c = np.zeros((d, d))
    for k in range(d):
        base = c_k0(params, n, k)
        for j in range(min(L, n + k) + 1):
            pref = (-1.0) ** j * pochhammer(-L, j, "double") * pochhammer(-n - k, j, "double")
            pref /= math.factorial(j) * pochhammer(2 * nu + L, j, "double")
            c[k, j] = base * pref * float(racah_4f3(j, k, params, n, precision))
    return RacahCoefficients(n, c)


def calR(params: WeightParams, n: int) -> MatrixPolynomial:
    """(calR_n)_{k,j} = c_{k,j} 2F1(j-k-n, n+k+j+2nu; j+1/2+nu; u)."""
    nu = params.nu
    d = params.d
    rc = racah_coefficients(params, n)
    out = np.zeros((n + d, d, d))
    for k in range(d):
        for j in range(min(params.two_ell, n + k) + 1):
            f = hyp_terminating_coeffs((j - k - n, n + k + j + 2 * nu), (j + 0.5 + nu,))
            out[: len(f), k, j] = rc.c[k, j] * f
    return MatrixPolynomial(out, "u", d)


def monic_R_racah(params: WeightParams, n: int) -> MatrixPolynomial:
    """R_n = calR_n M^-1."""
    return calR(params, n) * mp_invert_unipotent_lower(build_M(params))


def monic_P_racah(params: WeightParams, n: int) -> MatrixPolynomial:
    return P_from_R(monic_R_racah(params, n), n)


def l_inverse_entry(params: WeightParams, k: int, m: int) -> np.ndarray:
    """x-coefficients of (L^-1)_{k,m} = k!/(m!(2nu+k+m-1)_{k-m}) C^(1-nu-k)_{k-m}(x)."""
    if m > k:
        return np.zeros(1)
    nu = params.nu
    scale = math.factorial(k) / (math.factorial(m) * pochhammer(2 * nu + k + m - 1, k - m, "double"))
    return scale * gegenbauer_coeffs(k - m, 1 - nu - k)


def l_inverse(params: WeightParams) -> MatrixPolynomial:
    d = params.d
    c = np.zeros((d, d, d))
    for k in range(d):
        for m in range(k + 1):
            e = l_inverse_entry(params, k, m)
            c[: len(e), k, m] = e
    return MatrixPolynomial(c, "x", d)


def check_generic_nu(nu: float) -> None:
    for bad in DEGENERATE_NU:
        if abs(nu - bad) < DEGENERATE_GUARD:
            raise ValueError(
                f"nu={nu} is within {DEGENERATE_GUARD:g} of {bad}, where C^(1-nu-j) has a "
                "vanishing 2F1 denominator; use the recurrence or 2H1 route instead")


def entries_via_racah(params: WeightParams, n: int, k: int, i: int) -> np.ndarray:
    """x-coefficients (ascending, length n + 2l + 1) of (P_n)_{k,i} from the
    Racah-Gegenbauer double sum."""
    L, nu = params.two_ell, params.nu
    if not (0 <= k <= L and 0 <= i <= L):
        raise ValueError("k and i must lie in [0, 2l]")
    check_generic_nu(nu)
    out = np.zeros(n + 2 * L + 1)
    base = (-2.0) ** n / math.factorial(i) * c_k0(params, n, k)
    for j in range(i, min(L, n + k) + 1):
        m = n + k - j
        w = math.factorial(m) * pochhammer(-L, j, "double") * (-1.0) ** j * pochhammer(-n - k, j, "double")
        w /= pochhammer(2 * nu + 2 * j, m, "double") * pochhammer(2 * nu + j + i - 1, j - i, "double")
        w /= pochhammer(2 * nu + L, j, "double")
        w *= float(racah_4f3(j, k, params, n))
        prod = np.convolve(gegenbauer_coeffs(m, nu + j), gegenbauer_coeffs(j - i, 1 - nu - j))
        out[: len(prod)] += base * w * prod
    return out


def monic_P_entries(params: WeightParams, n: int) -> MatrixPolynomial:
    """P_n assembled entrywise from :func:`entries_via_racah` (top degree must vanish)."""
    d = params.d
    c = np.zeros((n + 2 * params.two_ell + 1, d, d))
    for k in range(d):
        for i in range(d):
            c[:, k, i] = entries_via_racah(params, n, k, i)
    return MatrixPolynomial(c, "x", d)


def excess_degree(params: WeightParams, n: int) -> float:
    """Largest |coefficient of x^p|, p > n, over the entries from the double sum."""
    worst = 0.0
    for k in range(params.d):
        for i in range(params.d):
            e = entries_via_racah(params, n, k, i)
            if len(e) > n + 1:
                worst = max(worst, float(np.max(np.abs(e[n + 1:]))))
    return worst


def final_vanishing_sum(params: WeightParams, n: int, k: int, i: int) -> tuple:
    """(sum, sum of |terms|) of the leading-coefficient identity for k > i."""
    L, nu = params.two_ell, params.nu
    total = 0.0
    size = 0.0
    for j in range(i, min(L, n + k) + 1):
        m = n + k - j
        t = pochhammer(nu + j, m, "double") * pochhammer(-L, j, "double") * (-1.0) ** j
        t *= pochhammer(-n - k, j, "double")
        t /= pochhammer(2 * nu + 2 * j, m, "double") * pochhammer(2 * nu + j + i - 1, j - i, "double")
        t /= pochhammer(2 * nu + L, j, "double")
        t *= pochhammer(1 - nu - j, j - i, "double") / math.factorial(j - i)
        t *= float(racah_4f3(j, k, params, n))
        total += t
        size += abs(t)
    return total, size


def pl_entries_residual(params: WeightParams, P: MatrixPolynomial, n: int) -> float:
    """(P_n L)_{k,j} against (-2)^n c_{k,j} (n+k-j)!/(2j+2nu)_{n+k-j} C^(nu+j)_{n+k-j}."""
    nu = params.nu
    d = params.d
    rc = racah_coefficients(params, n)
    PL = P * ldu_factors(params).L
    c = np.zeros((n + d, d, d))
    for k in range(d):
        for j in range(min(params.two_ell, n + k) + 1):
            m = n + k - j
            g = gegenbauer_coeffs(m, nu + j)
            c[: len(g), k, j] = (-2.0) ** n * rc.c[k, j] * math.factorial(m) / pochhammer(2 * j + 2 * nu, m, "double") * g
    return max_coeff_diff(PL, MatrixPolynomial(c, "x", d))


def norm_from_coefficients(params: WeightParams, n: int) -> np.ndarray:
    """Diagonal of H_n from the c_{k,j}, t_j and the scalar Gegenbauer norms."""
    nu = params.nu
    rc = racah_coefficients(params, n)
    t = t_diag(params)
    out = np.zeros(params.d)
    for k in range(params.d):
        s = 0.0
        for j in range(min(params.two_ell, n + k) + 1):
            m = n + k - j
            term = rc.c[k, j] ** 2 * t[j] * math.factorial(m) / pochhammer(2 * nu + 2 * j, m, "double")
            term *= math.sqrt(math.pi) * math.exp(math.lgamma(nu + j + 0.5) - math.lgamma(nu + j))
            s += term / (n + k + nu)
        out[k] = 4.0 ** n * s
    return np.diag(out)


def racah_weight(params: WeightParams, N: int, j: int) -> float:
    L, nu = params.two_ell, params.nu
    w = pochhammer(-L, j, "double") * pochhammer(-N, j, "double")
    w *= pochhammer(2 * nu - 1, j, "double") * pochhammer(nu + 0.5, j, "double")
    w /= math.factorial(j) * pochhammer(L + 2 * nu, j, "double") * pochhammer(N + 2 * nu, j, "double")
    w /= pochhammer(nu - 0.5, j, "double")
    return w


def racah_norm(params: WeightParams, n: int, k: int) -> float:
    """Closed form of sum_j w_j R_k(j)^2 at fixed N = n + k."""
    L, nu = params.two_ell, params.nu
    N = n + k
    M = pochhammer(N + nu, L, "double") * pochhammer(2 * nu, L, "double")
    M /= pochhammer(N + 2 * nu, L, "double") * pochhammer(nu, L, "double")
    num = (pochhammer(-L - n - nu, k, "double") * pochhammer(-L - n - k - 2 * nu + 1, k, "double")
           * pochhammer(-L - nu + 1, k, "double") * pochhammer(-n - k - nu + 1, k, "double")
           * math.factorial(k))
    den = (pochhammer(-L - n - k - nu + 1, 2 * k, "double") * pochhammer(-L, k, "double")
           * pochhammer(-n - k, k, "double") * pochhammer(nu, k, "double"))
    return M * num / den


def racah_gram(params: WeightParams, N: int) -> np.ndarray:
    """G[k, k'] = sum_j w_j R_k(j) R_k'(j) over k, k' <= min(2l, N) at fixed N."""
    L = params.two_ell
    K = min(L, N)
    G = np.zeros((K + 1, K + 1))
    js = range(min(L, N) + 1)
    w = np.array([racah_weight(params, N, j) for j in js])
    R = np.array([[float(racah_4f3(j, k, params, N - k)) for j in js] for k in range(K + 1)])
    G[:] = (R * w) @ R.T
    return G


def modulus_from_orthogonality(params: WeightParams, n: int, k: int, H_kk: float) -> float:
    """|c_{k,0}(n)|^2 recovered from (H_n)_{kk} and the Racah norm."""
    L, nu = params.two_ell, params.nu
    N = n + k
    lhs = H_kk * 4.0 ** (-n) * (N + nu) / ((L + nu) * math.factorial(N) * math.sqrt(math.pi))
    lhs *= math.exp(math.lgamma(nu) + math.lgamma(N + 2 * nu) - math.lgamma(nu + 0.5) - math.lgamma(2 * nu))
    return lhs / racah_norm(params, n, k)


def ck_recurrence_residual(params: WeightParams, n: int, k: int) -> float:
    """Componentwise three-term relation for the row c_k (relative)."""
    L, nu = params.two_ell, params.nu
    ell = L / 2
    c = racah_coefficients(params, n).c[k]
    rhs_eig = -2 * n * (ell - k) + (L + 2) * (k - L) - 2 * (nu - 1) * (ell - k)
    worst = 0.0
    scale = float(np.max(np.abs(c)))
    for i in range(params.d):
        lhs = (i * (i + 2 * nu - 1) - 4 * ell * (ell + 1) - L * (nu - 1)) * c[i]
        if i >= 1:
            lhs -= (i + k + n + 2 * nu - 1) * (i - k - n - 1) * (L - i + 1) / (2 * i + 2 * nu - 1) * c[i - 1]
        if i + 1 <= L:
            lhs += (i + 1) * (i + 2 * nu - 1) * (L + i + 2 * nu) / (2 * i + 2 * nu - 1) * c[i + 1]
        worst = max(worst, abs(lhs - rhs_eig * c[i]) / max(scale, 1e-300))
    return worst


def c_k0_step_residual(params: WeightParams, n: int, k: int) -> float:
    """Leading-coefficient relation between c_{k,0}(n+1), c_{k,0}(n) and c_{k+1,0}(n)."""
    L, nu = params.two_ell, params.nu
    rhs = -c_k0(params, n, k) * (n + k + 2 * nu) / (4 * (n + k + nu))
    if k + 1 <= L:
        # the coefficient is -(X_n)_{k,k+1}, read off the top degree of the
        # (k, 0) entry of the recurrence for calR_n
        rhs += c_k0(params, n, k + 1) * (L - k) * (L - k + nu - 1) / (
            4 * (L - k + n + nu - 1) * (L + n - k + nu))
    lhs = c_k0(params, n + 1, k)
    return abs(lhs - rhs) / abs(lhs)


def sign_step_residual(params: WeightParams, n: int, k: int) -> float:
    """The sign relation obtained from the c_{k,0} step with the closed-form moduli."""
    L, nu = params.two_ell, params.nu
    s = np.sign
    lhs = (nu + n) * (L + 2 * nu + n) * s(c_k0(params, n + 1, k))
    rhs = -(n + k + 2 * nu) * (L + n + nu - k) * s(c_k0(params, n, k))
    if k + 1 <= L:
        rhs += (k + nu) * (L - k) * s(c_k0(params, n, k + 1))
    return abs(lhs - rhs) / abs(lhs)


def c_k0_from_recurrence(params: WeightParams, n: int, k: int) -> float:
    """c_{k,0}(n) read off the top coefficient of (R_n M)_{k,0}, R_n from the recurrence."""
    from .mvop import monic

    entry = (R_from_P(monic(params, n), n) * build_M(params)).coeffs[:, k, 0]
    top = n + k
    lead = entry[top] if len(entry) > top else 0.0
    f = hyp_terminating_coeffs((-k - n, n + k + 2 * params.nu), (0.5 + params.nu,))
    return float(lead / f[top])
