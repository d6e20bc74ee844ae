"""Right-acting matrix differential operators and the identities around them.

An operator with coefficients (A_0, A_1, ..., A_r) acts on a matrix
polynomial P as P.Op = sum_k P^(k) A_k: derivatives first, then the
coefficient matrices multiply from the right. Eigenvalue matrices act from
the left, P.Op = Lambda P.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

from .matpoly import (
    MatrixPolynomial,
    WeightedMatrixFunction,
    linear,
    max_coeff_diff,
    mp_diff,
    one_minus_x2,
    wmf_diff,
)
from .params import WeightParams
from .quadrature import pair
from .weight import weight_function, weight_pol


@dataclass(frozen=True)
class RightOperator:
    """P -> sum_k P^(k) coeffs[k]."""

    coeffs: tuple

    def __post_init__(self):
        cs = tuple(self.coeffs)
        if not cs:
            raise ValueError("an operator needs at least one coefficient")
        d, var = cs[0].dim, cs[0].var
        for c in cs:
            if c.dim != d or c.var != var:
                raise ValueError("operator coefficients must share dimension and variable")
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def second_order(cls, A2, A1, A0) -> "RightOperator":
        return cls((A0, A1, A2))

    @property
    def dim(self) -> int:
        return self.coeffs[0].dim

    @property
    def var(self) -> str:
        return self.coeffs[0].var

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, k: int) -> MatrixPolynomial:
        if k < len(self.coeffs):
            return self.coeffs[k]
        return MatrixPolynomial.zero(self.dim, self.var)

    A0 = property(lambda self: self.coeff(0))
    A1 = property(lambda self: self.coeff(1))
    A2 = property(lambda self: self.coeff(2))

    def __add__(self, other: "RightOperator") -> "RightOperator":
        n = max(len(self.coeffs), len(other.coeffs))
        return RightOperator(tuple(self.coeff(k) + other.coeff(k) for k in range(n)))

    def __sub__(self, other: "RightOperator") -> "RightOperator":
        return self + other.scale(-1.0)

    def scale(self, s: float) -> "RightOperator":
        return RightOperator(tuple(c * float(s) for c in self.coeffs))

    def plus_constant(self, mat) -> "RightOperator":
        c0 = self.coeffs[0] + MatrixPolynomial.constant(np.asarray(mat, float) * np.ones((1, 1))
                                                         if np.isscalar(mat) else mat, self.var)
        return RightOperator((c0,) + self.coeffs[1:])

    def then(self, other: "RightOperator") -> "RightOperator":
        """Composite P -> (P.self).other.

        With P.self = sum_k P^(k) A_k and Q.other = sum_j Q^(j) B_j, Leibniz gives
        the coefficient of P^(r) as sum_{j, i <= j, k = r - i} C(j, i) A_k^(j-i) B_j.
        """
        A = self.coeffs
        B = other.coeffs
        out = {}
        for j, Bj in enumerate(B):
            for i in range(j + 1):
                for k, Ak in enumerate(A):
                    term = mp_diff(Ak, j - i) * Bj
                    if comb(j, i) != 1:
                        term = term * float(comb(j, i))
                    r = k + i
                    out[r] = out[r] + term if r in out else term
        n = max(out) + 1
        zero = MatrixPolynomial.zero(self.dim, self.var)
        return RightOperator(tuple(out.get(r, zero) for r in range(n)))

    def conj(self, mat) -> "RightOperator":
        """Coefficientwise mat A_k mat^T."""
        return RightOperator(tuple(c.conj(mat) for c in self.coeffs))


RightSecondOrderOperator = RightOperator


def apply(op: RightOperator, P: MatrixPolynomial) -> MatrixPolynomial:
    """P'' A2 + P' A1 + P A0 (and higher orders when present)."""
    if P.dim != op.dim or P.var != op.var:
        raise ValueError("operator and polynomial disagree in dimension or variable")
    out = MatrixPolynomial.zero(P.dim, P.var)
    for k, A in enumerate(op.coeffs):
        out = out + mp_diff(P, k) * A
    return out


def operator_diff(a: RightOperator, b: RightOperator) -> float:
    """Max coefficient difference between two operators."""
    n = max(len(a.coeffs), len(b.coeffs))
    return max(max_coeff_diff(a.coeff(k), b.coeff(k)) for k in range(n))


def identity_operator(dim: int, var: str = "x", scale: float = 1.0) -> RightOperator:
    return RightOperator((MatrixPolynomial.constant(scale * np.eye(dim), var),))


def derivative_operator(dim: int, var: str = "x") -> RightOperator:
    return RightOperator((MatrixPolynomial.zero(dim, var), MatrixPolynomial.identity(dim, var)))


# -- the coefficient matrices ---------------------------------------------

def d_matrices(params: WeightParams) -> dict:
    """C, U, V of the second-order operator D."""
    L, nu = params.two_ell, params.nu
    d = params.d
    i = np.arange(d)
    C = np.diag((L - i[:-1]).astype(float), 1) + np.diag(i[1:].astype(float), -1)
    U = (L + 2 * nu + 1) * np.eye(d)
    V = np.diag(-(i * (L - i)).astype(float)) + (nu - 1) * (L + nu + 1) * np.eye(d)
    return {"C": C, "U": U, "V": V}


def e_matrices(params: WeightParams) -> dict:
    """B0, B1, A0 of the first-order operator E (undefined for 2l = 0)."""
    L, nu = params.two_ell, params.nu
    if L == 0:
        raise ValueError("E is not defined for l = 0")
    ell = L / 2
    d = params.d
    i = np.arange(d, dtype=float)
    B0 = np.diag((L - i[:-1]) / L, 1) - np.diag(i[1:] / L, -1)
    B1 = -np.diag((ell - i) / ell)
    A0 = np.diag((L + 2) * (i - L) / L - (nu - 1) * (ell - i) / ell)
    return {"B0": B0, "B1": B1, "A0": A0}


def build_D(params: WeightParams) -> RightOperator:
    m = d_matrices(params)
    d = params.d
    A2 = one_minus_x2(d)
    A1 = linear(m["C"], -m["U"])
    A0 = MatrixPolynomial.constant(-m["V"])
    return RightOperator((A0, A1, A2))


def build_E(params: WeightParams) -> RightOperator:
    m = e_matrices(params)
    return RightOperator((MatrixPolynomial.constant(m["A0"]), linear(m["B0"], m["B1"])))


def eigen_D(params: WeightParams, n: int) -> np.ndarray:
    L, nu = params.two_ell, params.nu
    i = np.arange(params.d, dtype=float)
    return i * (L - i) - (n + nu - 1) * (L + nu + n + 1)


def eigen_E(params: WeightParams, n: int) -> np.ndarray:
    L, nu = params.two_ell, params.nu
    ell = L / 2
    i = np.arange(params.d, dtype=float)
    return ((ell + 1) * (i - L) - n * (ell - i) - (nu - 1) * (ell - i)) / ell


def eigen_residual(op: RightOperator, P: MatrixPolynomial, lam: np.ndarray) -> float:
    """max coefficient of P.op - diag(lam) P."""
    return max_coeff_diff(apply(op, P), MatrixPolynomial(np.diag(lam) @ P.coeffs, P.var, P.dim))


# -- Phi, Psi and the factorized operator ---------------------------------------

def build_phi_psi(params: WeightParams):
    """The degree-2 Phi and degree-1 Psi of the Pearson pair."""
    L, nu = params.two_ell, params.nu
    ell = L / 2
    d = params.d
    l2 = ell * ell
    c2 = np.zeros((d, d))
    c1 = np.zeros((d, d))
    c0 = np.zeros((d, d))
    for i in range(d):
        c2[i, i] = ((ell - i) ** 2 - (ell + nu) ** 2) / l2
        c0[i, i] = (-i * (L - i + 1) - (L - i) * (i + 1) + 4 * (ell + nu) ** 2) / (4 * l2)
        if i >= 1:
            c1[i, i - 1] = (i - 1 - L) * (L - 2 * i + 1) / (2 * l2)
        if i <= L - 1:
            c1[i, i + 1] = (i + 1) * (L - 2 * i - 1) / (2 * l2)
        if i >= 2:
            c0[i, i - 2] = (L - i + 2) * (L - i + 1) / (4 * l2)
        if i <= L - 2:
            c0[i, i + 2] = (i + 2) * (i + 1) / (4 * l2)
    phi = MatrixPolynomial(np.stack([c0, c1, c2]), "x")
    s1 = np.zeros((d, d))
    s0 = np.zeros((d, d))
    half = ell + nu + 0.5
    for i in range(d):
        s1[i, i] = -(L + 2 * nu + 1) * (nu + i) * (nu + L - i) / l2
        if i >= 1:
            s0[i, i - 1] = -half * (i - 1 - L) * (nu + i - 1) / l2
        if i <= L - 1:
            # enters with the sign opposite to the lower band; the other sign
            # breaks the Pearson equation
            s0[i, i + 1] = half * (i + 1) * (nu + L - i - 1) / l2
    psi = MatrixPolynomial(np.stack([s0, s1]), "x")
    return phi, psi


def d_phi_psi_combination(params: WeightParams) -> RightOperator:
    """E^2 + (2l+2)E + ((l+nu)/l)^2 D + nu(nu-1)(2l+nu+1)(2l+nu)/l^2 Id."""
    L, nu = params.two_ell, params.nu
    ell = L / 2
    E = build_E(params)
    D = build_D(params)
    out = E.then(E) + E.scale(L + 2) + D.scale(((ell + nu) / ell) ** 2)
    const = nu * (nu - 1) * (L + nu + 1) * (nu + L) / ell ** 2
    return out + identity_operator(params.d, scale=const)


def d_phi_psi_factored(params: WeightParams) -> RightOperator:
    """P -> P'' Phi^T + P' Psi^T."""
    phi, psi = build_phi_psi(params)
    return RightOperator((MatrixPolynomial.zero(params.d), psi.T(), phi.T()))


def K_diag(params: WeightParams, n: int) -> np.ndarray:
    L, nu = params.two_ell, params.nu
    ell = L / 2
    k = np.arange(params.d, dtype=float)
    return -(nu + k) * (L + 2 * nu + n) * (L + nu - k) / ell ** 2


def build_T_raising(params: WeightParams) -> RightOperator:
    """Q -> Q' Phi^T + Q Psi^T."""
    phi, psi = build_phi_psi(params)
    return RightOperator((psi.T(), phi.T()))


def nu_step_constant(params: WeightParams) -> float:
    L, nu = params.two_ell, params.nu
    ell = L / 2
    return (2 * nu + 1) * (L + nu + 1) * ell ** 2 / (nu * (2 * nu + L + 1) * (L + nu) * (ell + nu))


# -- weight identities ------------------------------------------------------

def pearson_residual(params: WeightParams) -> WeightedMatrixFunction:
    """(W Phi)' - W Psi."""
    phi, psi = build_phi_psi(params)
    W = weight_function(params)
    return wmf_diff(W.times(phi)) - W.times(psi)


def nu_step_residual(params: WeightParams) -> MatrixPolynomial:
    """c W_pol Phi - (1-x^2) W_pol^(nu+1): the nu-step with (1-x^2)^(nu-1/2) cleared."""
    phi, _ = build_phi_psi(params)
    c = nu_step_constant(params)
    return weight_pol(params) * phi * c - one_minus_x2(params.d) * weight_pol(params.shifted())


def nu_step_derivative_residual(params: WeightParams) -> WeightedMatrixFunction:
    """c W Psi - (W^(nu+1))'."""
    _, psi = build_phi_psi(params)
    c = nu_step_constant(params)
    return weight_function(params).times(psi).scale(c) - wmf_diff(weight_function(params.shifted()))


def darboux_residual(params: WeightParams) -> float:
    """Coefficient distance between d/dx after T and its expansion in E, D at nu+1."""
    L, nu = params.two_ell, params.nu
    ell = L / 2
    left = build_T_raising(params).then(derivative_operator(params.d))
    up = params.shifted()
    E = build_E(up)
    D = build_D(up)
    right = E.then(E) + E.scale(L + 2) + D.scale(((ell + nu) / ell) ** 2)
    right = right + identity_operator(params.d, scale=nu * (nu - 1) * (L + nu) * (L + nu + 1) / ell ** 2)
    return operator_diff(left, right)


def symmetry_residuals(params: WeightParams) -> dict:
    """The four coefficient identities behind the symmetry of E and D.

    ``E_skew``:   W_pol A^T + A W_pol, A = x B1 + B0
    ``E_moment``: -(A W)' + A0 W - W A0^T
    ``D_first``:  ((4nu+2)x + B) W_pol - 2(1-x^2) W_pol' + W_pol B^T, B = C - xU
    ``D_second``: (W B^T - B W)' - 2(V W - W V)
    Each vanishes identically.
    """
    d = params.d
    W = weight_function(params)
    Wp = weight_pol(params)
    e = e_matrices(params)
    m = d_matrices(params)
    A = linear(e["B0"], e["B1"])
    A0 = MatrixPolynomial.constant(e["A0"])
    B = linear(m["C"], -m["U"])
    V = MatrixPolynomial.constant(m["V"])
    nu = params.nu
    out = {}
    out["E_skew"] = Wp * A.T() + A * Wp
    out["E_moment"] = (W.left(A0) - W.times(A0.T())) - wmf_diff(W.left(A))
    lead = B + linear(np.zeros((d, d)), (4 * nu + 2) * np.eye(d))
    out["D_first"] = lead * Wp - one_minus_x2(d) * mp_diff(Wp) * 2.0 + Wp * B.T()
    out["D_second"] = wmf_diff(W.times(B.T()) - W.left(B)) - (W.left(V) - W.times(V)).scale(2.0)
    return out


def boundary_residual(params: WeightParams) -> float:
    """max |(x B1 + B0) W_pol(x)| at x = +-1."""
    e = e_matrices(params)
    W = weight_pol(params)
    worst = 0.0
    for x in (-1.0, 1.0):
        worst = max(worst, float(np.max(np.abs((x * e["B1"] + e["B0"]) @ W(x)))))
    return worst


def symmetry_defect(op: RightOperator, P: MatrixPolynomial, Q: MatrixPolynomial,
                    params: WeightParams) -> float:
    """max |<P.op, Q> - <P, Q.op>| via quadrature."""
    return float(np.max(np.abs(pair(apply(op, P), Q, params) - pair(P, apply(op, Q), params))))


def adjoint_defect(P: MatrixPolynomial, Q: MatrixPolynomial, params: WeightParams) -> float:
    """max |<P', Q>^(nu+1) + c <P, Q.T>^(nu)|."""
    lhs = pair(mp_diff(P), Q, params.shifted())
    rhs = pair(P, apply(build_T_raising(params), Q), params) * nu_step_constant(params)
    return float(np.max(np.abs(lhs + rhs)))


def j_conjugation_residuals(params: WeightParams) -> tuple:
    """(J D J vs D, J(E + (l+1))J vs -(E + (l+1)))."""
    J = np.fliplr(np.eye(params.d))
    D = build_D(params)
    E = build_E(params).plus_constant((params.ell + 1) * np.eye(params.d))
    return operator_diff(D.conj(J), D), operator_diff(E.conj(J), E.scale(-1.0))


def commutator_residual(params: WeightParams, P: MatrixPolynomial) -> float:
    D, E = build_D(params), build_E(params)
    return max_coeff_diff(apply(E, apply(D, P)), apply(D, apply(E, P)))


def random_polynomial(rng: np.random.Generator, dim: int, degree: int,
                      var: str = "x") -> MatrixPolynomial:
    return MatrixPolynomial(rng.standard_normal((degree + 1, dim, dim)), var)


def operator_matrices_json(op: RightOperator) -> dict:
    return {f"A{k}": c.to_dict() for k, c in enumerate(op.coeffs)}


__all__: Sequence[str] = [
    "RightOperator", "RightSecondOrderOperator", "apply", "build_D", "build_E",
    "build_phi_psi", "build_T_raising", "nu_step_constant", "pearson_residual",
    "nu_step_derivative_residual", "darboux_residual", "symmetry_defect",
]
