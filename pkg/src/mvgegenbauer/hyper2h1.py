"""Matrix hypergeometric route on [0, 1].

In u = (1 - x)/2 the polynomials R_n(u) = (-1)^n 2^(-n) P_n(1 - 2u) are monic
and satisfy R_n D_alpha = Lambda_n(D_alpha) R_n for the pencil
D_alpha = D~ + alpha E~. Transposing a row of that equation gives a vector
hypergeometric equation whose polynomial solution is a terminating 2H1 series
in Tirao's bracket notation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matpoly import MatrixPolynomial, linear, max_coeff_diff, mp_change_var
from .operators import RightOperator, d_matrices, e_matrices
from .params import WeightParams

DEFAULT_ALPHA = math.sqrt(2.0)


def tilde_matrices(params: WeightParams) -> dict:
    """Coefficient matrices of D~ and E~, the u-variable forms of D and E."""
    m = d_matrices(params)
    e = e_matrices(params)
    return {
        "C": 0.5 * (m["U"] - m["C"]),
        "U": m["U"].copy(),
        "V": m["V"].copy(),
        "B0": -0.5 * (e["B0"] + e["B1"]),
        "B1": e["B1"].copy(),
        "A0": e["A0"].copy(),
    }


def _hyper_operator(C, U, V) -> RightOperator:
    """u(1-u) d^2/du^2 + d/du (C - uU) - V."""
    d = C.shape[0]
    A2 = MatrixPolynomial(np.stack([np.zeros((d, d)), np.eye(d), -np.eye(d)]), "u")
    return RightOperator((MatrixPolynomial.constant(-V, "u"), linear(C, -U, "u"), A2))


def build_D_tilde(params: WeightParams) -> RightOperator:
    t = tilde_matrices(params)
    return _hyper_operator(t["C"], t["U"], t["V"])


def build_E_tilde(params: WeightParams) -> RightOperator:
    t = tilde_matrices(params)
    return RightOperator((MatrixPolynomial.constant(t["A0"], "u"), linear(t["B0"], t["B1"], "u")))


def alpha_matrices(params: WeightParams, alpha: float):
    """(C_alpha, U_alpha, V_alpha)."""
    t = tilde_matrices(params)
    return t["C"] + alpha * t["B0"], t["U"] - alpha * t["B1"], t["V"] - alpha * t["A0"]


def build_D_alpha(params: WeightParams, alpha: float):
    C, U, V = alpha_matrices(params, alpha)
    return _hyper_operator(C, U, V), (C, U, V)


def eigen_D_alpha(params: WeightParams, alpha: float, n: int) -> np.ndarray:
    """Diagonal of Lambda_n(D_alpha) = -n^2 - n(U_alpha - 1) - V_alpha."""
    _, U, V = alpha_matrices(params, alpha)
    return -n * n - n * (np.diag(U) - 1) - np.diag(V)


def lambda_n_alpha(params: WeightParams, alpha: float, n: int, j: int) -> float:
    """lambda_n^alpha(j) in closed form."""
    L, nu = params.two_ell, params.nu
    if not 0 <= j <= L:
        raise ValueError(f"j must lie in [0, {L}]")
    ell = L / 2
    # from U_alpha = (2l+2nu+1) + alpha(l-j)/l and V_alpha = V~ - alpha A~0
    u_jj = L + 2 * nu + 1 + alpha * (ell - j) / ell
    a0 = (L + 2) * (j - L) / L - (nu - 1) * (ell - j) / ell
    v_jj = -j * (L - j) + (nu - 1) * (L + nu + 1) - alpha * a0
    return -n * n - n * (u_jj - 1) - v_jj


def M_matrix(params: WeightParams, alpha: float, n: int, lam: float) -> np.ndarray:
    """M_n^alpha(lambda) = lambda - Lambda_n(D_alpha)."""
    return np.diag(lam - eigen_D_alpha(params, alpha, n))


def collision_gap(params: WeightParams, alpha: float, n_max: int) -> float:
    """Smallest |lambda_n^alpha(j) - lambda_m^alpha(i)| over distinct (n, j), (m, i)."""
    vals = np.sort(np.concatenate([eigen_D_alpha(params, alpha, n) for n in range(n_max + 1)]))
    if len(vals) < 2:
        return math.inf
    return float(np.min(np.diff(vals)))


@dataclass(frozen=True)
class HypergeometricData:
    """(C, U, V) of z(1-z)F'' + (C - zU)F' - VF = 0."""

    C: np.ndarray
    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        ev = np.linalg.eigvals(self.C)
        bad = [e for e in ev if abs(e.imag) < 1e-9 and e.real <= 1e-9
               and abs(e.real - round(e.real)) < 1e-9]
        if bad:
            raise ValueError(f"C has a nonpositive integer eigenvalue {bad[0].real:g}")

    def shifted(self) -> "HypergeometricData":
        """Parameters of the derivative: (C+1, U+2, V+U)."""
        I = np.eye(self.C.shape[0])
        return HypergeometricData(self.C + I, self.U + 2 * I, self.V + self.U)


def row_data(params: WeightParams, alpha: float, n: int, i: int) -> HypergeometricData:
    """Transposed (C_alpha, U_alpha, V_alpha + lambda_n^alpha(i))."""
    C, U, V = alpha_matrices(params, alpha)
    lam = eigen_D_alpha(params, alpha, n)[i]
    return HypergeometricData(C.T.copy(), U.T.copy(), V.T + lam * np.eye(params.d))


def h2f1_bracket(data: HypergeometricData, N: int) -> list:
    """[C,U,V]_0 .. [C,U,V]_N."""
    d = data.C.shape[0]
    I = np.eye(d)
    out = [I]
    for i in range(N):
        rhs = (i * i * I + i * (data.U - I) + data.V) @ out[-1]
        out.append(np.linalg.solve(data.C + i * I, rhs))
    return out


class TerminationError(ArithmeticError):
    """The series built for a row did not terminate at the expected degree."""


def monic_row_2h1(params: WeightParams, alpha: float, n: int, i: int,
                  tol: float = 1e-8) -> np.ndarray:
    """Row i of R_n as an (n+1, d) array of u-power coefficients."""
    data = row_data(params, alpha, n, i)
    br = h2f1_bracket(data, n + 1)
    e = np.zeros(params.d)
    e[i] = 1.0
    start = math.factorial(n) * np.linalg.solve(br[n], e)
    tail = br[n + 1] @ start
    scale = max(1.0, float(np.max(np.abs(start))))
    if float(np.max(np.abs(tail))) > tol * scale:
        raise TerminationError(f"bracket {n + 1} leaves {np.max(np.abs(tail)):.3e} on row {i}")
    return np.stack([br[k] @ start / math.factorial(k) for k in range(n + 1)])


def monic_R_2h1(params: WeightParams, n: int, alpha: float = DEFAULT_ALPHA) -> MatrixPolynomial:
    """R_n assembled row by row from the 2H1 series."""
    d = params.d
    c = np.zeros((n + 1, d, d))
    for i in range(d):
        c[:, i, :] = monic_row_2h1(params, alpha, n, i)
    return MatrixPolynomial(c, "u", d)


def P_from_R(R: MatrixPolynomial, n: int) -> MatrixPolynomial:
    """P_n(x) = (-2)^n R_n((1 - x)/2)."""
    return mp_change_var(R) * float((-2.0) ** n)


def R_from_P(P: MatrixPolynomial, n: int) -> MatrixPolynomial:
    """R_n(u) = (-1)^n 2^(-n) P_n(1 - 2u)."""
    return mp_change_var(P) * float((-0.5) ** n)


def monic_P_2h1(params: WeightParams, n: int, alpha: float = DEFAULT_ALPHA) -> MatrixPolynomial:
    return P_from_R(monic_R_2h1(params, n, alpha), n)


def subleading_coefficient(params: WeightParams, n: int) -> np.ndarray:
    """Closed-form u^(n-1) coefficient R_{n,n-1} of R_n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    L, nu = params.two_ell, params.nu
    d = params.d
    R = np.zeros((d, d))
    for j in range(d):
        R[j, j] = -n / 2
        if j >= 1:
            R[j, j - 1] = j * n / (4 * (j + n + nu - 1))
        if j <= L - 1:
            R[j, j + 1] = n * (L - j) / (4 * (L + n + nu - j - 1))
    return R


def x_from_subleading(params: WeightParams, n: int) -> np.ndarray:
    """X_n = R_{n,n-1} - R_{n+1,n} (with R_{0,-1} = 0)."""
    lower = subleading_coefficient(params, n) if n >= 1 else np.zeros((params.d, params.d))
    return lower - subleading_coefficient(params, n + 1)


def derivative_parameter_defect(params: WeightParams, alpha: float, n: int, i: int) -> float:
    """Compare the derivative data of row (nu, n, i) with the data of row (nu+1, n-1, i)."""
    a = row_data(params, alpha, n, i).shifted()
    b = row_data(params.shifted(), alpha, n - 1, i)
    return float(max(np.max(np.abs(a.C - b.C)), np.max(np.abs(a.U - b.U)), np.max(np.abs(a.V - b.V))))


def bracket_recursion_defect(data: HypergeometricData, N: int) -> float:
    br = h2f1_bracket(data, N)
    I = np.eye(data.C.shape[0])
    worst = 0.0
    for i in range(N):
        lhs = (data.C + i * I) @ br[i + 1]
        rhs = (i * i * I + i * (data.U - I) + data.V) @ br[i]
        worst = max(worst, float(np.max(np.abs(lhs - rhs))) / max(1.0, float(np.max(np.abs(rhs)))))
    return worst


def bracket_shift_defect(data: HypergeometricData, n: int) -> float:
    """[C,U,V]_{n+1} against [C+1,U+2,V+U]_n [C,U,V]_1 (relative)."""
    full = h2f1_bracket(data, n + 1)
    first = full[1]
    sh = h2f1_bracket(data.shifted(), n)[n] @ first
    return float(np.max(np.abs(full[n + 1] - sh)) / max(1.0, float(np.max(np.abs(sh)))))


def eigen_residual_u(op: RightOperator, R: MatrixPolynomial, lam: np.ndarray) -> float:
    from .operators import apply

    return max_coeff_diff(apply(op, R), MatrixPolynomial(np.diag(lam) @ R.coeffs, "u", R.dim))
