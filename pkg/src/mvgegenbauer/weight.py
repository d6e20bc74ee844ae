"""The weight W(x) = (1-x^2)^(nu-1/2) W_pol(x) and its structure.

W_pol is assembled from its Gegenbauer expansion, converted exactly to the
power basis, and cached per parameter pair. The LDU factors, the determinant,
the commutant involution J, the reflection F and the orthogonal block
splitter Y all live here.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .matpoly import MatrixPolynomial, WeightedMatrixFunction, max_coeff_diff
from .params import WeightParams
from .scalar import (_MP, _resolve, compose_affine, gegenbauer, gegenbauer_coeffs,
                     hyp_terminating_coeffs, pochhammer)

_lock = threading.Lock()
_wpol_cache: dict = {}


def _fact(k: int) -> float:
    return float(math.factorial(k))


def alpha_coefficient(params: WeightParams, m: int, n: int, t: int, precision: str = "double"):
    """Gegenbauer coefficient alpha_t(m, n) of the (m, n) entry, m <= n."""
    L, nu = params.two_ell, params.nu
    if not (0 <= m <= n <= L):
        raise ValueError(f"need 0 <= m <= n <= 2l, got m={m}, n={n}, 2l={L}")
    if not (0 <= t <= m):
        raise ValueError(f"need 0 <= t <= m, got t={t}, m={m}")
    num = _resolve(precision)
    if t < n + m - L:
        return num(0)

    def fact(k):
        return num(math.factorial(k))

    def poch(a, k):
        return pochhammer(a, k, precision)

    r = m + n - 2 * t
    nu = num(nu)
    val = (-1) ** m * fact(n) * fact(m) * fact(r)
    val /= fact(t) * poch(2 * nu, r) * poch(nu, n + m - t)
    val *= poch(nu, n - t) * poch(nu, m - t)
    val /= fact(n - t) * fact(m - t)
    val *= (r + nu) / (n + m - t + nu)
    val *= fact(L - m) * poch(n - L, m - t) * poch(-L - nu, t)
    val *= (L + nu) / fact(L)
    return val


def _build_weight_pol(params: WeightParams) -> MatrixPolynomial:
    d = params.d
    L = params.two_ell
    coeffs = np.zeros((2 * L + 1, d, d))
    geg = {}
    for m in range(d):
        for n in range(m, d):
            entry = np.zeros(2 * L + 1)
            for t in range(max(0, n + m - L), m + 1):
                r = m + n - 2 * t
                if r not in geg:
                    geg[r] = gegenbauer_coeffs(r, params.nu)
                entry[: r + 1] += alpha_coefficient(params, m, n, t) * geg[r]
            coeffs[:, m, n] = entry
            coeffs[:, n, m] = entry
    return MatrixPolynomial(coeffs, "x")


def weight_pol(params: WeightParams) -> MatrixPolynomial:
    """W_pol as a symmetric matrix polynomial (cached, built once per params)."""
    key = (params.two_ell, params.nu)
    hit = _wpol_cache.get(key)
    if hit is not None:
        return hit
    with _lock:
        hit = _wpol_cache.get(key)
        if hit is None:
            hit = _build_weight_pol(params)
            _wpol_cache[key] = hit
    return hit


def weight_function(params: WeightParams) -> WeightedMatrixFunction:
    return WeightedMatrixFunction(params.nu - 0.5, weight_pol(params))


def weight_at(params: WeightParams, x: float) -> np.ndarray:
    """Full weight W(x) at an interior point."""
    return (1.0 - x * x) ** (params.nu - 0.5) * weight_pol(params)(x)


def det_lu(params: WeightParams, x: float, precision: str = "double") -> float:
    """det W(x) by LU factorization of the evaluated weight.

    With ``precision="extended"`` every entry is summed from its Gegenbauer
    expansion at 34 digits and factored in the same arithmetic. This matters
    near the endpoints for large l, where W(x) is ill conditioned (condition
    numbers around 1e8 at l = 3, |x| = 0.9) and a double LU keeps only about
    eight correct digits of the determinant.
    """
    if precision == "double":
        return float(np.linalg.det(weight_at(params, x)))
    if precision != "extended":
        raise ValueError(f"unknown precision {precision!r}")
    d, L = params.d, params.two_ell
    xm = _MP.mpf(x)
    M = _MP.matrix(d, d)
    for m in range(d):
        for n in range(m, d):
            v = _MP.mpf(0)
            for t in range(max(0, n + m - L), m + 1):
                v += alpha_coefficient(params, m, n, t, "extended") * gegenbauer(
                    m + n - 2 * t, params.nu, xm, "extended")
            M[m, n] = M[n, m] = v
    pre = (1 - xm * xm) ** (_MP.mpf(params.nu) - _MP.mpf(0.5))
    return float(_MP.det(M) * pre ** d)


# -- LDU ------------------------------------------------------------------

def t_coefficient(params: WeightParams, k: int) -> float:
    L, nu = params.two_ell, params.nu
    val = _fact(k) * pochhammer(nu, k, "double") / pochhammer(nu + 0.5, k, "double")
    val *= pochhammer(2 * nu + L, k, "double") * (L + nu)
    val /= pochhammer(L - k + 1, k, "double") * pochhammer(2 * nu + k - 1, k, "double")
    return val


def t_diag(params: WeightParams) -> np.ndarray:
    return np.array([t_coefficient(params, k) for k in range(params.d)])


@dataclass(frozen=True)
class LDUFactors:
    """W_pol = L diag(t_k (1-x^2)^k) L^T."""

    L: MatrixPolynomial
    tdiag: np.ndarray

    @property
    def k_exponents(self) -> np.ndarray:
        return np.arange(len(self.tdiag))

    def middle(self) -> MatrixPolynomial:
        d = len(self.tdiag)
        c = np.zeros((2 * d - 1, d, d))
        for k, t in enumerate(self.tdiag):
            c[: 2 * k + 1, k, k] = t * np.polynomial.polynomial.polypow([1.0, 0.0, -1.0], k)
        return MatrixPolynomial(c, "x")

    def reconstruct(self) -> MatrixPolynomial:
        return self.L * self.middle() * self.L.T()


def l_entry_coeffs(params: WeightParams, m: int, k: int) -> np.ndarray:
    """(L)_{m,k} = m!/((m-k)! k!) 2F1(k-m, m+k+2nu; k+nu+1/2; (1-x)/2) in powers of x."""
    nu = params.nu
    c = hyp_terminating_coeffs((-m + k, m + k + 2 * nu), (0.5 + k + nu,))
    c = c * (_fact(m) / (_fact(m - k) * _fact(k)))
    return compose_affine(c, 0.5, -0.5)


def ldu_factors(params: WeightParams) -> LDUFactors:
    d = params.d
    c = np.zeros((d, d, d))
    for m in range(d):
        for k in range(m + 1):
            e = l_entry_coeffs(params, m, k)
            c[: len(e), m, k] = e
    return LDUFactors(MatrixPolynomial(c, "x"), t_diag(params))


def det_weight(params: WeightParams, x: float) -> float:
    """Closed-form determinant of the full weight W(x)."""
    L = params.two_ell
    expo = (L + 1) * (params.ell + params.nu - 0.5)
    return (1.0 - x * x) ** expo * float(np.prod(t_diag(params)))


# -- symmetries ---------------------------------------------------------------

@dataclass(frozen=True)
class SymmetryData:
    J: np.ndarray
    F: np.ndarray
    Y: np.ndarray


def _antidiag(p: int) -> np.ndarray:
    return np.fliplr(np.eye(p))


def block_splitter(two_ell: int) -> np.ndarray:
    """Orthogonal Y with Y W_pol Y^T block diagonal (J-even block first)."""
    h = np.sqrt(2.0) / 2.0
    if two_ell % 2 == 1:
        p1 = (two_ell + 1) // 2
        I, J = np.eye(p1), _antidiag(p1)
        return h * np.block([[I, J], [-J, I]])
    p = two_ell // 2
    Y = np.zeros((two_ell + 1, two_ell + 1))
    I, J = np.eye(p), _antidiag(p)
    Y[:p, :p] = h * I
    Y[:p, p + 1:] = h * J
    Y[p, p] = 1.0
    Y[p + 1:, :p] = -h * J
    Y[p + 1:, p + 1:] = h * I
    return Y


def symmetry_data(params: WeightParams) -> SymmetryData:
    d = params.d
    return SymmetryData(_antidiag(d), np.diag((-1.0) ** np.arange(d)), block_splitter(params.two_ell))


def block_sizes(two_ell: int) -> tuple:
    plus = (two_ell + 2) // 2
    return plus, two_ell + 1 - plus


def block_split(params: WeightParams, tol: float = 1e-11):
    """(W_+, W_-): diagonal blocks of Y W_pol Y^T; raises if the off blocks exceed tol."""
    Y = block_splitter(params.two_ell)
    Z = weight_pol(params).conj(Y)
    p, _ = block_sizes(params.two_ell)
    off = max(np.max(np.abs(Z.coeffs[:, :p, p:]), initial=0.0),
              np.max(np.abs(Z.coeffs[:, p:, :p]), initial=0.0))
    if off > tol * max(1.0, Z.max_abs()):
        raise ArithmeticError(f"Y W Y^T is not block diagonal (off-block {off:.3e})")
    return (MatrixPolynomial(Z.coeffs[:, :p, :p], "x"),
            MatrixPolynomial(Z.coeffs[:, p:, p:], "x"))


def off_block_max(params: WeightParams) -> float:
    Y = block_splitter(params.two_ell)
    Z = weight_pol(params).conj(Y)
    p, _ = block_sizes(params.two_ell)
    return float(max(np.max(np.abs(Z.coeffs[:, :p, p:]), initial=0.0),
                     np.max(np.abs(Z.coeffs[:, p:, :p]), initial=0.0)))


@dataclass
class PositivityReport:
    ok: bool
    min_eigenvalue: float
    failures: list


def positivity_check(params: WeightParams, grid: Sequence[float]) -> PositivityReport:
    """Cholesky-factor W_pol at each grid point; report failures instead of raising."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.abs(grid) >= 1):
        raise ValueError("grid points must lie in (-1, 1)")
    vals = weight_pol(params)(grid)
    failures = []
    min_eig = np.inf
    for x, w in zip(grid, vals):
        try:
            np.linalg.cholesky(w)
        except np.linalg.LinAlgError:
            failures.append(float(x))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(w)[0]))
    return PositivityReport(not failures, min_eig, failures)


def entry_degrees(params: WeightParams) -> np.ndarray:
    W = weight_pol(params)
    d = params.d
    out = np.full((d, d), -1, dtype=int)
    scale = max(1.0, W.max_abs())
    for i in range(d):
        for j in range(d):
            nz = np.nonzero(np.abs(W.coeffs[:, i, j]) > 1e-12 * scale)[0]
            if nz.size:
                out[i, j] = nz[-1]
    return out


def expected_entry_degree(params: WeightParams, m: int, n: int) -> int:
    return min(m + n, 2 * params.two_ell - m - n)


def persymmetry_residual(params: WeightParams) -> float:
    """Coefficient distance between J W_pol J and W_pol."""
    J = symmetry_data(params).J
    return max_coeff_diff(weight_pol(params).conj(J), weight_pol(params))


def reflection_residual(params: WeightParams) -> float:
    """Coefficient distance between W_pol(x) F and F W_pol(-x)."""
    F = symmetry_data(params).F
    W = weight_pol(params)
    flip = (-1.0) ** np.arange(W.coeffs.shape[0])
    W_neg = MatrixPolynomial(W.coeffs * flip[:, None, None], "x", W.dim)
    return max_coeff_diff(W * F, F * W_neg)
