"""The monic family P_n^(nu): three-term recurrence, norms, Rodrigues formula.

The recurrence route is the reference construction. Every other route in the
package (hypergeometric, Racah) is compared against it.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from ._kernels import recurrence_step
from .matpoly import MatrixPolynomial, max_coeff_diff, mp_diff, wmf_diff, WeightedMatrixFunction
from .operators import K_diag, apply, build_T_raising
from .params import WeightParams
from .quadrature import gauss_rule, pair, pair_with_weight, rule_size_for
from .scalar import gamma_ratio_seed, pochhammer
from .weight import block_sizes, block_split, block_splitter, weight_pol


def recurrence_coefficients(params: WeightParams, n: int):
    """(X_n, Y_n): tridiagonal X_n and diagonal Y_n, with Y_0 = 0."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    L, nu = params.two_ell, params.nu
    d = params.d
    X = np.zeros((d, d))
    Y = np.zeros((d, d))
    for j in range(d):
        X[j, j] = 0.5
        # the band terms are skipped outside the index range, where their
        # closed forms would read 0/0 at nu = 1, n = 0
        if j >= 1:
            X[j, j - 1] = -j * (j + nu - 1) / (4 * (j + n + nu - 1) * (j + n + nu))
        if j <= L - 1:
            X[j, j + 1] = -(L - j) * (L - j + nu - 1) / (
                4 * (L - j + n + nu - 1) * (L + n - j + nu))
        if n >= 1:
            Y[j, j] = n * (n + nu - 1) * (L + n + nu) * (L + n + 2 * nu - 1) / (
                16 * (L + n + nu - j - 1) * (L + n + nu - j) * (j + n + nu - 1) * (j + n + nu))
    return X, Y


@dataclass
class MonicFamily:
    """P_0..P_N built by the recurrence, with closed-form norms."""

    params: WeightParams
    polys: list = field(default_factory=list)
    norms: list = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.polys) - 1

    def __getitem__(self, n: int) -> MatrixPolynomial:
        return self.polys[n]


_lock = threading.Lock()
_family_cache: dict = {}


def _build_family(params: WeightParams, N: int) -> MonicFamily:
    d = params.d
    I = np.eye(d)
    raw = [I[None].copy()]
    prev = np.zeros((1, d, d))
    for n in range(N):
        X, Y = recurrence_coefficients(params, n)
        nxt = recurrence_step(raw[-1], prev, I - 2 * X, 4 * Y)
        prev = raw[-1]
        raw.append(nxt)
    polys = [MatrixPolynomial(c, "x", d) for c in raw]
    norms = [norm_matrix(params, n) for n in range(N + 1)]
    return MonicFamily(params, polys, norms)


def monic_family(params: WeightParams, N: int) -> MonicFamily:
    """P_0..P_N (cached per parameters; a longer cached family is truncated)."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    key = (params.two_ell, params.nu)
    hit = _family_cache.get(key)
    if hit is None or hit.N < N:
        with _lock:
            hit = _family_cache.get(key)
            if hit is None or hit.N < N:
                hit = _build_family(params, N)
                _family_cache[key] = hit
    if hit.N == N:
        return hit
    return MonicFamily(params, hit.polys[: N + 1], hit.norms[: N + 1])


def monic(params: WeightParams, n: int) -> MatrixPolynomial:
    return monic_family(params, n)[n]


def norm_matrix(params: WeightParams, n: int) -> np.ndarray:
    """Closed-form diagonal H_n, accumulated as a product of per-step ratios."""
    L, nu = params.two_ell, params.nu
    ell = L / 2
    seed = gamma_ratio_seed(nu, "double")
    out = np.zeros(params.d)
    for k in range(params.d):
        val = seed * nu * (L + nu + n) / (nu + n)
        for i in range(n):
            val *= (i + 1) * (ell + 0.5 + nu + i) * (L + nu + i) * (ell + nu + i)
            val /= (L + nu + 1 + i) * (nu + k + i) * (L + 2 * nu + n + i) * (L + nu - k + i)
        # k!(2l-k)!/(2l)! (n+nu+1)_{2l} / ((n+nu+1)_k (n+nu+1)_{2l-k})
        for i in range(k):
            val *= (i + 1) / (L - i)
        for i in range(L - k):
            val *= (n + nu + 1 + k + i) / (n + nu + 1 + i)
        out[k] = val
    return np.diag(out)


def rodrigues_constant(params: WeightParams, n: int) -> np.ndarray:
    L, nu = params.two_ell, params.nu
    ell = L / 2
    out = np.zeros(params.d)
    for k in range(params.d):
        val = (-1.0) ** n
        for i in range(n):
            val *= (nu + i) * (ell + nu + 0.5 + i) * (ell + nu + i) * (L + nu + i)
            val /= (nu + 0.5 + i) * (nu + k + i) * (L + nu + 1 + i) * (L + 2 * nu + n + i) * (L + nu - k + i)
        out[k] = val
    return np.diag(out)


class RodriguesError(ArithmeticError):
    """The sampled Rodrigues expression is not a polynomial of the expected degree."""


def rodrigues(params: WeightParams, n: int, tol: float = 1e-8) -> MatrixPolynomial:
    """P_n from the n-th derivative of the shifted weight, by sampling and fitting."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    d = params.d
    f = WeightedMatrixFunction(params.nu + n - 0.5, weight_pol(params.shifted(n)))
    for _ in range(n):
        f = wmf_diff(f)
    # after n derivatives the exponent is nu - 1/2 and Q_n is the polynomial part
    Q = f.poly
    G = rodrigues_constant(params, n)
    m = n + params.two_ell * d + 3
    xs = np.cos(np.pi * (np.arange(m) + 0.5) / m)
    Wv = weight_pol(params)(xs)
    samples = np.einsum("ab,ibc->iac", G, np.linalg.solve(Wv.transpose(0, 2, 1),
                                                          Q(xs).transpose(0, 2, 1)).transpose(0, 2, 1))
    V = np.polynomial.chebyshev.chebvander(xs, n)
    flat = samples.reshape(m, d * d)
    cheb, *_ = np.linalg.lstsq(V, flat, rcond=None)
    resid = float(np.max(np.abs(V @ cheb - flat)))
    if resid > tol * max(1.0, float(np.max(np.abs(flat)))):
        raise RodriguesError(f"Rodrigues samples deviate from degree {n} by {resid:.3e}")
    power = np.stack([np.polynomial.chebyshev.cheb2poly(cheb[:, c]) for c in range(d * d)], axis=1)
    power = np.pad(power, ((0, n + 1 - power.shape[0]), (0, 0)))
    return MatrixPolynomial(power.reshape(n + 1, d, d), "x", d)


def gram_matrix(params: WeightParams, n: int, m: int) -> np.ndarray:
    fam = monic_family(params, max(n, m))
    return pair(fam[n], fam[m], params)


def orthogonality_defect(params: WeightParams, N: int) -> float:
    """max over n, m <= N of |<P_n, P_m> - delta_nm H_n| relative to max |H_n|."""
    fam = monic_family(params, N)
    worst = 0.0
    for n in range(N + 1):
        for m in range(N + 1):
            G = pair(fam[n], fam[m], params)
            target = fam.norms[n] if n == m else 0.0
            scale = float(np.max(np.abs(fam.norms[max(n, m)])))
            worst = max(worst, float(np.max(np.abs(G - target))) / scale)
    return worst


def nu_shift_residuals(params: WeightParams, n: int) -> tuple:
    """Residuals of the two identities expressing P_n^(nu) through the (nu+1)-family."""
    if n < 1:
        raise ValueError("n must be at least 1")
    up = params.shifted()
    lo = monic_family(params, n)
    hi = monic_family(up, n)
    d = params.d
    I = np.eye(d)
    Xn, Yn = recurrence_coefficients(params, n)
    Xu, Yu = recurrence_coefficients(up, n - 1)
    zero = MatrixPolynomial.zero(d)
    hi_m2 = hi[n - 2] if n >= 2 else zero
    x = MatrixPolynomial.monomial(I, 1)
    left = lo[n] + x * hi[n - 1] * float(n)
    right = (hi[n] * float(n + 1) + (I - 2 * Xn) * hi[n - 1] * float(n)
             + (4.0 * (n - 1) * Yn) * hi_m2)
    first = max_coeff_diff(left, right)
    right2 = hi[n] + (2 * n * (Xu - Xn)) * hi[n - 1] + (4 * ((n - 1) * Yn - n * Yu)) * hi_m2
    second = max_coeff_diff(lo[n], right2)
    return first, second


def lowering_residual(params: WeightParams, n: int) -> float:
    """dP_n^(nu)/dx - n P_{n-1}^(nu+1)."""
    if n < 1:
        return mp_diff(monic(params, 0)).max_abs()
    return max_coeff_diff(mp_diff(monic(params, n)), monic(params.shifted(), n - 1) * float(n))


def raising_residual(params: WeightParams, n: int) -> float:
    """P_{n-1}^(nu+1) T^(nu) - K_n P_n^(nu)."""
    lhs = apply(build_T_raising(params), monic(params.shifted(), n - 1))
    return max_coeff_diff(lhs, np.diag(K_diag(params, n)) * monic(params, n))


def y_norm_ratio_defect(params: WeightParams, n: int) -> float:
    """|Y_n - H_n H_{n-1}^{-1} / 4| relative to |Y_n|."""
    _, Y = recurrence_coefficients(params, n)
    target = 0.25 * norm_matrix(params, n) @ np.linalg.inv(norm_matrix(params, n - 1))
    return float(np.max(np.abs(Y - target)) / np.max(np.abs(Y)))


def tail_norms(params: WeightParams, n: int) -> tuple:
    """(||1 - 2X_n||_2, ||4Y_n - 1/4||_2) in spectral norm."""
    X, Y = recurrence_coefficients(params, n)
    I = np.eye(params.d)
    return float(np.linalg.norm(I - 2 * X, 2)), float(np.linalg.norm(4 * Y - 0.25 * I, 2))


def block_family_defect(params: WeightParams, N: int) -> float:
    """Conjugating P_n by the block splitter gives block-diagonal polynomials
    orthogonal against the split weights (relative defect)."""
    Y = block_splitter(params.two_ell)
    p, _ = block_sizes(params.two_ell)
    Wp, Wm = block_split(params)
    fam = monic_family(params, N)
    blocks = []
    worst = 0.0
    for n in range(N + 1):
        Z = fam[n].conj(Y)
        scale = max(1.0, Z.max_abs())
        off = max(np.max(np.abs(Z.coeffs[:, :p, p:]), initial=0.0),
                  np.max(np.abs(Z.coeffs[:, p:, :p]), initial=0.0))
        worst = max(worst, off / scale)
        blocks.append((MatrixPolynomial(Z.coeffs[:, :p, :p], "x", p),
                       MatrixPolynomial(Z.coeffs[:, p:, p:], "x", params.d - p)))
    for side, W in ((0, Wp), (1, Wm)):
        if W.dim == 0:
            continue
        for n in range(N + 1):
            for m in range(n):
                G = pair_with_weight(blocks[n][side], blocks[m][side], W, params.nu)
                H = pair_with_weight(blocks[m][side], blocks[m][side], W, params.nu)
                worst = max(worst, float(np.max(np.abs(G))) / float(np.max(np.abs(H))))
    return worst
