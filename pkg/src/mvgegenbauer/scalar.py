"""Scalar special functions.

Shifted factorials, terminating hypergeometric sums, Gegenbauer polynomials
C_n^(nu) (classical and generic parameter) and the Racah-type 4F3 that mixes
the rows of the conjugated polynomials.

Two working precisions share one code path: ``"double"`` (Python floats) and
``"extended"`` (mpmath at 34 significant digits). The default comes from the
``MVGEG_PRECISION`` environment variable; every public function also accepts
an explicit ``precision=`` keyword.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from ._kernels import gegenbauer_grid

EXTENDED_DPS = 34

# a private context so extended arithmetic never touches mpmath's global state
_MP = mpmath.MPContext()
_MP.dps = EXTENDED_DPS


class DomainError(ValueError):
    """A denominator shifted factorial vanished before the series terminated."""


def default_precision() -> str:
    value = os.environ.get("MVGEG_PRECISION", "double").strip().lower()
    if value not in ("double", "extended"):
        raise ValueError(f"MVGEG_PRECISION must be 'double' or 'extended', got {value!r}")
    return value


def _resolve(precision):
    precision = precision or default_precision()
    if precision == "double":
        return float
    if precision == "extended":
        return _MP.mpf
    raise ValueError(f"unknown precision {precision!r}")


def _is_zero(v) -> bool:
    return v == 0


def pochhammer(a, k: int, precision: str | None = None):
    """Rising factorial (a)_k = a(a+1)...(a+k-1); (a)_0 = 1."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    num = _resolve(precision)
    a = num(a)
    out = num(1)
    for i in range(k):
        out *= a + i
    return out


def gamma_ratio_seed(nu, precision: str | None = None):
    """sqrt(pi) * Gamma(nu + 1/2) / Gamma(nu + 1), the total mass of (1-x^2)^(nu-1/2)."""
    if precision == "extended" or (precision is None and default_precision() == "extended"):
        nu = _MP.mpf(nu)
        return _MP.sqrt(_MP.pi) * _MP.exp(_MP.loggamma(nu + 0.5) - _MP.loggamma(nu + 1))
    return math.sqrt(math.pi) * math.exp(math.lgamma(nu + 0.5) - math.lgamma(nu + 1.0))


@dataclass(frozen=True)
class TerminatingSeriesSpec:
    """pFq(numer; denom; z) with ``numer[term_index] = -N`` fixing N+1 terms."""

    numer: tuple
    denom: tuple
    z: float
    term_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "numer", tuple(self.numer))
        object.__setattr__(self, "denom", tuple(self.denom))
        a = self.numer[self.term_index]
        if not (float(a) <= 0 and float(a) == int(float(a))):
            raise ValueError(f"numerator parameter {a!r} is not a nonpositive integer")

    @property
    def length(self) -> int:
        return -int(float(self.numer[self.term_index]))


def _series_terms(spec: TerminatingSeriesSpec, num, z):
    """Terms t_0..t_N of the series at argument z, by running term ratios."""
    N = spec.length
    numer = [num(a) for a in spec.numer]
    denom = [num(b) for b in spec.denom]
    for b in denom:
        for k in range(N):
            if _is_zero(b + k):
                raise DomainError(f"denominator ({float(b)})_k vanishes at k={k + 1} <= {N}")
    terms = [num(1)]
    t = num(1)
    for k in range(N):
        r = num(1)
        for a in numer:
            r *= a + k
        for b in denom:
            r /= b + k
        t = t * r * z / (k + 1)
        terms.append(t)
    return terms


def hyp_terminating(spec: TerminatingSeriesSpec, precision: str | None = None):
    """Exact finite sum of a terminating generalized hypergeometric series."""
    num = _resolve(precision)
    terms = _series_terms(spec, num, num(spec.z))
    total = num(0)
    for t in terms:
        total += t
    return total


def hyp_terminating_coeffs(numer: Sequence, denom: Sequence, term_index: int = 0) -> np.ndarray:
    """Power-series coefficients c_k of pFq(numer; denom; y) = sum_k c_k y^k (double)."""
    spec = TerminatingSeriesSpec(tuple(numer), tuple(denom), 1.0, term_index)
    return np.array(_series_terms(spec, float, 1.0), dtype=float)


def gegenbauer(n: int, nu, x, precision: str | None = None):
    """C_n^(nu)(x).

    For nu > 0 the three-term recurrence is used; otherwise the terminating
    2F1 form (2nu)_n/n! 2F1(-n, n+2nu; nu+1/2; (1-x)/2), which raises
    :class:`DomainError` when (nu+1/2)_k vanishes for some k <= n.
    """
    num = _resolve(precision)
    nu = num(nu)
    x = num(x)
    if n == 0:
        return num(1)
    if nu > 0:
        prev, cur = num(1), 2 * nu * x
        for r in range(1, n):
            prev, cur = cur, (2 * x * (r + nu) * cur - (r + 2 * nu - 1) * prev) / (r + 1)
        return cur
    pref = num(1)
    for i in range(n):
        pref = pref * (2 * nu + i) / (i + 1)
    spec = TerminatingSeriesSpec((-n, n + 2 * nu), (nu + num(1) / 2,), (1 - x) / 2)
    return pref * hyp_terminating(spec, precision)


def gegenbauer_values(n: int, nu: float, xs) -> np.ndarray:
    """Rows C_0..C_n of C_r^(nu) on a grid (nu > 0, double)."""
    return gegenbauer_grid(n, float(nu), np.asarray(xs, dtype=float))


def gegenbauer_coeffs(n: int, nu: float) -> np.ndarray:
    """Power-basis coefficients (ascending) of C_n^(nu)(x), double precision.

    Uses the coefficient form of the three-term recurrence for nu > 0 and the
    terminating 2F1 re-expanded in x for any other parameter.
    """
    if nu > 0:
        prev = np.zeros(n + 1)
        prev[0] = 1.0
        if n == 0:
            return prev
        cur = np.zeros(n + 1)
        cur[1] = 2.0 * nu
        for r in range(1, n):
            nxt = np.zeros(n + 1)
            nxt[1:] = 2.0 * (r + nu) * cur[:-1]
            nxt -= (r + 2.0 * nu - 1.0) * prev
            prev, cur = cur, nxt / (r + 1.0)
        return cur
    pref = 1.0
    for i in range(n):
        pref *= (2.0 * nu + i) / (i + 1.0)
    c = pref * hyp_terminating_coeffs((-n, n + 2.0 * nu), (nu + 0.5,))
    return compose_affine(c, 0.5, -0.5)


def compose_affine(c: np.ndarray, a: float, b: float) -> np.ndarray:
    """Coefficients of p(a + b t) given ascending coefficients of p(y)."""
    out = np.zeros(len(c))
    for ck in c[::-1]:
        # out <- out * (a + b t) + ck
        shifted = np.zeros(len(c))
        shifted[1:] = out[:-1]
        out = a * out + b * shifted
        out[0] += ck
    return out


def gegenbauer_norm(n: int, nu, precision: str | None = None):
    """Squared norm of C_n^(nu) against (1-x^2)^(nu-1/2) on [-1, 1]."""
    num = _resolve(precision)
    nu = num(nu)
    ratio = num(1)
    for i in range(n):
        ratio = ratio * (2 * nu + i) / (i + 1)
    return ratio * nu / (n + nu) * gamma_ratio_seed(nu, precision)


def racah_4f3(j: int, k: int, params, n: int, precision: str | None = None):
    """4F3(-j, j+2nu-1, -k, -n-nu-2l; nu, -n-k, -2l; 1), summed over min(j, k)+1 terms."""
    two_ell, nu = params.two_ell, params.nu
    if not (0 <= k <= two_ell and 0 <= j <= min(two_ell, n + k)):
        raise ValueError(f"racah_4f3 needs k <= 2l and j <= min(2l, n+k); got j={j}, k={k}, n={n}")
    num = _resolve(precision)
    nu = num(nu)
    numer = (-j, j + 2 * nu - 1, -k, -n - nu - two_ell)
    denom = (nu, -n - k, -two_ell)
    spec = TerminatingSeriesSpec(numer, denom, 1, term_index=0 if j <= k else 2)
    # the preconditions keep (-n-k)_i and (-2l)_i away from zero for i <= min(j, k)
    return hyp_terminating(spec, precision)
