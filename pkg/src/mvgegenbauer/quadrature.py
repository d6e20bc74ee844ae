"""Gauss rules for (1-x^2)^(nu-1/2) and the matrix pairing <P, Q>.

Nodes are eigenvalues of the symmetric tridiagonal Jacobi matrix of the
monic Gegenbauer recurrence. Weights are the squared first components of the
normalized eigenvectors times the total mass, evaluated through the explicit
eigenvector formula w_i = mass / sum_k p_k(x_i)^2 with p_k orthonormal, which
keeps full relative accuracy for the small weights near the endpoints.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .matpoly import MatrixPolynomial, mp_eval
from .params import WeightParams
from .scalar import gamma_ratio_seed

_lock = threading.Lock()
_rule_cache: dict = {}


@dataclass(frozen=True)
class QuadratureRule:
    nu: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def exact_degree(self) -> int:
        return 2 * len(self.nodes) - 1

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """sum_i w_i values[i] (values indexed by node along axis 0)."""
        return np.tensordot(self.weights, values, axes=(0, 0))


def total_mass(nu: float) -> float:
    return float(gamma_ratio_seed(nu, "double"))


def _recurrence_b(nu: float, N: int) -> np.ndarray:
    k = np.arange(1, N, dtype=float)
    return k * (k + 2 * nu - 1) / (4 * (k + nu) * (k + nu - 1))


def _build_rule(nu: float, N: int) -> QuadratureRule:
    b = _recurrence_b(nu, N)
    off = np.sqrt(b)
    nodes = eigh_tridiagonal(np.zeros(N), off, eigvals_only=True)
    nodes = np.sort(nodes)
    nodes = 0.5 * (nodes - nodes[::-1])
    # orthonormal recurrence x p_k = s_{k+1} p_{k+1} + s_k p_{k-1}, p_0 = 1
    acc = np.ones(N)
    prev = np.zeros(N)
    cur = np.ones(N)
    for k in range(N - 1):
        nxt = (nodes * cur - (off[k - 1] * prev if k > 0 else 0.0)) / off[k]
        prev, cur = cur, nxt
        acc += cur * cur
    weights = total_mass(nu) / acc
    weights = 0.5 * (weights + weights[::-1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(float(nu), nodes, weights)


def gauss_rule(nu: float, N: int) -> QuadratureRule:
    """N-point rule exact to degree 2N-1 for the weight (1-x^2)^(nu-1/2) (cached)."""
    if N < 1:
        raise ValueError("N must be positive")
    if not nu > 0:
        raise ValueError("nu must be positive")
    key = (float(nu), int(N))
    hit = _rule_cache.get(key)
    if hit is not None:
        return hit
    with _lock:
        hit = _rule_cache.get(key)
        if hit is None:
            hit = _build_rule(float(nu), int(N))
            _rule_cache[key] = hit
    return hit


def jacobi_matrix(nu: float, N: int) -> np.ndarray:
    off = np.sqrt(_recurrence_b(nu, N))
    return np.diag(off, 1) + np.diag(off, -1)


def moment(nu: float, k: int) -> float:
    """Exact moment int x^k (1-x^2)^(nu-1/2) dx (Beta function)."""
    if k % 2:
        return 0.0
    j = k // 2
    return math.exp(math.lgamma(j + 0.5) + math.lgamma(nu + 0.5) - math.lgamma(j + nu + 1.0))


def rule_size_for(total_degree: int) -> int:
    return max(1, -(-total_degree // 2) + 1)


def pair_with_weight(P: MatrixPolynomial, Q: MatrixPolynomial, wpol: MatrixPolynomial,
                     nu: float, rule: QuadratureRule | None = None) -> np.ndarray:
    """int P(x) (1-x^2)^(nu-1/2) wpol(x) Q(x)^T dx by Gauss quadrature."""
    if P.var != "x" or Q.var != "x" or wpol.var != "x":
        raise ValueError("pairing is defined for x-variable polynomials")
    if not (P.dim == Q.dim == wpol.dim):
        raise ValueError("dimension mismatch")
    need = max(P.degree, 0) + max(Q.degree, 0) + max(wpol.degree, 0)
    if rule is None:
        rule = gauss_rule(nu, rule_size_for(need))
    elif rule.exact_degree < need:
        raise ValueError(f"rule exact to degree {rule.exact_degree} cannot resolve degree {need}")
    elif abs(rule.nu - nu) > 1e-15:
        raise ValueError("rule built for a different nu")
    x = rule.nodes
    Pv, Qv, Wv = mp_eval(P, x), mp_eval(Q, x), mp_eval(wpol, x)
    return np.einsum("i,iab,ibc,idc->ad", rule.weights, Pv, Wv, Qv)


def pair(P: MatrixPolynomial, Q: MatrixPolynomial, params: WeightParams,
         rule: QuadratureRule | None = None) -> np.ndarray:
    """<P, Q> = int P W Q^T dx for the weight of ``params``."""
    from .weight import weight_pol

    return pair_with_weight(P, Q, weight_pol(params), params.nu, rule)
