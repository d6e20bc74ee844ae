"""Dense matrix polynomials and weighted matrix functions.

A :class:`MatrixPolynomial` stores a stack of d x d coefficient matrices in
the power basis of one variable, tagged ``"x"`` (on [-1, 1]) or ``"u"`` (on
[0, 1]). Operations refuse to mix tags. Values are immutable: every operation
returns a new object.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ._kernels import cauchy_matmul, horner_batch
from .scalar import compose_affine

VARS = ("x", "u")
TRIM_RTOL = 1e-13


class MatrixPolynomial:
    """Sum_k coeffs[k] * var**k with coeffs of shape (deg+1, d, d).

    Trailing coefficients whose max-abs entry is at most
    ``1e-13 * max(1, max-abs over all coefficients)`` are dropped, so the zero
    polynomial has an empty coefficient stack.
    """

    __slots__ = ("coeffs", "dim", "var")
    # make ndarray * MatrixPolynomial defer to __rmul__ (matrix product)
    __array_ufunc__ = None

    def __init__(self, coeffs, var: str = "x", dim: int | None = None):
        if var not in VARS:
            raise ValueError(f"variable tag must be one of {VARS}, got {var!r}")
        c = np.array(coeffs, dtype=float)
        if c.ndim == 2:
            c = c[None]
        if c.size == 0:
            if dim is None:
                raise ValueError("dim is required for an empty coefficient list")
            c = np.zeros((0, dim, dim))
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise ValueError(f"coefficients must have shape (n, d, d), got {c.shape}")
        if dim is not None and c.shape[1] != dim:
            raise ValueError(f"coefficient size {c.shape[1]} does not match dim {dim}")
        self.dim = c.shape[1]
        self.var = var
        self.coeffs = _trim(c)
        self.coeffs.setflags(write=False)

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, dim: int, var: str = "x") -> "MatrixPolynomial":
        return cls(np.zeros((0, dim, dim)), var, dim)

    @classmethod
    def constant(cls, mat, var: str = "x") -> "MatrixPolynomial":
        mat = np.atleast_2d(np.asarray(mat, dtype=float))
        return cls(mat[None], var)

    @classmethod
    def identity(cls, dim: int, var: str = "x") -> "MatrixPolynomial":
        return cls.constant(np.eye(dim), var)

    @classmethod
    def monomial(cls, mat, power: int, var: str = "x") -> "MatrixPolynomial":
        mat = np.asarray(mat, dtype=float)
        c = np.zeros((power + 1,) + mat.shape)
        c[power] = mat
        return cls(c, var)

    @classmethod
    def from_entries(cls, entries, var: str = "x") -> "MatrixPolynomial":
        """Build from a d x d nested list of 1-D ascending coefficient arrays."""
        d = len(entries)
        deg = max((len(np.atleast_1d(e)) for row in entries for e in row), default=0)
        c = np.zeros((max(deg, 1), d, d))
        for i, row in enumerate(entries):
            for j, e in enumerate(row):
                e = np.atleast_1d(np.asarray(e, dtype=float))
                c[: len(e), i, j] = e
        return cls(c, var)

    # -- basic queries ---------------------------------------------------
    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return self.coeffs.shape[0] - 1

    def is_zero(self) -> bool:
        return self.coeffs.shape[0] == 0

    def entry(self, i: int, j: int) -> np.ndarray:
        return self.coeffs[:, i, j].copy()

    def padded(self, length: int) -> np.ndarray:
        out = np.zeros((length, self.dim, self.dim))
        out[: self.coeffs.shape[0]] = self.coeffs
        return out

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def leading(self) -> np.ndarray:
        if self.is_zero():
            return np.zeros((self.dim, self.dim))
        return self.coeffs[-1].copy()

    # -- arithmetic sugar ------------------------------------------------
    def __add__(self, other):
        return mp_add(self, _coerce(other, self))

    def __radd__(self, other):
        return mp_add(_coerce(other, self), self)

    def __sub__(self, other):
        return mp_add(self, mp_scale(_coerce(other, self), -1.0))

    def __rsub__(self, other):
        return mp_add(_coerce(other, self), mp_scale(self, -1.0))

    def __neg__(self):
        return mp_scale(self, -1.0)

    def __mul__(self, other):
        if np.isscalar(other):
            return mp_scale(self, other)
        return mp_mul(self, _coerce(other, self))

    def __rmul__(self, other):
        if np.isscalar(other):
            return mp_scale(self, other)
        return mp_mul(_coerce(other, self), self)

    __matmul__ = __mul__
    __rmatmul__ = __rmul__

    def __call__(self, point):
        return mp_eval(self, point)

    def T(self) -> "MatrixPolynomial":
        return MatrixPolynomial(np.transpose(self.coeffs, (0, 2, 1)), self.var, self.dim)

    def conj(self, mat) -> "MatrixPolynomial":
        """mat @ self @ mat^T coefficientwise."""
        mat = np.asarray(mat, dtype=float)
        return MatrixPolynomial(mat @ self.coeffs @ mat.T, self.var, self.dim)

    def __repr__(self):
        return f"MatrixPolynomial(dim={self.dim}, var={self.var!r}, degree={self.degree})"

    def __eq__(self, other):
        if not isinstance(other, MatrixPolynomial):
            return NotImplemented
        return (self.var == other.var and self.dim == other.dim
                and self.coeffs.shape == other.coeffs.shape
                and bool(np.array_equal(self.coeffs, other.coeffs)))

    __hash__ = None

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        return {"dim": self.dim, "var": self.var, "coeffs": self.coeffs.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "MatrixPolynomial":
        return cls(np.array(data["coeffs"], dtype=float).reshape(-1, data["dim"], data["dim"]),
                   data["var"], data["dim"])

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "MatrixPolynomial":
        return cls.from_dict(json.loads(text))


def _trim(c: np.ndarray) -> np.ndarray:
    if c.shape[0] == 0:
        return c.copy()
    mags = np.max(np.abs(c), axis=(1, 2))
    thresh = TRIM_RTOL * max(1.0, float(mags.max()))
    keep = c.shape[0]
    while keep > 0 and mags[keep - 1] <= thresh:
        keep -= 1
    return c[:keep].copy()


def _coerce(other, like: MatrixPolynomial) -> MatrixPolynomial:
    if isinstance(other, MatrixPolynomial):
        return other
    if np.isscalar(other):
        return MatrixPolynomial.constant(other * np.eye(like.dim), like.var)
    return MatrixPolynomial.constant(other, like.var)


def _check(a: MatrixPolynomial, b: MatrixPolynomial):
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.var != b.var:
        raise ValueError(f"variable mismatch: {a.var!r} vs {b.var!r}")


def mp_add(a: MatrixPolynomial, b: MatrixPolynomial) -> MatrixPolynomial:
    _check(a, b)
    n = max(a.coeffs.shape[0], b.coeffs.shape[0])
    return MatrixPolynomial(a.padded(n) + b.padded(n), a.var, a.dim)


def mp_scale(a: MatrixPolynomial, s: float) -> MatrixPolynomial:
    return MatrixPolynomial(a.coeffs * float(s), a.var, a.dim)


def mp_mul(a: MatrixPolynomial, b: MatrixPolynomial) -> MatrixPolynomial:
    """Cauchy product in matrix-product order a * b (not commutative)."""
    _check(a, b)
    if a.is_zero() or b.is_zero():
        return MatrixPolynomial.zero(a.dim, a.var)
    return MatrixPolynomial(cauchy_matmul(a.coeffs, b.coeffs), a.var, a.dim)


def mp_eval(p: MatrixPolynomial, point):
    """Horner evaluation at a scalar (returns d x d) or at an array of points."""
    pts = np.asarray(point, dtype=float)
    if p.is_zero():
        return np.zeros(pts.shape + (p.dim, p.dim))
    vals = horner_batch(p.coeffs, pts.reshape(-1))
    return vals.reshape(pts.shape + (p.dim, p.dim))


def mp_diff(p: MatrixPolynomial, order: int = 1) -> MatrixPolynomial:
    c = p.coeffs
    for _ in range(order):
        if c.shape[0] <= 1:
            return MatrixPolynomial.zero(p.dim, p.var)
        c = c[1:] * np.arange(1, c.shape[0])[:, None, None]
    return MatrixPolynomial(c, p.var, p.dim)


def mp_change_var(p: MatrixPolynomial) -> MatrixPolynomial:
    """Switch between x and u with x = 1 - 2u (so u = (1 - x)/2)."""
    if p.var == "x":
        a, b, new = 1.0, -2.0, "u"
    else:
        a, b, new = 0.5, -0.5, "x"
    n = p.coeffs.shape[0]
    if n == 0:
        return MatrixPolynomial.zero(p.dim, new)
    flat = p.coeffs.reshape(n, -1)
    out = np.empty_like(flat)
    for col in range(flat.shape[1]):
        out[:, col] = compose_affine(flat[:, col], a, b)
    return MatrixPolynomial(out.reshape(p.coeffs.shape), new, p.dim)


def one_minus_x2(dim: int, power: int = 1, var: str = "x") -> MatrixPolynomial:
    """(1 - x^2)^power * Id."""
    base = np.polynomial.polynomial.polypow([1.0, 0.0, -1.0], power)
    return MatrixPolynomial(base[:, None, None] * np.eye(dim), var)


def x_times(p: MatrixPolynomial) -> MatrixPolynomial:
    """var * p."""
    c = np.zeros((p.coeffs.shape[0] + 1, p.dim, p.dim))
    c[1:] = p.coeffs
    return MatrixPolynomial(c, p.var, p.dim)


def linear(c0, c1, var: str = "x") -> MatrixPolynomial:
    """c0 + var * c1 for constant matrices."""
    return MatrixPolynomial(np.stack([np.asarray(c0, float), np.asarray(c1, float)]), var)


def max_coeff_diff(a: MatrixPolynomial, b: MatrixPolynomial) -> float:
    """Max-abs coefficient of a - b, computed before any trimming."""
    _check(a, b)
    n = max(a.coeffs.shape[0], b.coeffs.shape[0])
    if n == 0:
        return 0.0
    return float(np.max(np.abs(a.padded(n) - b.padded(n))))


def mp_invert_unipotent_lower(L: MatrixPolynomial, tol: float = 1e-12) -> MatrixPolynomial:
    """Polynomial inverse of a unipotent lower triangular matrix polynomial.

    Forward substitution on the polynomial entries:
    X_ii = 1 and X_ij = -sum_{j <= k < i} L_ik X_kj for i > j.
    """
    d = L.dim
    c = L.padded(max(L.coeffs.shape[0], 1))
    scale = max(1.0, float(np.max(np.abs(c))))
    upper = np.triu(np.ones((d, d), dtype=bool), 1)
    if np.any(np.abs(c[:, upper]) > tol * scale):
        raise ValueError("matrix polynomial is not lower triangular")
    diag = c[:, np.arange(d), np.arange(d)]
    expected = np.zeros_like(diag)
    expected[0] = 1.0
    if np.any(np.abs(diag - expected) > tol * scale):
        raise ValueError("diagonal entries are not identically 1")
    ent = [[np.trim_zeros(c[:, i, j], "b") for j in range(d)] for i in range(d)]
    X = [[np.zeros(1) for _ in range(d)] for _ in range(d)]
    for i in range(d):
        X[i][i] = np.ones(1)
        for j in range(i - 1, -1, -1):
            acc = np.zeros(1)
            for k in range(j, i):
                if ent[i][k].size and X[k][j].size:
                    acc = np.polynomial.polynomial.polyadd(acc, np.convolve(ent[i][k], X[k][j]))
            X[i][j] = -acc
    return MatrixPolynomial.from_entries(X, L.var)


# -- weighted matrix functions ---------------------------------------------

@dataclass(frozen=True)
class WeightedMatrixFunction:
    """(1 - x^2)**exponent * poly(x) on (-1, 1)."""

    exponent: float
    poly: MatrixPolynomial

    def __post_init__(self):
        if self.poly.var != "x":
            raise ValueError("weighted matrix functions live in the x variable")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return (1.0 - x ** 2)[..., None, None] ** self.exponent * mp_eval(self.poly, x)

    def times(self, right: MatrixPolynomial) -> "WeightedMatrixFunction":
        return WeightedMatrixFunction(self.exponent, self.poly * right)

    def left(self, left: MatrixPolynomial) -> "WeightedMatrixFunction":
        return WeightedMatrixFunction(self.exponent, left * self.poly)

    def scale(self, s: float) -> "WeightedMatrixFunction":
        return WeightedMatrixFunction(self.exponent, mp_scale(self.poly, s))

    def lowered(self, exponent: float) -> "WeightedMatrixFunction":
        """Same function written with a smaller exponent (integer step)."""
        k = self.exponent - exponent
        if abs(k - round(k)) > 1e-12 or round(k) < 0:
            raise ValueError(f"cannot rewrite exponent {self.exponent} as {exponent}")
        k = int(round(k))
        if k == 0:
            return self
        return WeightedMatrixFunction(exponent, one_minus_x2(self.poly.dim, k) * self.poly)

    def __sub__(self, other: "WeightedMatrixFunction") -> "WeightedMatrixFunction":
        s = min(self.exponent, other.exponent)
        a, b = self.lowered(s), other.lowered(s)
        return WeightedMatrixFunction(s, a.poly - b.poly)

    def __add__(self, other: "WeightedMatrixFunction") -> "WeightedMatrixFunction":
        return self - other.scale(-1.0)

    def T(self) -> "WeightedMatrixFunction":
        return WeightedMatrixFunction(self.exponent, self.poly.T())


def wmf_diff(f: WeightedMatrixFunction) -> WeightedMatrixFunction:
    """d/dx[(1-x^2)^s Q] = (1-x^2)^(s-1) ((1-x^2) Q' - 2 s x Q)."""
    s, q = f.exponent, f.poly
    body = one_minus_x2(q.dim) * mp_diff(q) - mp_scale(x_times(q), 2.0 * s)
    return WeightedMatrixFunction(s - 1.0, body)


def residual_max(f) -> float:
    """Max-abs coefficient of a polynomial or of the polynomial part of a weighted function."""
    poly = f.poly if isinstance(f, WeightedMatrixFunction) else f
    return poly.max_abs()


# -- JSON with fixed 17 significant digits ------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)) or v is None:
        return json.dumps(None if v is None else bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not np.isfinite(v):
            raise ValueError("non-finite value in JSON output")
        text = f"{v:.17g}"
        if "e" not in text and "." not in text:
            text += ".0"
        return text
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps(obj, indent: int | None = None, _level: int = 0) -> str:
    """JSON text with every float written using 17 significant digits."""
    nl = "" if indent is None else "\n"
    pad = "" if indent is None else " " * (indent * (_level + 1))
    end = "" if indent is None else " " * (indent * _level)
    sep = ", " if indent is None else ","
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{" + nl + (sep + nl).join(items) + nl + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # keep numeric leaves on one line so matrices stay readable
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj):
            return "[" + ", ".join(_fmt(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[" + nl + (sep + nl).join(items) + nl + end + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    return _fmt(obj)


def stack_entries(polys: Iterable[MatrixPolynomial]) -> np.ndarray:
    """Pad a sequence of polynomials to a common length: shape (count, n, d, d)."""
    polys = list(polys)
    n = max(p.coeffs.shape[0] for p in polys)
    return np.stack([p.padded(n) for p in polys])
