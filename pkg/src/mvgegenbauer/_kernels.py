"""Hot inner loops on stacks of coefficient matrices.

Each kernel has a loop version (compiled with numba when enabled) and a
vectorised numpy version. ``backend()`` reports which one the public names
are bound to; both are importable for the benchmark.
"""
import numpy as np

from ._accel import USE_NUMBA, jit


# -- loop kernels (numba targets) -------------------------------------------

def _cauchy_matmul_loops(a, b):
    na, d, _ = a.shape
    nb = b.shape[0]
    out = np.zeros((na + nb - 1, d, d))
    for i in range(na):
        for j in range(nb):
            k = i + j
            for r in range(d):
                for s in range(d):
                    acc = 0.0
                    for t in range(d):
                        acc += a[i, r, t] * b[j, t, s]
                    out[k, r, s] += acc
    return out


def _horner_batch_loops(coeffs, xs):
    n, d, _ = coeffs.shape
    m = xs.shape[0]
    out = np.zeros((m, d, d))
    for p in range(m):
        x = xs[p]
        for r in range(d):
            for s in range(d):
                acc = 0.0
                for k in range(n - 1, -1, -1):
                    acc = acc * x + coeffs[k, r, s]
                out[p, r, s] = acc
    return out


def _recurrence_step_loops(pn, pm, a, b):
    # x*P_n - A @ P_n - B @ P_{n-1}; pn has n+1 coefficients, pm has n
    n1, d, _ = pn.shape
    out = np.zeros((n1 + 1, d, d))
    for k in range(n1):
        for r in range(d):
            for s in range(d):
                out[k + 1, r, s] += pn[k, r, s]
                acc = 0.0
                for t in range(d):
                    acc += a[r, t] * pn[k, t, s]
                out[k, r, s] -= acc
    for k in range(pm.shape[0]):
        for r in range(d):
            for s in range(d):
                acc = 0.0
                for t in range(d):
                    acc += b[r, t] * pm[k, t, s]
                out[k, r, s] -= acc
    return out


def _gegenbauer_grid_loops(n, nu, xs):
    m = xs.shape[0]
    out = np.zeros((n + 1, m))
    for p in range(m):
        out[0, p] = 1.0
    if n == 0:
        return out
    for p in range(m):
        out[1, p] = 2.0 * nu * xs[p]
    for r in range(1, n):
        for p in range(m):
            out[r + 1, p] = (2.0 * xs[p] * (r + nu) * out[r, p]
                             - (r + 2.0 * nu - 1.0) * out[r - 1, p]) / (r + 1.0)
    return out


# -- numpy kernels ----------------------------------------------------------

def cauchy_matmul_numpy(a, b):
    na, d, _ = a.shape
    nb = b.shape[0]
    out = np.zeros((na + nb - 1, d, d))
    for i in range(na):
        out[i:i + nb] += a[i] @ b
    return out


def horner_batch_numpy(coeffs, xs):
    xs = np.asarray(xs, dtype=float)
    out = np.zeros((xs.shape[0],) + coeffs.shape[1:])
    for c in coeffs[::-1]:
        out = out * xs[:, None, None] + c
    return out


def recurrence_step_numpy(pn, pm, a, b):
    n1, d, _ = pn.shape
    out = np.zeros((n1 + 1, d, d))
    out[1:] += pn
    out[:n1] -= a @ pn
    out[:pm.shape[0]] -= b @ pm
    return out


def gegenbauer_grid_numpy(n, nu, xs):
    xs = np.asarray(xs, dtype=float)
    out = np.zeros((n + 1, xs.shape[0]))
    out[0] = 1.0
    if n == 0:
        return out
    out[1] = 2.0 * nu * xs
    for r in range(1, n):
        out[r + 1] = (2.0 * xs * (r + nu) * out[r]
                      - (r + 2.0 * nu - 1.0) * out[r - 1]) / (r + 1.0)
    return out


if USE_NUMBA:
    cauchy_matmul_jit = jit(_cauchy_matmul_loops)
    horner_batch_jit = jit(_horner_batch_loops)
    recurrence_step_jit = jit(_recurrence_step_loops)
    gegenbauer_grid_jit = jit(_gegenbauer_grid_loops)

    def cauchy_matmul(a, b):
        return cauchy_matmul_jit(np.ascontiguousarray(a, dtype=np.float64),
                                 np.ascontiguousarray(b, dtype=np.float64))

    def horner_batch(coeffs, xs):
        return horner_batch_jit(np.ascontiguousarray(coeffs, dtype=np.float64),
                                np.ascontiguousarray(xs, dtype=np.float64))

    def recurrence_step(pn, pm, a, b):
        f = np.float64
        return recurrence_step_jit(np.ascontiguousarray(pn, dtype=f), np.ascontiguousarray(pm, dtype=f),
                                   np.ascontiguousarray(a, dtype=f), np.ascontiguousarray(b, dtype=f))

    def gegenbauer_grid(n, nu, xs):
        return gegenbauer_grid_jit(int(n), float(nu), np.ascontiguousarray(xs, dtype=np.float64))
else:
    cauchy_matmul_jit = horner_batch_jit = recurrence_step_jit = gegenbauer_grid_jit = None
    cauchy_matmul = cauchy_matmul_numpy
    horner_batch = horner_batch_numpy
    recurrence_step = recurrence_step_numpy
    gegenbauer_grid = gegenbauer_grid_numpy


def backend():
    return "numba" if USE_NUMBA else "numpy"
