import numpy as np
import pytest
from hypothesis import given, strategies as st

from mvgegenbauer import _kernels as K
from mvgegenbauer._accel import USE_NUMBA

needs_numba = pytest.mark.skipif(not USE_NUMBA, reason="numba disabled via MVGEG_NUMBA")


@needs_numba
@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_cauchy_backends_agree(na, nb, d, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((na, d, d)), rng.standard_normal((nb, d, d))
    np.testing.assert_allclose(K.cauchy_matmul_jit(a, b), K.cauchy_matmul_numpy(a, b), rtol=1e-13, atol=1e-13)


@needs_numba
@given(st.integers(1, 6), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_horner_backends_agree(n, d, seed):
    rng = np.random.default_rng(seed)
    c, xs = rng.standard_normal((n, d, d)), rng.uniform(-1, 1, 9)
    np.testing.assert_allclose(K.horner_batch_jit(c, xs), K.horner_batch_numpy(c, xs), rtol=1e-13, atol=1e-13)


@needs_numba
@given(st.integers(1, 8), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_recurrence_step_backends_agree(n, d, seed):
    rng = np.random.default_rng(seed)
    pn, pm = rng.standard_normal((n, d, d)), rng.standard_normal((max(n - 1, 1), d, d))
    a, b = rng.standard_normal((d, d)), rng.standard_normal((d, d))
    np.testing.assert_allclose(K.recurrence_step_jit(pn, pm, a, b), K.recurrence_step_numpy(pn, pm, a, b),
                               rtol=1e-13, atol=1e-13)


@needs_numba
@given(st.integers(0, 12), st.floats(0.05, 5))
def test_gegenbauer_grid_backends_agree(n, nu):
    xs = np.linspace(-1, 1, 11)
    np.testing.assert_allclose(K.gegenbauer_grid_jit(n, nu, xs), K.gegenbauer_grid_numpy(n, nu, xs),
                               rtol=1e-12, atol=1e-12)


def test_recurrence_step_definition():
    pn = np.array([np.eye(2), 2 * np.eye(2)])
    pm = np.array([np.eye(2)])
    a = np.diag([1.0, 2.0])
    b = np.diag([3.0, 4.0])
    out = K.recurrence_step(pn, pm, a, b)
    # x pn - a pn - b pm
    expect = np.zeros((3, 2, 2))
    expect[1:] += pn
    expect[:2] -= a @ pn
    expect[:1] -= b @ pm
    np.testing.assert_allclose(out, expect)


def test_backend_name():
    assert K.backend() == ("numba" if USE_NUMBA else "numpy")


def test_numpy_fallback_env(tmp_path):
    import subprocess
    import sys

    code = "from mvgegenbauer import _kernels as K; print(K.backend())"
    out = subprocess.run([sys.executable, "-c", code], env={"MVGEG_NUMBA": "0", "PATH": ""},
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
