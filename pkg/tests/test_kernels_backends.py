"""The numba fast path and the pure-numpy fallback must agree exactly."""
import numpy as np
import pytest

from magpsido import _kernels
from magpsido.gauge import constant_field_2d, transversal_gauge, zero_field
from magpsido.quantize import Grid, op_amplitude, op_weyl
from magpsido.symbols import symbol_from_id

HAVE_NUMBA = _kernels._HAVE_NUMBA


@pytest.fixture
def both_backends():
    if not HAVE_NUMBA:
        pytest.skip("numba unavailable")
    prev = _kernels.backend()
    yield
    _kernels.set_backend(prev)


def test_backend_flag_roundtrip(both_backends):
    prev = _kernels.set_backend("numpy")
    assert _kernels.backend() == "numpy"
    _kernels.set_backend("numba")
    assert _kernels.backend() == "numba"
    _kernels.set_backend(prev)


def test_weyl_gather_1d_agrees(both_backends):
    rng = np.random.default_rng(0)
    n = 24
    T = rng.standard_normal((2 * n - 1, n)) + 1j * rng.standard_normal((2 * n - 1, n))
    omega = np.exp(1j * rng.standard_normal((n, n)))
    _kernels.set_backend("numpy")
    A = _kernels.weyl_gather(T, omega, n, 1)
    _kernels.set_backend("numba")
    B = _kernels.weyl_gather(T, omega, n, 1)
    # complex multiplies round differently across backends; agreement is
    # at the ulp level, not bitwise
    assert np.abs(A - B).max() < 1e-14


def test_weyl_gather_2d_agrees(both_backends):
    rng = np.random.default_rng(1)
    n = 6
    T = (rng.standard_normal((2 * n - 1, 2 * n - 1, n, n))
         + 1j * rng.standard_normal((2 * n - 1, 2 * n - 1, n, n)))
    omega = np.exp(1j * rng.standard_normal((n * n, n * n)))
    _kernels.set_backend("numpy")
    A = _kernels.weyl_gather(T, omega, n, 2)
    _kernels.set_backend("numba")
    B = _kernels.weyl_gather(T, omega, n, 2)
    assert np.abs(A - B).max() < 1e-14


def test_amplitude_row_agrees(both_backends):
    rng = np.random.default_rng(2)
    n = 16
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    _kernels.set_backend("numpy")
    A = _kernels.amplitude_row(M, (5,), n, 1)
    _kernels.set_backend("numba")
    B = _kernels.amplitude_row(M, (5,), n, 1)
    assert np.abs(A - B).max() < 1e-13

    M2 = rng.standard_normal((n * n, n * n)) + 1j * rng.standard_normal((n * n, n * n))
    _kernels.set_backend("numpy")
    A2 = _kernels.amplitude_row(M2, (3, 7), n, 2)
    _kernels.set_backend("numba")
    B2 = _kernels.amplitude_row(M2, (3, 7), n, 2)
    assert np.abs(A2 - B2).max() < 1e-12


def test_linear_pair_exponent_agrees(both_backends):
    rng = np.random.default_rng(3)
    nodes = rng.uniform(-3, 3, size=(40, 2))
    W = rng.standard_normal((2, 2))
    c = rng.standard_normal(2)
    _kernels.set_backend("numpy")
    A = _kernels.linear_pair_exponent(nodes, W, c)
    _kernels.set_backend("numba")
    B = _kernels.linear_pair_exponent(nodes, W, c)
    assert np.abs(A - B).max() < 1e-12


def test_assembled_operators_agree_across_backends(both_backends):
    grid = Grid(2, 4.0, 8)
    g = transversal_gauge(constant_field_2d(0.5))
    sym = symbol_from_id("relativistic", 2)
    _kernels.set_backend("numpy")
    H_np = op_weyl(sym, g, grid).entries
    _kernels.set_backend("numba")
    H_nb = op_weyl(sym, g, grid).entries
    assert np.abs(H_np - H_nb).max() < 1e-13

    g1 = transversal_gauge(zero_field(1))
    grid1 = Grid(1, 6.0, 24)
    amp = lambda x, y, e: np.exp(
        -(np.asarray(x)[..., 0] ** 2 + np.asarray(y)[..., 0] ** 2) / 4
        - np.asarray(e)[..., 0] ** 2 / 4)
    _kernels.set_backend("numpy")
    A_np = op_amplitude(amp, g1, grid1).entries
    _kernels.set_backend("numba")
    A_nb = op_amplitude(amp, g1, grid1).entries
    assert np.abs(A_np - A_nb).max() < 1e-12


def test_env_flag_selects_numpy(monkeypatch):
    # fresh import under MAGPSIDO_NUMBA=0 must pick the numpy path
    import importlib
    import subprocess
    import sys

    code = ("import os; os.environ['MAGPSIDO_NUMBA']='0'; "
            "import magpsido; print(magpsido.backend())")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, check=True)
    assert out.stdout.strip() == "numpy"
