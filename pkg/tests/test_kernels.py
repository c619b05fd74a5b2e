import os
import subprocess
import sys

import numpy as np
import pytest

from nonlocal_optics import _accel, kernels


def cplx(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_band_gram_parity(rng):
    paths = cplx(rng, 4, 32, 32)
    mask = rng.uniform(size=32) > 0.3
    for hw, off in [(0, 0), (3, 0), (2, 5), (5, -7)]:
        a = kernels.band_gram_nb(paths, hw, off, mask)
        b = kernels.band_gram_np(paths, hw, off, mask)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(a, a.conj().T, atol=1e-12)


def test_band_gram_brute_force(rng):
    paths = cplx(rng, 3, 16, 16)
    mask = np.ones(16, bool)
    mask[[2, 9]] = False
    hw, off = 2, 1
    expected = np.zeros((3, 3), complex)
    for i in range(16):
        if not mask[i]:
            continue
        for k in range(-hw, hw + 1):
            j = (i - k + off) % 16
            v = paths[:, i, j]
            expected += np.outer(v.conj(), v)
    np.testing.assert_allclose(kernels.band_gram(paths, hw, off, mask), expected, atol=1e-12)


@pytest.mark.parametrize("shape", [(16, 16), (8, 24), (32, 16)])
def test_diagonal_sums(rng, shape):
    w = rng.uniform(size=shape)
    n1, n2 = shape
    expected = np.zeros(n1 + n2 - 1)
    anti = np.zeros(n1 + n2 - 1)
    for i in range(n1):
        for j in range(n2):
            expected[i - j + n2 - 1] += w[i, j]
            anti[i + j] += w[i, j]
    for fn in kernels.KERNELS["diagonal_sums"]:
        np.testing.assert_allclose(fn(w), expected, rtol=1e-13)
    for fn in kernels.KERNELS["antidiagonal_sums"]:
        np.testing.assert_allclose(fn(w), anti, rtol=1e-13)


def test_exchange_overlap(rng):
    f = cplx(rng, 16, 16)
    n = 16
    expected = np.zeros(2 * n - 1, complex)
    for i in range(n):
        for j in range(n):
            expected[i - j + n - 1] += f[i, j] * np.conj(f[j, i])
    for fn in kernels.KERNELS["exchange_overlap"]:
        np.testing.assert_allclose(fn(f), expected, atol=1e-12)


def test_triangle_quad_parity():
    nodes, weights = np.polynomial.legendre.leggauss(8)
    for args in [(1e4, 1.0, 1e-6, 3.0, 4), (2.5e5, 7.0, 1e-5, 5.0, 16)]:
        a = kernels.triangle_quad_nb(*args, nodes, weights)
        b = kernels.triangle_quad_np(*args, nodes, weights)
        assert a == pytest.approx(b, rel=1e-12)


def test_triangle_quad_against_closed_integral():
    # with r^2 huge the kernel is 1/r^2 and the integral is (i w T + 1 - e^{i w T}) / (w^2 r^2)
    nodes, weights = np.polynomial.legendre.leggauss(8)
    r2, w, T = 1e12, 2.0, 3.0
    got = kernels.triangle_quad(r2, w, 1e-6, T, 8, nodes, weights)
    expected = (1j * w * T + 1 - np.exp(1j * w * T)) / (w**2 * r2)
    assert got == pytest.approx(expected, rel=1e-9)


def test_kernel_table_complete():
    assert set(kernels.KERNELS) == {"band_gram", "diagonal_sums", "antidiagonal_sums",
                                    "exchange_overlap", "triangle_quad"}
    for name, (nb, npy) in kernels.KERNELS.items():
        assert getattr(kernels, name) is (nb if kernels.USE_NUMBA else npy)


def backend_in_subprocess(flag):
    env = dict(os.environ)
    env.pop(_accel.DISABLE_ENV, None)
    if flag is not None:
        env[_accel.DISABLE_ENV] = flag
    code = "import nonlocal_optics as n; print(n.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_disable_flag_selects_numpy():
    assert backend_in_subprocess("1") == "numpy"
    assert backend_in_subprocess("true") == "numpy"


@pytest.mark.skipif(not _accel.NUMBA_AVAILABLE, reason="numba not installed")
def test_numba_is_default_when_available():
    assert backend_in_subprocess(None) == "numba"
    assert backend_in_subprocess("0") == "numba"
