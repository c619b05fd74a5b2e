"""Hot numerical kernels.

Every kernel exists twice: a numba version (``*_nb``) and a pure-numpy
version (``*_np``).  The public name is bound to one of them at import time
according to :data:`nonlocal_optics._accel.USE_NUMBA`.  Both versions are kept
importable so tests and the benchmark can compare them directly.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Gram matrix of path amplitudes over the coincidence band
# ---------------------------------------------------------------------------

@njit
def band_gram_nb(paths, halfwidth, offset, row_mask):
    n_paths, n1, n2 = paths.shape
    gram = np.zeros((n_paths, n_paths), dtype=np.complex128)
    for i in range(n1):
        if not row_mask[i]:
            continue
        for k in range(-halfwidth, halfwidth + 1):
            j = (i - k + offset) % n2
            for a in range(n_paths):
                pa = paths[a, i, j]
                ca = pa.real - 1j * pa.imag
                for b in range(a, n_paths):
                    gram[a, b] += ca * paths[b, i, j]
    for a in range(n_paths):
        for b in range(a):
            gram[a, b] = np.conj(gram[b, a])
    return gram


def band_gram_np(paths, halfwidth, offset, row_mask):
    n_paths, n1, n2 = paths.shape
    rows = np.flatnonzero(row_mask)
    gram = np.zeros((n_paths, n_paths), dtype=np.complex128)
    for k in range(-halfwidth, halfwidth + 1):
        cols = (rows - k + offset) % n2
        sub = paths[:, rows, cols]
        gram += sub.conj() @ sub.T
    return gram


# ---------------------------------------------------------------------------
# Diagonal sums: distributions of index differences / sums
# ---------------------------------------------------------------------------

@njit
def diagonal_sums_nb(w):
    # out[i - j + n2 - 1] += w[i, j]
    n1, n2 = w.shape
    out = np.zeros(n1 + n2 - 1, dtype=np.float64)
    for i in range(n1):
        for j in range(n2):
            out[i - j + n2 - 1] += w[i, j]
    return out


def diagonal_sums_np(w):
    n1, n2 = w.shape
    i, j = np.indices((n1, n2))
    return np.bincount((i - j + n2 - 1).ravel(), weights=w.ravel(), minlength=n1 + n2 - 1)


@njit
def antidiagonal_sums_nb(w):
    # out[i + j] += w[i, j]
    n1, n2 = w.shape
    out = np.zeros(n1 + n2 - 1, dtype=np.float64)
    for i in range(n1):
        for j in range(n2):
            out[i + j] += w[i, j]
    return out


def antidiagonal_sums_np(w):
    n1, n2 = w.shape
    i, j = np.indices((n1, n2))
    return np.bincount((i + j).ravel(), weights=w.ravel(), minlength=n1 + n2 - 1)


@njit
def exchange_overlap_nb(f):
    # h[m] = sum_{i-j=m} f[i,j] * conj(f[j,i]), m = -(n-1)..(n-1)
    n = f.shape[0]
    out = np.zeros(2 * n - 1, dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            out[i - j + n - 1] += f[i, j] * np.conj(f[j, i])
    return out


def exchange_overlap_np(f):
    n = f.shape[0]
    o = f * f.T.conj()
    i, j = np.indices((n, n))
    idx = (i - j + n - 1).ravel()
    re = np.bincount(idx, weights=o.real.ravel(), minlength=2 * n - 1)
    im = np.bincount(idx, weights=o.imag.ravel(), minlength=2 * n - 1)
    return re + 1j * im


# ---------------------------------------------------------------------------
# Nested Gauss-Legendre quadrature on the triangle 0 <= t'' <= t' <= T
# of exp(i w (t' - t'')) / (r^2 - (t' - t'')^2 - i eps)
# ---------------------------------------------------------------------------

@njit
def triangle_quad_nb(r2, omega, eps, total, n_panels, nodes, weights):
    q = nodes.shape[0]
    h_out = total / n_panels
    acc = 0.0 + 0.0j
    for po in range(n_panels):
        a = po * h_out
        for ko in range(q):
            tp = a + 0.5 * h_out * (nodes[ko] + 1.0)
            wo = 0.5 * h_out * weights[ko]
            h_in = tp / n_panels
            inner = 0.0 + 0.0j
            for pi in range(n_panels):
                b = pi * h_in
                for ki in range(q):
                    tpp = b + 0.5 * h_in * (nodes[ki] + 1.0)
                    s = tp - tpp
                    val = np.exp(1j * omega * s) / (r2 - s * s - 1j * eps)
                    inner += 0.5 * h_in * weights[ki] * val
            acc += wo * inner
    return acc


def triangle_quad_np(r2, omega, eps, total, n_panels, nodes, weights):
    # unit-interval composite rule, reused for outer and inner integrals
    edges = np.arange(n_panels, dtype=np.float64)[:, None]
    x = ((edges + 0.5 * (nodes[None, :] + 1.0)) / n_panels).ravel()
    w = np.broadcast_to(0.5 * weights[None, :] / n_panels, (n_panels, nodes.size)).ravel()
    tp = total * x
    wo = total * w
    tpp = tp[:, None] * x[None, :]
    wi = tp[:, None] * w[None, :]
    s = tp[:, None] - tpp
    vals = np.exp(1j * omega * s) / (r2 - s * s - 1j * eps)
    return complex(np.sum(wo * np.sum(wi * vals, axis=1)))


if USE_NUMBA:
    band_gram = band_gram_nb
    diagonal_sums = diagonal_sums_nb
    antidiagonal_sums = antidiagonal_sums_nb
    exchange_overlap = exchange_overlap_nb
    triangle_quad = triangle_quad_nb
else:
    band_gram = band_gram_np
    diagonal_sums = diagonal_sums_np
    antidiagonal_sums = antidiagonal_sums_np
    exchange_overlap = exchange_overlap_np
    triangle_quad = triangle_quad_np

KERNELS = {
    "band_gram": (band_gram_nb, band_gram_np),
    "diagonal_sums": (diagonal_sums_nb, diagonal_sums_np),
    "antidiagonal_sums": (antidiagonal_sums_nb, antidiagonal_sums_np),
    "exchange_overlap": (exchange_overlap_nb, exchange_overlap_np),
    "triangle_quad": (triangle_quad_nb, triangle_quad_np),
}
