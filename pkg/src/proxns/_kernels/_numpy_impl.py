"""Pure-numpy reference implementations of the hot numerical kernels.

Semantics match ``proxns._kernels._fastmath`` up to floating-point
reduction order; ``tests/test_kernels.py`` enforces agreement between
the two backends.
"""

import numpy as np

_window_cache = {}


def soft_threshold_real(v, theta):
    mag = np.abs(v) - theta
    np.clip(mag, 0.0, None, out=mag)
    return np.copysign(mag, v)


def soft_threshold_complex(v, theta):
    mag = np.abs(v)
    scale = np.maximum(mag - theta, 0.0)
    safe = np.where(mag > 0.0, mag, 1.0)
    return v * (scale / safe)


def lincomb3(a, x, b, p, c, q):
    return a * x + b * p + c * q


def add_scaled(x, s, w):
    return x + s * w


def ball_project_real(z, center, radius):
    diff = z - center
    nrm = np.sqrt(np.dot(diff, diff))
    if nrm <= radius:
        return z.copy()
    return center + diff * (radius / nrm)


def ball_project_complex(z, center, radius):
    diff = z - center
    nrm = np.sqrt(np.vdot(diff, diff).real)
    if nrm <= radius:
        return z.copy()
    return center + diff * (radius / nrm)


def _window_idx(n, filt_len):
    # windows of the periodised signal: idx[k, i] = (2k + i) mod n
    key = (n, filt_len)
    idx = _window_cache.get(key)
    if idx is None:
        idx = (2 * np.arange(n // 2)[:, None] + np.arange(filt_len)[None, :]) % n
        _window_cache[key] = idx
    return idx


def _dwt_rows(x, h, g):
    # x: (batch, n) -> packed [approx | detail] per row
    idx = _window_idx(x.shape[-1], h.shape[0])
    win = x[..., idx]
    return np.concatenate([win @ h, win @ g], axis=-1)


def _idwt_rows(c, h, g):
    n = c.shape[-1]
    half = n // 2
    a, d = c[..., :half], c[..., half:]
    out = np.zeros_like(c)
    base = 2 * np.arange(half)
    for i in range(h.shape[0]):
        pos = (base + i) % n
        # pos entries are distinct for fixed i, so fancy += is safe
        out[..., pos] += a * h[i] + d * g[i]
    return out


def dwt1_level(x, h, g):
    return _dwt_rows(x[None, :], h, g)[0]


def idwt1_level(c, h, g):
    return _idwt_rows(c[None, :], h, g)[0]


def dwt2_level(a2, h, g):
    rows = _dwt_rows(a2, h, g)
    cols = _dwt_rows(np.ascontiguousarray(rows.T), h, g)
    return np.ascontiguousarray(cols.T)


def idwt2_level(c2, h, g):
    cols = _idwt_rows(np.ascontiguousarray(c2.T), h, g)
    return _idwt_rows(np.ascontiguousarray(cols.T), h, g)
