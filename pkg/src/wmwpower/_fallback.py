"""Pure numpy implementation of the Monte Carlo kernels.

Mirrors ``_kernels.pyx`` function for function.  Used automatically when the
compiled extension is unavailable, or when ``WMWPOWER_BACKEND=python``.
"""

import numpy as np
from scipy.special import betaincinv, ndtri

NAME = "python"

NORMAL = 0
EXPONENTIAL = 1
SHIFTED_EXPONENTIAL = 2
DOUBLE_EXPONENTIAL = 3
BETA = 4
WEIBULL = 5
UNIFORM = 6
EMPIRICAL = 7

_MASK = np.uint64(0xFFFFFFFF)
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_S32 = np.uint64(32)
_S26 = np.uint64(26)
_S6 = np.uint64(6)
_TWO_M52 = 2.0**-52

# element budget for one (chunk, m, n) comparison cube
_CUBE_BUDGET = 1 << 22


def philox4x32(c0, c1, c2, c3, k0, k1):
    """Philox4x32-10 block function on uint64 arrays carrying 32-bit words."""
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & _MASK for c in (c0, c1, c2, c3))
    k0 = np.uint64(int(k0) & 0xFFFFFFFF)
    k1 = np.uint64(int(k1) & 0xFFFFFFFF)
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> _S32) ^ c1 ^ k0,
            p1 & _MASK,
            (p0 >> _S32) ^ c3 ^ k1,
            p0 & _MASK,
        )
        k0 = (k0 + _W0) & _MASK
        k1 = (k1 + _W1) & _MASK
    return c0, c1, c2, c3


def _to_unit(hi, lo):
    bits = ((hi >> _S6) << _S26) | (lo >> _S6)
    return (bits.astype(np.float64) + 0.5) * _TWO_M52


def _uniform_matrix(seed, streams, nblocks):
    """Uniforms of shape (len(streams), 2 * nblocks) from block 0 onward."""
    streams = np.asarray(streams, dtype=np.uint64)[:, None]
    blocks = np.arange(nblocks, dtype=np.uint64)[None, :]
    shape = (streams.shape[0], nblocks)
    o0, o1, o2, o3 = philox4x32(
        np.broadcast_to(blocks, shape),
        np.zeros(shape, dtype=np.uint64),
        np.broadcast_to(streams & _MASK, shape),
        np.broadcast_to(streams >> _S32, shape),
        seed & 0xFFFFFFFF,
        (seed >> 32) & 0xFFFFFFFF,
    )
    out = np.empty((shape[0], 2 * nblocks))
    out[:, 0::2] = _to_unit(o0, o1)
    out[:, 1::2] = _to_unit(o2, o3)
    return out


def uniforms(seed, stream, start, count):
    """Draws ``start .. start+count-1`` of substream ``stream`` under ``seed``."""
    if count <= 0:
        return np.empty(0)
    first = start // 2
    last = (start + count - 1) // 2
    blocks = np.arange(first, last + 1, dtype=np.uint64)
    stream = np.uint64(stream)
    zeros = np.zeros(blocks.shape, dtype=np.uint64)
    o0, o1, o2, o3 = philox4x32(
        blocks, zeros, zeros + (stream & _MASK), zeros + (stream >> _S32),
        seed & 0xFFFFFFFF, (seed >> 32) & 0xFFFFFFFF,
    )
    out = np.empty(2 * blocks.size)
    out[0::2] = _to_unit(o0, o1)
    out[1::2] = _to_unit(o2, o3)
    offset = start - 2 * first
    return out[offset:offset + count]


def transform(code, params, data, u):
    """Map uniforms in (0, 1) to variates by inverse CDF."""
    u = np.asarray(u, dtype=np.float64)
    if code == NORMAL:
        return params[0] + params[1] * ndtri(u)
    if code == EXPONENTIAL:
        return -np.log1p(-u) / params[0]
    if code == SHIFTED_EXPONENTIAL:
        return params[1] - np.log1p(-u) / params[0]
    if code == DOUBLE_EXPONENTIAL:
        lower = u < 0.5
        z = np.where(lower, np.log(2.0 * u), -np.log(2.0 - 2.0 * u))
        return params[0] + params[1] * z
    if code == BETA:
        return betaincinv(params[0], params[1], u)
    if code == WEIBULL:
        return params[1] * (-np.log1p(-u)) ** (1.0 / params[0])
    if code == UNIFORM:
        return params[0] + (params[1] - params[0]) * u
    if code == EMPIRICAL:
        size = len(data)
        idx = np.minimum((u * size).astype(np.int64), size - 1)
        return np.asarray(data)[idx]
    raise ValueError(f"unknown family code {code}")


def w_statistic(x, y):
    """Return (W, tied) for one pair of samples; W = #{(i, j): y_j > x_i}."""
    xs = np.sort(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    below = np.searchsorted(xs, y, side="left")
    upto = np.searchsorted(xs, y, side="right")
    return int(below.sum()), bool(np.any(upto != below))


def count_rejections(seed, r_start, r_stop, m, n, fx, px, ex, fy, py, ey, reject):
    """Count rejecting replicates in ``[r_start, r_stop)``.

    Returns ``(q, tie_at)`` where ``tie_at`` is the first replicate index with a
    cross-group tie, or -1.
    """
    reject = np.asarray(reject, dtype=bool)
    nblocks = (m + n + 1) // 2
    chunk = max(1, _CUBE_BUDGET // (m * n))
    q = 0
    for lo in range(r_start, r_stop, chunk):
        hi = min(lo + chunk, r_stop)
        u = _uniform_matrix(seed, np.arange(lo, hi, dtype=np.uint64), nblocks)
        x = transform(fx, px, ex, u[:, :m])
        y = transform(fy, py, ey, u[:, m:m + n])
        diff = y[:, None, :] - x[:, :, None]
        tied = np.any(diff == 0.0, axis=(1, 2))
        if tied.any():
            return q, lo + int(np.argmax(tied))
        w = np.count_nonzero(diff > 0.0, axis=(1, 2))
        q += int(np.count_nonzero(reject[w]))
    return q, -1
