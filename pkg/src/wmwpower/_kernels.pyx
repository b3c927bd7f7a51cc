# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo kernels.

Same interface and random streams as ``_fallback``; the per-replicate loop
(Philox draws, inverse-CDF transform, W statistic, rejection lookup) runs
without the GIL.
"""

import numpy as np

from libc.math cimport log, log1p, pow
from libc.stdint cimport uint32_t, uint64_t, int64_t
from libc.stdlib cimport malloc, free, qsort
from scipy.special.cython_special cimport ndtri, betaincinv

NAME = "compiled"

cdef enum:
    C_NORMAL = 0
    C_EXPONENTIAL = 1
    C_SHIFTED_EXPONENTIAL = 2
    C_DOUBLE_EXPONENTIAL = 3
    C_BETA = 4
    C_WEIBULL = 5
    C_UNIFORM = 6
    C_EMPIRICAL = 7

NORMAL = C_NORMAL
EXPONENTIAL = C_EXPONENTIAL
SHIFTED_EXPONENTIAL = C_SHIFTED_EXPONENTIAL
DOUBLE_EXPONENTIAL = C_DOUBLE_EXPONENTIAL
BETA = C_BETA
WEIBULL = C_WEIBULL
UNIFORM = C_UNIFORM
EMPIRICAL = C_EMPIRICAL

cdef double TWO_M52 = 2.220446049250313e-16


cdef inline void philox(uint32_t* ctr, uint32_t k0, uint32_t k1) noexcept nogil:
    cdef uint64_t p0, p1
    cdef uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3]
    cdef int i
    for i in range(10):
        p0 = <uint64_t>0xD2511F53u * c0
        p1 = <uint64_t>0xCD9E8D57u * c2
        c0 = <uint32_t>(p1 >> 32) ^ c1 ^ k0
        c1 = <uint32_t>p1
        c2 = <uint32_t>(p0 >> 32) ^ c3 ^ k1
        c3 = <uint32_t>p0
        k0 = k0 + <uint32_t>0x9E3779B9u
        k1 = k1 + <uint32_t>0xBB67AE85u
    ctr[0] = c0
    ctr[1] = c1
    ctr[2] = c2
    ctr[3] = c3


cdef inline double to_unit(uint32_t hi, uint32_t lo) noexcept nogil:
    cdef uint64_t bits = ((<uint64_t>(hi >> 6)) << 26) | (lo >> 6)
    return (<double>bits + 0.5) * TWO_M52


cdef void fill_uniforms(uint64_t seed, uint64_t stream, int64_t count,
                        double* out) noexcept nogil:
    cdef uint32_t ctr[4]
    cdef uint32_t k0 = <uint32_t>seed, k1 = <uint32_t>(seed >> 32)
    cdef int64_t b, nblocks = (count + 1) // 2
    for b in range(nblocks):
        ctr[0] = <uint32_t>b
        ctr[1] = 0
        ctr[2] = <uint32_t>stream
        ctr[3] = <uint32_t>(stream >> 32)
        philox(ctr, k0, k1)
        out[2 * b] = to_unit(ctr[0], ctr[1])
        if 2 * b + 1 < count:
            out[2 * b + 1] = to_unit(ctr[2], ctr[3])


cdef inline double quantile(int code, const double* prm, const double* data,
                            int64_t size, double u) noexcept nogil:
    cdef int64_t idx
    if code == C_NORMAL:
        return prm[0] + prm[1] * ndtri(u)
    elif code == C_EXPONENTIAL:
        return -log1p(-u) / prm[0]
    elif code == C_SHIFTED_EXPONENTIAL:
        return prm[1] - log1p(-u) / prm[0]
    elif code == C_DOUBLE_EXPONENTIAL:
        if u < 0.5:
            return prm[0] + prm[1] * log(2.0 * u)
        return prm[0] + prm[1] * (-log(2.0 - 2.0 * u))
    elif code == C_BETA:
        return betaincinv(prm[0], prm[1], u)
    elif code == C_WEIBULL:
        return prm[1] * pow(-log1p(-u), 1.0 / prm[0])
    elif code == C_UNIFORM:
        return prm[0] + (prm[1] - prm[0]) * u
    else:
        idx = <int64_t>(u * size)
        if idx >= size:
            idx = size - 1
        return data[idx]


cdef int cmp_double(const void* a, const void* b) noexcept nogil:
    cdef double da = (<const double*>a)[0]
    cdef double db = (<const double*>b)[0]
    return (da > db) - (da < db)


cdef inline void sort_small(double* v, int64_t k) noexcept nogil:
    cdef int64_t i, j
    cdef double t
    if k > 24:
        qsort(v, k, sizeof(double), cmp_double)
        return
    for i in range(1, k):
        t = v[i]
        j = i - 1
        while j >= 0 and v[j] > t:
            v[j + 1] = v[j]
            j -= 1
        v[j + 1] = t


cdef inline int64_t merge_count(const double* xs, int64_t m, const double* ys,
                                int64_t n, int* tied) noexcept nogil:
    # both sorted ascending; W = sum over y of #{x < y}
    cdef int64_t i = 0, j, w = 0
    for j in range(n):
        while i < m and xs[i] < ys[j]:
            i += 1
        if i < m and xs[i] == ys[j]:
            tied[0] = 1
        w += i
    return w


def uniforms(uint64_t seed, uint64_t stream, int64_t start, int64_t count):
    """Draws ``start .. start+count-1`` of substream ``stream`` under ``seed``."""
    if count <= 0:
        return np.empty(0)
    cdef int64_t total = start + count
    cdef double[::1] buf = np.empty(total + 1)
    with nogil:
        fill_uniforms(seed, stream, total, &buf[0])
    return np.asarray(buf[start:total]).copy()


def transform(int code, params, data, u):
    """Map uniforms in (0, 1) to variates by inverse CDF."""
    cdef double[::1] uu = np.ascontiguousarray(u, dtype=np.float64).ravel()
    cdef double[::1] prm = _params(params)
    cdef double[::1] dat = _data(data)
    cdef double[::1] out = np.empty(uu.shape[0])
    cdef int64_t i, size = dat.shape[0]
    with nogil:
        for i in range(uu.shape[0]):
            out[i] = quantile(code, &prm[0], &dat[0], size, uu[i])
    return np.asarray(out).reshape(np.shape(u))


def w_statistic(x, y):
    """Return (W, tied) for one pair of samples; W = #{(i, j): y_j > x_i}."""
    cdef double[::1] xs = np.sort(np.asarray(x, dtype=np.float64))
    cdef double[::1] ys = np.sort(np.asarray(y, dtype=np.float64))
    cdef int tied = 0
    cdef int64_t w
    with nogil:
        w = merge_count(&xs[0], xs.shape[0], &ys[0], ys.shape[0], &tied)
    return int(w), bool(tied)


cdef double[::1] _params(params):
    cdef double[::1] out = np.zeros(4)
    for i, v in enumerate(params):
        out[i] = float(v)
    return out


cdef double[::1] _data(data):
    if data is None or len(data) == 0:
        return np.zeros(1)
    return np.ascontiguousarray(data, dtype=np.float64)


def count_rejections(uint64_t seed, int64_t r_start, int64_t r_stop,
                     int64_t m, int64_t n,
                     int fx, px, ex, int fy, py, ey, reject):
    """Count rejecting replicates in ``[r_start, r_stop)``.

    Returns ``(q, tie_at)`` where ``tie_at`` is the first replicate index with a
    cross-group tie, or -1.
    """
    cdef double[::1] prx = _params(px)
    cdef double[::1] pry = _params(py)
    cdef double[::1] dx = _data(ex)
    cdef double[::1] dy = _data(ey)
    cdef unsigned char[::1] rej = np.ascontiguousarray(reject, dtype=np.uint8)
    cdef int64_t sx = dx.shape[0], sy = dy.shape[0]
    cdef int64_t q = 0, tie_at = -1, r, i, w
    cdef int tied = 0
    cdef double* buf = <double*>malloc((m + n + 1) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for r in range(r_start, r_stop):
                fill_uniforms(seed, <uint64_t>r, m + n, buf)
                for i in range(m):
                    buf[i] = quantile(fx, &prx[0], &dx[0], sx, buf[i])
                for i in range(m, m + n):
                    buf[i] = quantile(fy, &pry[0], &dy[0], sy, buf[i])
                sort_small(buf, m)
                sort_small(buf + m, n)
                w = merge_count(buf, m, buf + m, n, &tied)
                if tied:
                    tie_at = r
                    break
                q += rej[w]
    finally:
        free(buf)
    return int(q), int(tie_at)
