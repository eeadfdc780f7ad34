"""numba-accelerated hot kernels.

Scalar twins of the vectorized routines in `_kernels_numpy`: same Philox4x64
counter layout, same AS241 quantile, same per-path operation order (running
cumulative sums, left-point Kahan-compensated Riemann sums), so the two
backends agree to within libm rounding (and each is bit-reproducible).

All jitted functions release the GIL: Monte Carlo drivers may fan chunks out
over a thread pool.
"""

from __future__ import annotations

import numpy as np
from numba import njit

PHILOX_M0 = np.uint64(0xD2E7470EE14C6C93)
PHILOX_M1 = np.uint64(0xCA5A826395121157)
WEYL_0 = np.uint64(0x9E3779B97F4A7C15)
WEYL_1 = np.uint64(0xBB67AE8584CAA73B)
MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_U1 = np.uint64(1)
_U2 = np.uint64(2)
_U3 = np.uint64(3)
_Z = np.uint64(0)
_TWO53_INV = 2.0**-53
_TWO54_INV = 2.0**-54


@njit(cache=True, nogil=True)
def _philox_block(block, stream, seed):
    x0 = block
    x1 = _Z
    x2 = stream
    x3 = _Z
    k0 = seed
    k1 = _Z
    for _ in range(10):
        # mulhi via 32-bit limbs, wraparound arithmetic
        bhi = x0 >> _S32
        blo = x0 & MASK32
        ahi = PHILOX_M0 >> _S32
        alo = PHILOX_M0 & MASK32
        m1 = ahi * blo
        m2 = alo * bhi
        carry = ((alo * blo) >> _S32) + (m1 & MASK32) + (m2 & MASK32)
        hi0 = ahi * bhi + (m1 >> _S32) + (m2 >> _S32) + (carry >> _S32)
        lo0 = PHILOX_M0 * x0
        bhi = x2 >> _S32
        blo = x2 & MASK32
        ahi = PHILOX_M1 >> _S32
        alo = PHILOX_M1 & MASK32
        m1 = ahi * blo
        m2 = alo * bhi
        carry = ((alo * blo) >> _S32) + (m1 & MASK32) + (m2 & MASK32)
        hi1 = ahi * bhi + (m1 >> _S32) + (m2 >> _S32) + (carry >> _S32)
        lo1 = PHILOX_M1 * x2
        x0 = hi1 ^ x1 ^ k0
        x1 = lo1
        x2 = hi0 ^ x3 ^ k1
        x3 = lo0
        k0 = k0 + WEYL_0
        k1 = k1 + WEYL_1
    return x0, x1, x2, x3


@njit(cache=True, nogil=True)
def _uniforms_into(seed, stream, start, out):
    n = out.shape[0]
    d = np.uint64(start)
    i = 0
    while i < n:
        b = d >> _U2
        w = np.int64(d & _U3)
        o0, o1, o2, o3 = _philox_block(b, stream, seed)
        if w <= 0 and i < n:
            out[i] = np.float64(o0 >> _S11) * _TWO53_INV + _TWO54_INV
            i += 1
            d += _U1
        if w <= 1 and i < n:
            out[i] = np.float64(o1 >> _S11) * _TWO53_INV + _TWO54_INV
            i += 1
            d += _U1
        if w <= 2 and i < n:
            out[i] = np.float64(o2 >> _S11) * _TWO53_INV + _TWO54_INV
            i += 1
            d += _U1
        if w <= 3 and i < n:
            out[i] = np.float64(o3 >> _S11) * _TWO53_INV + _TWO54_INV
            i += 1
            d += _U1
    return out


@njit(cache=True, nogil=True)
def _norm_ppf_scalar(p):
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r
                    + 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r
                  + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r
                + 1.3314166789178437745e+2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r
                    + 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r
                  + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r
                + 4.2313330701600911252e+1) * r + 1.0)
        return q * num / den
    if q < 0.0:
        r = p
    else:
        r = 1.0 - p
    r = np.sqrt(-np.log(r))
    if r <= 5.0:
        r = r - 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r = r - 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    val = num / den
    if q < 0.0:
        return -val
    return val


@njit(cache=True, nogil=True)
def _norm_ppf_array(p):
    out = np.empty(p.shape[0])
    for i in range(p.shape[0]):
        out[i] = _norm_ppf_scalar(p[i])
    return out


@njit(cache=True, nogil=True)
def _normals_into(seed, stream, start, out):
    _uniforms_into(seed, stream, start, out)
    for i in range(out.shape[0]):
        out[i] = _norm_ppf_scalar(out[i])
    return out


def uniforms(seed, stream, start, count):
    """Draws [start, start+count) of one stream as doubles in (0, 1)."""
    return _uniforms_into(np.uint64(seed), np.uint64(stream), np.uint64(start),
                          np.empty(int(count)))


def norm_ppf(p):
    """Standard normal quantile (AS241); |err| < 1e-13 on (0,1)."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    if p.ndim == 0:
        return float(_norm_ppf_scalar(float(p)))
    return _norm_ppf_array(p)


def normals(seed, stream, start, count):
    """Standard normal draws [start, start+count) of one stream."""
    return _normals_into(np.uint64(seed), np.uint64(stream), np.uint64(start),
                         np.empty(int(count)))


@njit(cache=True, nogil=True)
def _path_stats_jit(seed, stream0, npaths, nsteps, stride, k, dt, phi, horizon,
                    hon, fwd, quad, bt, bT):
    sqdt = np.sqrt(dt)
    csteps = nsteps // stride
    cdt = stride * dt
    z = np.empty(nsteps)
    wc = np.empty(csteps + 1)
    for p in range(npaths):
        _normals_into(seed, stream0 + np.uint64(p), _Z, z)
        # fine running sum; record path values at coarse nodes
        w = 0.0
        wc[0] = 0.0
        for j in range(csteps):
            for m in range(stride):
                w = w + z[j * stride + m] * sqdt
            wc[j + 1] = w
        b_T = wc[csteps]
        s_h = 0.0
        c_h = 0.0
        s_f = 0.0
        c_f = 0.0
        s_q = 0.0
        c_q = 0.0
        for j in range(k):
            dwc = wc[j + 1] - wc[j]
            u = (b_T - wc[j]) / (horizon - j * cdt)
            y = phi[j] * dwc - c_h
            t = s_h + y
            c_h = (t - s_h) - y
            s_h = t
            y = u * dwc - c_f
            t = s_f + y
            c_f = (t - s_f) - y
            s_f = t
            y = u * u * cdt - c_q
            t = s_q + y
            c_q = (t - s_q) - y
            s_q = t
        hon[p] = s_h
        fwd[p] = s_f
        quad[p] = s_q
        bt[p] = wc[k]
        bT[p] = b_T
    return hon


def path_stats(seed, stream0, npaths, nsteps, stride, k, dt, phi, horizon):
    """Per-path Brownian functionals; see the numpy twin for the contract."""
    npaths = int(npaths)
    hon = np.empty(npaths)
    fwd = np.empty(npaths)
    quad = np.empty(npaths)
    bt = np.empty(npaths)
    bT = np.empty(npaths)
    _path_stats_jit(np.uint64(seed), np.uint64(stream0), npaths, int(nsteps),
                    int(stride), int(k), float(dt),
                    np.ascontiguousarray(phi, dtype=np.float64), float(horizon),
                    hon, fwd, quad, bt, bT)
    return hon, fwd, quad, bt, bT


@njit(cache=True, nogil=True)
def _gap_samples_jit(seed, stream0, n, t, horizon, out):
    tau = horizon - t
    sq_t = np.sqrt(t)
    sq_tau = np.sqrt(tau)
    logratio = np.log(horizon) - np.log(tau)
    z = np.empty(2)
    for j in range(n):
        _normals_into(seed, stream0 + np.uint64(j), _Z, z)
        b_t = sq_t * z[0]
        d = sq_tau * z[1]
        b_T = b_t + d
        out[j] = 0.5 * (b_T * b_T / horizon + logratio - d * d / tau)
    return out


def gap_samples(seed, stream0, n, t, horizon):
    """Utility-gap draws; see the numpy twin for the contract."""
    out = np.empty(int(n))
    _gap_samples_jit(np.uint64(seed), np.uint64(stream0), int(n), float(t),
                     float(horizon), out)
    return out
