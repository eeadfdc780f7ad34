"""Pure-numpy implementations of the hot kernels.

This is the fallback backend: everything here is vectorized numpy and
bit-reproducible run to run.  The numba backend (`_kernels_numba`) performs
the same arithmetic in the same per-path order; within one backend results
are identical across worker counts and chunk assignments.

Random numbers come from Philox4x64-10 used as a pure counter-based function:
draw ``d`` of stream ``s`` under master seed ``k`` is word ``d mod 4`` of the
block ``philox(counter=(d//4, 0, s, 0), key=(k, 0))``.  Streams are disjoint
by construction (they live in different counter regions) and any draw can be
produced without generating its predecessors.
"""

from __future__ import annotations

import numpy as np

PHILOX_M0 = np.uint64(0xD2E7470EE14C6C93)
PHILOX_M1 = np.uint64(0xCA5A826395121157)
WEYL_0 = np.uint64(0x9E3779B97F4A7C15)
WEYL_1 = np.uint64(0xBB67AE8584CAA73B)
MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_TWO53_INV = 2.0**-53
_TWO54_INV = 2.0**-54

# round keys are data-independent: (k0 + r*W0, k1 + r*W1) mod 2^64
_ROUND_KEYS_0 = [(int(WEYL_0) * r) & 0xFFFFFFFFFFFFFFFF for r in range(10)]
_ROUND_KEYS_1 = [(int(WEYL_1) * r) & 0xFFFFFFFFFFFFFFFF for r in range(10)]


def _philox_words(blocks, streams, seed):
    """Run Philox4x64-10 on vectors of (block, stream) counters.

    Returns the four output-word arrays; block b of stream s occupies
    counter (b, 0, s, 0) and key (seed, 0).
    """
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    x0 = np.asarray(blocks, dtype=np.uint64)
    x1 = np.zeros_like(x0)
    x2 = np.asarray(streams, dtype=np.uint64)
    if x2.shape != x0.shape:
        x2 = np.broadcast_to(x2, x0.shape).copy()
    x3 = np.zeros_like(x0)
    with np.errstate(over="ignore"):
        for r in range(10):
            k0 = np.uint64((_ROUND_KEYS_0[r] + seed) & 0xFFFFFFFFFFFFFFFF)
            k1 = np.uint64(_ROUND_KEYS_1[r])
            hi0 = _mulhi(PHILOX_M0, x0)
            lo0 = PHILOX_M0 * x0
            hi1 = _mulhi(PHILOX_M1, x2)
            lo1 = PHILOX_M1 * x2
            x0 = hi1 ^ x1 ^ k0
            x1 = lo1
            x2 = hi0 ^ x3 ^ k1
            x3 = lo0
    return x0, x1, x2, x3


def _mulhi(a, b):
    # high 64 bits of a*b via 32-bit limbs (inputs uint64, wraparound ok)
    ahi = a >> _S32
    alo = a & MASK32
    bhi = b >> _S32
    blo = b & MASK32
    m1 = ahi * blo
    m2 = alo * bhi
    carry = ((alo * blo) >> _S32) + (m1 & MASK32) + (m2 & MASK32)
    return ahi * bhi + (m1 >> _S32) + (m2 >> _S32) + (carry >> _S32)


def uniforms(seed, stream, start, count):
    """Draws [start, start+count) of one stream as doubles in (0, 1)."""
    if count == 0:
        return np.empty(0)
    b0 = start >> 2
    b1 = (start + count - 1) >> 2
    x0, x1, x2, x3 = _philox_words(
        np.arange(b0, b1 + 1, dtype=np.uint64), np.uint64(stream), seed
    )
    words = np.empty(4 * (b1 - b0 + 1), dtype=np.uint64)
    words[0::4] = x0
    words[1::4] = x1
    words[2::4] = x2
    words[3::4] = x3
    sel = words[start - 4 * b0 : start - 4 * b0 + count]
    return _to_unit(sel)


def _to_unit(words):
    # 53-bit mantissa, offset keeps draws strictly inside (0, 1)
    return np.float64(words >> _S11) * _TWO53_INV + _TWO54_INV


# AS241 rational approximations for the standard normal quantile
_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3, 2.1213794301586595867e4, 3.9307895800092710610e4,
      2.8729085735721942674e4, 5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15)


def _poly(coeffs, r):
    acc = np.full_like(r, coeffs[7])
    for c in (coeffs[6], coeffs[5], coeffs[4], coeffs[3], coeffs[2], coeffs[1], coeffs[0]):
        acc = acc * r + c
    return acc


def norm_ppf(p):
    """Standard normal quantile (AS241), vectorized; |err| < 1e-13 on (0,1)."""
    p = np.asarray(p, dtype=np.float64)
    q = p - 0.5
    central = np.abs(q) <= 0.425
    rc = 0.180625 - q * q
    z = q * _poly(_A, rc) / _poly(_B, rc)
    if central.all():
        return z
    with np.errstate(divide="ignore", invalid="ignore"):
        rt = np.where(q < 0.0, p, 1.0 - p)
        rt = np.where(central, 0.5, rt)  # placeholder inside central region
        rt = np.sqrt(-np.log(rt))
        near = rt <= 5.0
        r1 = rt - 1.6
        r2 = rt - 5.0
        tail = np.where(near, _poly(_C, r1) / _poly(_D, r1), _poly(_E, r2) / _poly(_F, r2))
        tail = np.where(q < 0.0, -tail, tail)
    return np.where(central, z, tail)


def normals(seed, stream, start, count):
    """Standard normal draws [start, start+count) of one stream."""
    return norm_ppf(uniforms(seed, stream, start, count))


def _normal_matrix(seed, stream0, npaths, nsteps):
    # row p holds draws [0, nsteps) of stream stream0+p
    nblk = (nsteps + 3) >> 2
    blocks = np.tile(np.arange(nblk, dtype=np.uint64), npaths)
    streams = np.repeat(np.arange(stream0, stream0 + npaths, dtype=np.uint64), nblk)
    x0, x1, x2, x3 = _philox_words(blocks, streams, seed)
    words = np.empty(4 * nblk * npaths, dtype=np.uint64)
    words[0::4] = x0
    words[1::4] = x1
    words[2::4] = x2
    words[3::4] = x3
    z = norm_ppf(_to_unit(words)).reshape(npaths, 4 * nblk)
    return z[:, :nsteps]


def path_stats(seed, stream0, npaths, nsteps, stride, k, dt, phi, horizon):
    """Per-path Brownian functionals used by the wealth Monte Carlo.

    Each path p uses stream stream0+p: nsteps N(0,1) draws scaled by sqrt(dt)
    form the fine increments.  Sums run over the coarse grid of step
    stride*dt, left-point rule, compensated (Kahan) summation:

      hon[p]  = sum_{j<k} phi[j] * dWc_j
      fwd[p]  = sum_{j<k} (B_T - W_j) / (horizon - t_j) * dWc_j
      quad[p] = sum_{j<k} ((B_T - W_j) / (horizon - t_j))**2 * (stride*dt)
      bt[p]   = W at coarse node k,   bT[p] = W at the fine terminal node

    with W_j the path value at coarse node j and t_j = j*stride*dt.
    """
    z = _normal_matrix(seed, stream0, npaths, nsteps)
    dw = z * np.sqrt(dt)
    # running (sequential) cumulative sum keeps parity with the scalar backend
    w = np.empty((npaths, nsteps + 1))
    w[:, 0] = 0.0
    np.cumsum(dw, axis=1, out=w[:, 1:])
    csteps = nsteps // stride
    cdt = stride * dt
    wc = w[:, ::stride]
    bT = w[:, nsteps].copy()
    bt = wc[:, k].copy()

    hon = np.zeros(npaths)
    fwd = np.zeros(npaths)
    quad = np.zeros(npaths)
    c_hon = np.zeros(npaths)
    c_fwd = np.zeros(npaths)
    c_quad = np.zeros(npaths)
    for j in range(k):
        dwc = wc[:, j + 1] - wc[:, j]
        u = (bT - wc[:, j]) / (horizon - j * cdt)
        _kahan_step(hon, c_hon, phi[j] * dwc)
        _kahan_step(fwd, c_fwd, u * dwc)
        _kahan_step(quad, c_quad, u * u * cdt)
    return hon, fwd, quad, bt, bT


def _kahan_step(s, c, term):
    y = term - c
    t = s + y
    c[:] = (t - s) - y
    s[:] = t


def gap_samples(seed, stream0, n, t, horizon):
    """Utility-gap draws: sample j uses stream stream0+j, draws 0 and 1.

    B_t = sqrt(t) z0 and B_T - B_t = sqrt(T-t) z1; returns
    H = (B_T^2/T + log T - log(T-t) - (B_T-B_t)^2/(T-t)) / 2 per sample.
    """
    z = _normal_matrix(seed, stream0, n, 2)
    tau = horizon - t
    b_t = np.sqrt(t) * z[:, 0]
    d = np.sqrt(tau) * z[:, 1]
    b_T = b_t + d
    logratio = np.log(horizon) - np.log(tau)
    return 0.5 * (b_T * b_T / horizon + logratio - d * d / tau)
