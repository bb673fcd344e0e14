# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the hot inner loops.

Mirrors treecast._reference draw for draw: every random quantity is the
same pure function of (key, counter), so the fused loops here produce the
same populations as the vectorized reference.  Table-backed distributions
are bit-identical across the two backends; the power-law samplers may
differ in the last ulp of a pow/exp call.
"""
from libc.math cimport floor, log, pow

import numpy as np

from libc.stdint cimport int64_t, uint64_t

KIND_CONSTANT = 0
KIND_TABLE = 1
KIND_PARETO = 2
KIND_ZETA = 3
CHAIN_RANGE = 0
CHAIN_RELAY = 1

cdef uint64_t GOLDEN = <uint64_t> 0x9E3779B97F4A7C15
cdef uint64_t SUB = <uint64_t> 0xC2B2AE3D27D4EB4F
cdef uint64_t M1 = <uint64_t> 0xBF58476D1CE4E5B9
cdef uint64_t M2 = <uint64_t> 0x94D049BB133111EB
cdef double TWO_NEG53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    return z ^ (z >> 31)


cdef inline uint64_t _raw(uint64_t key, uint64_t ctr) noexcept nogil:
    return _mix64(key + ctr * GOLDEN)


cdef inline double _unif(uint64_t word) noexcept nogil:
    return (<double> (word >> 11) + 0.5) * TWO_NEG53


cdef inline double _sample_one(int kind, double a, double b,
                               double[::1] values, double[::1] cdf,
                               uint64_t key, uint64_t ctr) noexcept nogil:
    cdef double u, v, x, t
    cdef Py_ssize_t lo, hi, mid
    cdef int attempt
    if kind == 0:
        return a
    if kind == 1:
        u = _unif(_raw(key, ctr))
        lo = 0
        hi = cdf.shape[0]
        while lo < hi:  # first index with cdf[index] > u
            mid = (lo + hi) >> 1
            if u < cdf[mid]:
                hi = mid
            else:
                lo = mid + 1
        return values[lo]
    if kind == 2:
        u = _unif(_raw(key, ctr))
        return a * pow(1.0 - u, -1.0 / b)
    # zeta: inversion-rejection on the private per-counter subsequence
    x = 1.0
    for attempt in range(1024):
        u = _unif(_mix64(_raw(key, ctr) + (<uint64_t> (2 * attempt) + 1) * SUB))
        v = _unif(_mix64(_raw(key, ctr) + (<uint64_t> (2 * attempt) + 2) * SUB))
        x = floor(pow(u, -1.0 / (a - 1.0)))
        t = pow(1.0 + 1.0 / x, a - 1.0)
        if v * x * (t - 1.0) / (b - 1.0) <= t / b:
            return x
    return x


def raw64(key, ctrs):
    ctrs = np.ascontiguousarray(ctrs, dtype=np.uint64)
    cdef uint64_t[::1] cv = ctrs
    out = np.empty(cv.shape[0], dtype=np.uint64)
    cdef uint64_t[::1] ov = out
    cdef uint64_t k = <uint64_t> key
    cdef Py_ssize_t i
    for i in range(cv.shape[0]):
        ov[i] = _raw(k, cv[i])
    return out


def uniforms(key, ctrs):
    ctrs = np.ascontiguousarray(ctrs, dtype=np.uint64)
    cdef uint64_t[::1] cv = ctrs
    out = np.empty(cv.shape[0])
    cdef double[::1] ov = out
    cdef uint64_t k = <uint64_t> key
    cdef Py_ssize_t i
    for i in range(cv.shape[0]):
        ov[i] = _unif(_raw(k, cv[i]))
    return out


def sample(kind, a, b, values, cdf, key, ctrs):
    ctrs = np.ascontiguousarray(ctrs, dtype=np.uint64)
    cdef uint64_t[::1] cv = ctrs
    cdef double[::1] vals = np.ascontiguousarray(values, dtype=np.float64)
    cdef double[::1] cdfv = np.ascontiguousarray(cdf, dtype=np.float64)
    out = np.empty(cv.shape[0])
    cdef double[::1] ov = out
    cdef int kk = kind
    cdef double aa = a, bb = b
    cdef uint64_t k = <uint64_t> key
    cdef Py_ssize_t i
    for i in range(cv.shape[0]):
        ov[i] = _sample_one(kk, aa, bb, vals, cdfv, k, cv[i])
    return out


def splitting_rep(plan_r, plan_c, chain, n, num, key_r, key_c, key_res):
    """Fused splitting repetition; see the reference implementation for the
    counter layout contract."""
    kind_r, a_r, b_r, values_r, cdf_r = plan_r
    kind_c, a_c, b_c, values_c, cdf_c = plan_c
    cdef int kr = kind_r, kc = kind_c, relay = chain
    cdef double ar = a_r, br = b_r, ac = a_c, bc = b_c
    cdef double[::1] vr = np.ascontiguousarray(values_r, dtype=np.float64)
    cdef double[::1] cr = np.ascontiguousarray(cdf_r, dtype=np.float64)
    cdef double[::1] vc = np.ascontiguousarray(values_c, dtype=np.float64)
    cdef double[::1] cc = np.ascontiguousarray(cdf_c, dtype=np.float64)
    cdef uint64_t kkr = <uint64_t> key_r, kkc = <uint64_t> key_c
    cdef uint64_t kres = <uint64_t> key_res
    cdef int nn = n, nump = num

    logf = np.empty(nn)
    cdef double[::1] logfv = logf
    pop_arr = np.zeros(nump)
    new_arr = np.empty(nump)
    surv_arr = np.empty(nump)
    cdef double[::1] pop = pop_arr
    cdef double[::1] new = new_arr
    cdef double[::1] surv = surv_arr
    cdef double[::1] tmp
    cdef Py_ssize_t i, k
    cdef int step
    cdef int64_t pick
    cdef uint64_t base, ctr
    cdef double r, c, val, kept

    for step in range(1, nn + 1):
        base = <uint64_t> ((step - 1) * nump)
        k = 0
        for i in range(nump):
            ctr = base + <uint64_t> i
            r = _sample_one(kr, ar, br, vr, cr, kkr, ctr)
            c = _sample_one(kc, ac, bc, vc, cc, kkc, ctr)
            if relay == CHAIN_RELAY:
                kept = pop[i] - c
                val = kept if kept >= 0.0 else r - c
            else:
                val = (pop[i] if pop[i] > r else r) - c
            if val >= 0.0:
                surv[k] = val
                k += 1
        if k == 0:
            return logf[: step - 1].copy(), step
        logfv[step - 1] = log(<double> k / nump)
        for i in range(nump):
            pick = <int64_t> (_unif(_raw(kres, base + <uint64_t> i)) * k)
            if pick >= k:
                pick = k - 1
            new[i] = surv[pick]
        tmp = pop
        pop = new
        new = tmp
    return logf, -1


def tree_level(plan_r, plan_c, m, key_r, key_c, ids, v, va, w, wa, u, ua):
    kind_r, a_r, b_r, values_r, cdf_r = plan_r
    kind_c, a_c, b_c, values_c, cdf_c = plan_c
    cdef int kr = kind_r, kc = kind_c, mm = m
    cdef double ar = a_r, br = b_r, ac = a_c, bc = b_c
    cdef double[::1] vr = np.ascontiguousarray(values_r, dtype=np.float64)
    cdef double[::1] cr = np.ascontiguousarray(cdf_r, dtype=np.float64)
    cdef double[::1] vc = np.ascontiguousarray(values_c, dtype=np.float64)
    cdef double[::1] cc = np.ascontiguousarray(cdf_c, dtype=np.float64)
    cdef uint64_t kkr = <uint64_t> key_r, kkc = <uint64_t> key_c

    ids = np.ascontiguousarray(ids, dtype=np.uint64)
    cdef uint64_t[::1] pid = ids
    cdef double[::1] pv = np.ascontiguousarray(v, dtype=np.float64)
    cdef double[::1] pw = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] pu = np.ascontiguousarray(u, dtype=np.float64)
    cdef unsigned char[::1] pva = np.ascontiguousarray(va, dtype=np.uint8)
    cdef unsigned char[::1] pwa = np.ascontiguousarray(wa, dtype=np.uint8)
    cdef unsigned char[::1] pua = np.ascontiguousarray(ua, dtype=np.uint8)

    cdef Py_ssize_t parents = pid.shape[0]
    cdef Py_ssize_t count = parents * mm
    cids_arr = np.empty(count, dtype=np.uint64)
    cv_arr = np.empty(count)
    cw_arr = np.empty(count)
    cu_arr = np.empty(count)
    cva_arr = np.zeros(count, dtype=np.uint8)
    cwa_arr = np.zeros(count, dtype=np.uint8)
    cua_arr = np.zeros(count, dtype=np.uint8)
    cdef uint64_t[::1] cid = cids_arr
    cdef double[::1] cv = cv_arr
    cdef double[::1] cw = cw_arr
    cdef double[::1] cu = cu_arr
    cdef unsigned char[::1] cva = cva_arr
    cdef unsigned char[::1] cwa = cwa_arr
    cdef unsigned char[::1] cua = cua_arr

    cdef Py_ssize_t p, idx
    cdef int j
    cdef uint64_t child
    cdef double rp, c, nv, nw, nu, kept

    for p in range(parents):
        rp = _sample_one(kr, ar, br, vr, cr, kkr, pid[p])
        for j in range(mm):
            child = pid[p] * <uint64_t> mm + 1 + <uint64_t> j
            idx = p * mm + j
            cid[idx] = child
            c = _sample_one(kc, ac, bc, vc, cc, kkc, child)

            nv = pv[p] + rp - c
            if pva[p] and nv >= 0.0:
                cv[idx] = nv
                cva[idx] = 1
            else:
                cv[idx] = -1.0

            nw = (pw[p] if pw[p] > rp else rp) - c
            if pwa[p] and nw >= 0.0:
                cw[idx] = nw
                cwa[idx] = 1
            else:
                cw[idx] = -1.0

            kept = pu[p] - c
            nu = kept if kept >= 0.0 else rp - c
            if pua[p] and nu >= 0.0:
                cu[idx] = nu
                cua[idx] = 1
            else:
                cu[idx] = -1.0

    return (cids_arr, cv_arr, cva_arr.view(np.bool_), cw_arr,
            cwa_arr.view(np.bool_), cu_arr, cua_arr.view(np.bool_))


def brw_level(plan_r, plan_c, m, key_r, key_c, ids, v):
    kind_r, a_r, b_r, values_r, cdf_r = plan_r
    kind_c, a_c, b_c, values_c, cdf_c = plan_c
    cdef int kr = kind_r, kc = kind_c, mm = m
    cdef double ar = a_r, br = b_r, ac = a_c, bc = b_c
    cdef double[::1] vr = np.ascontiguousarray(values_r, dtype=np.float64)
    cdef double[::1] cr = np.ascontiguousarray(cdf_r, dtype=np.float64)
    cdef double[::1] vc = np.ascontiguousarray(values_c, dtype=np.float64)
    cdef double[::1] cc = np.ascontiguousarray(cdf_c, dtype=np.float64)
    cdef uint64_t kkr = <uint64_t> key_r, kkc = <uint64_t> key_c

    ids = np.ascontiguousarray(ids, dtype=np.uint64)
    cdef uint64_t[::1] pid = ids
    cdef double[::1] pv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t parents = pid.shape[0]
    cids_arr = np.empty(parents * mm, dtype=np.uint64)
    cv_arr = np.empty(parents * mm)
    cdef uint64_t[::1] cid = cids_arr
    cdef double[::1] cv = cv_arr

    cdef Py_ssize_t p, idx
    cdef int j
    cdef uint64_t child
    cdef double rp

    for p in range(parents):
        rp = _sample_one(kr, ar, br, vr, cr, kkr, pid[p])
        for j in range(mm):
            child = pid[p] * <uint64_t> mm + 1 + <uint64_t> j
            idx = p * mm + j
            cid[idx] = child
            cv[idx] = pv[p] + rp - _sample_one(kc, ac, bc, vc, cc, kkc, child)
    return cids_arr, cv_arr
