# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# distutils: language = c++
"""Compiled batch kernel for co-moment projection indices.

Same contract as ``ppursuit._pykernels.comoment_batch``.
"""

import numpy as np

from libc.math cimport sqrt, fabs, NAN
from libc.stdlib cimport malloc, free
from libcpp.algorithm cimport nth_element

cdef double DEGENERATE_RTOL = 1e-12
cdef Py_ssize_t SAMPLE = 64


cdef inline double _ipow(double x, long e) noexcept nogil:
    cdef double r = x
    cdef long i
    for i in range(1, e):
        r *= x
    return r


cdef struct Scratch:
    double* lo
    double* hi
    double* sample


cdef double _exact_trimmed_sum(double* buf, Py_ssize_t n, Py_ssize_t k) noexcept nogil:
    # reorders buf
    cdef Py_ssize_t i
    cdef double s = 0.0
    nth_element(buf, buf + k, buf + n)
    nth_element(buf + k, buf + (n - k - 1), buf + n)
    for i in range(k, n - k):
        s += buf[i]
    return s


cdef double _tmean(const double* x, Py_ssize_t n, Py_ssize_t k, Scratch* sc) noexcept nogil:
    """Mean of x without its k smallest and k largest values (x untouched).

    Thresholds estimated from a strided sample split x into a bulk that is
    summed directly and two small tails; exact selection runs on the tails
    only. Falls back to full selection when the estimate misses.
    """
    cdef Py_ssize_t i, ns, r, nl = 0, nh = 0, stride
    cdef double s = 0.0, lo_t, hi_t, v
    if k == 0:
        for i in range(n):
            s += x[i]
        return s / n
    if n < 4 * SAMPLE:
        for i in range(n):
            sc.lo[i] = x[i]
        return _exact_trimmed_sum(sc.lo, n, k) / (n - 2 * k)
    ns = SAMPLE
    stride = n // ns
    for i in range(ns):
        sc.sample[i] = x[i * stride]
    # sample rank comfortably beyond the expected k/n quantile
    r = <Py_ssize_t> (ns * (<double> k / n) + 2.0 * sqrt(ns * (<double> k / n)) + 2.0)
    if r > ns // 2 - 1:
        r = ns // 2 - 1
    nth_element(sc.sample, sc.sample + r, sc.sample + ns)
    lo_t = sc.sample[r]
    nth_element(sc.sample, sc.sample + (ns - 1 - r), sc.sample + ns)
    hi_t = sc.sample[ns - 1 - r]
    if lo_t < hi_t:
        for i in range(n):
            v = x[i]
            if v <= lo_t:
                sc.lo[nl] = v
                nl += 1
            elif v >= hi_t:
                sc.hi[nh] = v
                nh += 1
            else:
                s += v
        if nl >= k and nh >= k:
            nth_element(sc.lo, sc.lo + k, sc.lo + nl)
            for i in range(k, nl):
                s += sc.lo[i]
            nth_element(sc.hi, sc.hi + (nh - k), sc.hi + nh)
            for i in range(nh - k):
                s += sc.hi[i]
            return s / (n - 2 * k)
    for i in range(n):
        sc.lo[i] = x[i]
    return _exact_trimmed_sum(sc.lo, n, k) / (n - 2 * k)


def comoment_batch(const double[:, ::1] S, vc_obj, double sdv,
                   const long[::1] eu, const long[::1] ev, const double[::1] w,
                   bint scaled, Py_ssize_t k):
    cdef Py_ssize_t m = S.shape[0]
    cdef Py_ssize_t n = S.shape[1]
    cdef Py_ssize_t r = eu.shape[0]
    cdef bint self_pair = vc_obj is None
    cdef const double[::1] vc
    if self_pair:
        vc = np.zeros(1)
    else:
        vc = np.ascontiguousarray(vc_obj, dtype=np.float64)
        if vc.shape[0] != n:
            raise ValueError("dependent series length mismatch")
    out_arr = np.empty(m)
    cdef double[::1] out = out_arr
    cdef Scratch sc
    cdef double* buf = <double*> malloc(n * sizeof(double))
    cdef double* uc = <double*> malloc(n * sizeof(double))
    sc.lo = <double*> malloc(n * sizeof(double))
    sc.hi = <double*> malloc(n * sizeof(double))
    sc.sample = <double*> malloc(SAMPLE * sizeof(double))
    if buf == NULL or uc == NULL or sc.lo == NULL or sc.hi == NULL or sc.sample == NULL:
        free(buf); free(uc); free(sc.lo); free(sc.hi); free(sc.sample)
        raise MemoryError()
    cdef Py_ssize_t row, i, j
    cdef double mu, su, maxabs, total, val, denom
    cdef const double* srow
    try:
        with nogil:
            for row in range(m):
                srow = &S[row, 0]
                maxabs = 0.0
                for i in range(n):
                    if fabs(srow[i]) > maxabs:
                        maxabs = fabs(srow[i])
                mu = _tmean(srow, n, k, &sc)
                for i in range(n):
                    uc[i] = srow[i] - mu
                su = 1.0
                if scaled:
                    for i in range(n):
                        buf[i] = uc[i] * uc[i]
                    su = sqrt(_tmean(buf, n, k, &sc))
                    if su <= DEGENERATE_RTOL * maxabs:
                        out[row] = NAN
                        continue
                total = 0.0
                for j in range(r):
                    if w[j] == 0.0:
                        continue
                    if self_pair:
                        for i in range(n):
                            buf[i] = _ipow(uc[i], eu[j] + ev[j])
                    else:
                        for i in range(n):
                            buf[i] = _ipow(uc[i], eu[j]) * _ipow(vc[i], ev[j])
                    val = _tmean(buf, n, k, &sc)
                    if scaled:
                        if self_pair:
                            denom = _ipow(su, eu[j] + ev[j])
                        else:
                            denom = _ipow(su, eu[j]) * _ipow(sdv, ev[j])
                        val = val / denom
                    total += w[j] * val
                out[row] = total
    finally:
        free(buf); free(uc); free(sc.lo); free(sc.hi); free(sc.sample)
    return out_arr
