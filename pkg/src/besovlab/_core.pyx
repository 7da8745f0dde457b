# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_core_py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, fabs, pow

cnp.import_array()

BACKEND = "cython"


cdef Py_ssize_t _bisect_left(const double[::1] breaks, double t) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = breaks.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if breaks[mid] < t:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef double _seg_eval(const long[::1] offs, const double[::1] coef,
                      const double[::1] expo, const long[::1] logp,
                      Py_ssize_t k, double t) noexcept nogil:
    cdef double lt = log(t), acc = 0.0, term
    cdef Py_ssize_t i
    cdef long j
    for i in range(offs[k], offs[k + 1]):
        term = coef[i] * pow(t, expo[i])
        for j in range(logp[i]):
            term *= lt
        acc += term
    return acc


def seg_index(const double[::1] breaks, double t):
    return _bisect_left(breaks, t)


def seg_eval(const long[::1] offs, const double[::1] coef, const double[::1] expo,
             const long[::1] logp, Py_ssize_t k, double t):
    return _seg_eval(offs, coef, expo, logp, k, t)


def pl_eval_scalar(const double[::1] breaks, const long[::1] offs,
                   const double[::1] coef, const double[::1] expo,
                   const long[::1] logp, double t):
    return _seg_eval(offs, coef, expo, logp, _bisect_left(breaks, t), t)


def pl_eval(const double[::1] breaks, const long[::1] offs, const double[::1] coef,
            const double[::1] expo, const long[::1] logp, t):
    arr = np.asarray(t, dtype=np.float64)
    flat = np.ascontiguousarray(arr.ravel())
    cdef const double[::1] tv = flat
    out = np.empty(flat.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(tv.shape[0]):
            ov[i] = _seg_eval(offs, coef, expo, logp, _bisect_left(breaks, tv[i]), tv[i])
    return out.reshape(arr.shape)


def seg_root(const long[::1] offs, const double[::1] coef, const double[::1] expo,
             const long[::1] logp, Py_ssize_t k, double y, double lo, double hi,
             double rtol):
    cdef double a = log(lo), b = log(hi), mid
    cdef double tol = log1p(rtol)
    with nogil:
        while b - a > tol:
            mid = 0.5 * (a + b)
            if mid == a or mid == b:
                break
            if _seg_eval(offs, coef, expo, logp, k, exp(mid)) < y:
                a = mid
            else:
                b = mid
    return exp(0.5 * (a + b))


cdef list _weights(int k):
    cdef list w = []
    cdef int i
    cdef double c = 1.0
    for i in range(k + 1):
        w.append(((-1) ** (k - i)) * c)
        c = c * (k - i) / (i + 1)
    return w


def kdiff(a3_in, int k, Py_ssize_t m):
    cdef const double[:, :, ::1] a3 = np.ascontiguousarray(a3_in, dtype=np.float64)
    cdef Py_ssize_t P = a3.shape[0], N = a3.shape[1], Q = a3.shape[2]
    out = np.zeros((P, N + k * m, Q))
    cdef double[:, :, ::1] ov = out
    cdef double[::1] w = np.asarray(_weights(k), dtype=np.float64)
    cdef Py_ssize_t i, x, u, z, off
    with nogil:
        for i in range(k + 1):
            off = (k - i) * m
            for x in range(P):
                for u in range(N):
                    for z in range(Q):
                        ov[x, off + u, z] += w[i] * a3[x, u, z]
    return out


def kdiff_power_sums(a3_in, int k, shifts_in, double p):
    cdef const double[:, :, ::1] a3 = np.ascontiguousarray(a3_in, dtype=np.float64)
    cdef const long[::1] shifts = np.ascontiguousarray(shifts_in, dtype=np.int64)
    cdef Py_ssize_t P = a3.shape[0], N = a3.shape[1], Q = a3.shape[2]
    cdef double[::1] w = np.asarray(_weights(k), dtype=np.float64)
    out = np.empty(shifts.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t s, x, u, z, i, src, m, L
    cdef double acc, v
    cdef bint generic = p != 1.0 and p != 2.0
    cdef double[:, :, ::1] buf
    for s in range(shifts.shape[0]):
        m = shifts[s]
        L = N + k * m
        if generic:
            # fill |difference| here, leave the power sum to NumPy's vectorised pow
            buf_arr = np.empty((P, L, Q))
            buf = buf_arr
        acc = 0.0
        with nogil:
            for x in range(P):
                for u in range(L):
                    # innermost loop runs along the contiguous axis
                    for z in range(Q):
                        v = 0.0
                        for i in range(k + 1):
                            src = u - (k - i) * m
                            if 0 <= src < N:
                                v += w[i] * a3[x, src, z]
                        v = fabs(v)
                        if generic:
                            buf[x, u, z] = v
                        elif p == 1.0:
                            acc += v
                        else:
                            acc += v * v
        if generic:
            acc = float(np.sum(np.power(buf_arr, p)))
        ov[s] = acc
    return out
