# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: batched complex Jacobi eigensolver, subentropy and
Givens-product unitaries.

Same contracts as ``_pykernels``; each problem of the batch is handled by
a plain C loop instead of lock-step numpy operations.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, fabs, hypot, cos, sin

cdef extern from "math.h" nogil:
    long double logl(long double)
    long double powl(long double, long double)

cnp.import_array()

cdef double LN2 = 0.6931471805599453


cdef inline double complex _conj(double complex z) nogil:
    return z.real - 1j * z.imag


cdef int _jacobi_one(double complex[:, ::1] a, double complex[:, ::1] v,
                     bint want_vectors, double tol, int max_sweeps) noexcept nogil:
    cdef Py_ssize_t d = a.shape[0]
    cdef Py_ssize_t p, q, k
    cdef double off, scale, r, tau, t, c, s
    cdef double complex e, se, sec, x1, x2
    cdef int sweeps = 0

    scale = 0.0
    for p in range(d):
        for q in range(d):
            scale += a[p, q].real * a[p, q].real + a[p, q].imag * a[p, q].imag
    scale = sqrt(scale)
    if scale < 1.0:
        scale = 1.0

    while True:
        off = 0.0
        for p in range(d - 1):
            for q in range(p + 1, d):
                off += a[p, q].real * a[p, q].real + a[p, q].imag * a[p, q].imag
        off = sqrt(2.0 * off)
        if off < tol * scale:
            return sweeps
        if sweeps >= max_sweeps:
            return -1
        sweeps += 1
        for p in range(d - 1):
            for q in range(p + 1, d):
                r = hypot(a[p, q].real, a[p, q].imag)
                if r <= 1e-300:
                    continue
                e = a[p, q] / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if tau >= 0:
                    t = 1.0 / (tau + hypot(1.0, tau))
                else:
                    t = -1.0 / (-tau + hypot(1.0, tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                se = s * e
                sec = s * _conj(e)
                for k in range(d):
                    x1 = a[k, p]
                    x2 = a[k, q]
                    a[k, p] = c * x1 - sec * x2
                    a[k, q] = se * x1 + c * x2
                for k in range(d):
                    x1 = a[p, k]
                    x2 = a[q, k]
                    a[p, k] = c * x1 - se * x2
                    a[q, k] = sec * x1 + c * x2
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                if want_vectors:
                    for k in range(d):
                        x1 = v[k, p]
                        x2 = v[k, q]
                        v[k, p] = c * x1 - sec * x2
                        v[k, q] = se * x1 + c * x2


def jacobi_eigh(a, want_vectors=True, double tol=1e-13, int max_sweeps=100):
    """See ``_pykernels.jacobi_eigh``."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] work = np.array(a, dtype=np.complex128, copy=True, order="C")
    if work.ndim != 3 or work.shape[1] != work.shape[2]:
        raise ValueError("expected an array of shape (n, d, d)")
    cdef Py_ssize_t n = work.shape[0]
    cdef Py_ssize_t d = work.shape[1]
    cdef Py_ssize_t i, k
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] vecs = np.zeros((n, d, d), dtype=np.complex128)
    cdef double complex[:, :, ::1] aw = work
    cdef double complex[:, :, ::1] vw = vecs
    cdef int used, worst = 0
    cdef bint failed = False
    cdef bint wv = want_vectors

    for i in range(n):
        for k in range(d):
            vw[i, k, k] = 1.0
    with nogil:
        for i in range(n):
            used = _jacobi_one(aw[i], vw[i], wv, tol, max_sweeps)
            if used < 0:
                failed = True
            elif used > worst:
                worst = used

    w = np.real(np.diagonal(work, axis1=1, axis2=2)).copy()
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(vecs, order[:, None, :], axis=2) if want_vectors else None
    return w, v, (-1 if failed else worst)


cdef double CLUSTER_RHO = 0.5
cdef int SERIES_MAX_TERMS = 2000


cdef inline long double _g(long double x, int d) noexcept nogil:
    if x <= 0.0:
        return 0.0
    return powl(x, d) * logl(x)


cdef long double _cluster_dd(double[:, ::1] x, Py_ssize_t row, Py_ssize_t lo, Py_ssize_t hi, int d,
                             double[::1] harm, double[::1] binom, long double* hk) noexcept nogil:
    # divided difference over x[lo..hi] from the Taylor series of g about the centre:
    # sum_k g^(j+k)(c)/(j+k)! h_k(x - c), h_k the complete homogeneous polynomials
    cdef int j = <int> (hi - lo)
    cdef long double c = 0.5 * (<long double> x[row, lo] + <long double> x[row, hi])
    cdef long double logc = logl(c)
    cdef long double q = (<long double> x[row, hi] - <long double> x[row, lo]) / (2.0 * c)
    cdef long double t = 1.0, y, a, r = 0.0, total = 0.0
    cdef int nterms = 0, k, m, kk
    cdef Py_ssize_t v
    if q > 0.0:
        while nterms < SERIES_MAX_TERMS:
            nterms += 1
            t *= (j + nterms) * q / nterms
            if t < 1e-22:
                break
    hk[0] = 1.0
    for k in range(1, nterms + 1):
        hk[k] = 0.0
    for v in range(lo, hi + 1):
        y = <long double> x[row, v] - c
        for k in range(1, nterms + 1):
            hk[k] += y * hk[k - 1]
    for k in range(nterms + 1):
        m = j + k
        if m <= d:
            a = binom[m] * powl(c, d - m) * (logc + harm[d] - harm[d - m])
        else:
            kk = m - d
            r = 1.0 / (d + 1) if kk == 1 else r * (kk - 1) / (d + kk)
            a = r * powl(c, -kk)
            if kk % 2 == 0:
                a = -a
        total += a * hk[k]
    return total


def subentropy(lam, double degeneracy_tol=1e-9):
    """See ``_pykernels.subentropy``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xs = np.sort(
        np.clip(np.array(lam, dtype=np.float64, ndmin=2), 0.0, None), axis=1)
    xs = np.ascontiguousarray(xs)
    cdef Py_ssize_t n = xs.shape[0]
    cdef int d = <int> xs.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] harm_arr = np.zeros(d + 1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] binom_arr = np.ones(d + 1, dtype=np.float64)
    cdef double[:, ::1] x = xs
    cdef long double[::1] c = np.empty(d, dtype=np.longdouble)
    cdef long double[::1] hk = np.empty(SERIES_MAX_TERMS + 1, dtype=np.longdouble)
    cdef double[::1] h = harm_arr
    cdef double[::1] b = binom_arr
    cdef Py_ssize_t row, i, j
    cdef long double gap, mid

    for j in range(1, d + 1):
        h[j] = h[j - 1] + 1.0 / j
        b[j] = b[j - 1] * (d - j + 1) / j
    with nogil:
        for row in range(n):
            for i in range(d):
                c[i] = _g(x[row, i], d)
            for j in range(1, d):
                i = d - 1
                while i >= j:
                    gap = <long double> x[row, i] - <long double> x[row, i - j]
                    mid = 0.5 * (<long double> x[row, i] + <long double> x[row, i - j])
                    if mid > 0.0 and gap <= CLUSTER_RHO * mid:
                        c[i] = _cluster_dd(x, row, i - j, i, d, h, b, &hk[0])
                    elif gap < degeneracy_tol:
                        c[i] = b[j] * powl(mid, d - j) * (logl(mid) + h[d] - h[d - j]) if mid > 0.0 else 0.0
                    else:
                        c[i] = (c[i] - c[i - 1]) / gap
                    i -= 1
            out[row] = <double> (-c[d - 1] / LN2)
    return out


def givens_unitary(angles, int d):
    """See ``_pykernels.givens_unitary``."""
    cdef double[::1] ang = np.ascontiguousarray(angles, dtype=np.float64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.eye(d, dtype=np.complex128)
    cdef double complex[:, ::1] u = out
    cdef Py_ssize_t i, j, r, k = 0
    cdef double c, s
    cdef double complex se, sec, x1, x2
    if ang.shape[0] < d * (d - 1):
        raise ValueError(f"need {d * (d - 1)} angles, got {ang.shape[0]}")
    for i in range(d - 1):
        for j in range(i + 1, d):
            c = cos(ang[k])
            s = sin(ang[k])
            se = s * cos(ang[k + 1]) + 1j * (s * sin(ang[k + 1]))
            sec = _conj(se)
            k += 2
            for r in range(d):
                x1 = u[r, i]
                x2 = u[r, j]
                u[r, i] = c * x1 - sec * x2
                u[r, j] = se * x1 + c * x2
    return out
