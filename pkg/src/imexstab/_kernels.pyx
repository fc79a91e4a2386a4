# cython: language_level=3
"""Compiled root-modulus kernels for stability-region membership.

For each complex ``mu`` the polynomial ``c(z) - mu * b(z)`` is turned into
its monic companion matrix, which is already upper Hessenberg. LAPACK
``zgebal`` rescales it (scaling only, so the Hessenberg form survives) and a
compact single-shift QR iteration with Wilkinson shifts returns the
eigenvalues. The matrices here have order at most five, where a direct
loop beats the general-purpose LAPACK driver by an order of magnitude.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, fabs, sqrt
from libc.stdlib cimport malloc, free
from scipy.linalg.cython_lapack cimport zgebal

cnp.import_array()

cdef extern from "<complex.h>" nogil:
    double cabs(double complex)
    double complex csqrt(double complex)
    double complex conj(double complex)
    double creal(double complex)
    double cimag(double complex)

cdef double _EPS = 2.220446049250313e-16


cdef inline double _abs1(double complex x) noexcept nogil:
    return fabs(creal(x)) + fabs(cimag(x))


cdef int _hessenberg_eigvals(double complex* h, int n, double complex* w) noexcept nogil:
    """Eigenvalues of an upper Hessenberg matrix (column-major, leading dim n).

    Returns 0 on success, 1 if the iteration failed to converge.
    """
    cdef int hi = n - 1, lo, k, j, its = 0
    cdef double complex a, b, c, d, tr, disc, mu1, mu2, mu, x, y, t1, t2, cs, sn
    cdef double r, tst
    cdef double complex gc[8]
    cdef double complex gs[8]
    while hi >= 0:
        if hi == 0:
            w[0] = h[0]
            break
        # look for a negligible subdiagonal entry
        lo = hi
        while lo > 0:
            tst = _abs1(h[(lo - 1) + (lo - 1) * n]) + _abs1(h[lo + lo * n])
            if tst == 0.0:
                tst = 1.0
            if _abs1(h[lo + (lo - 1) * n]) <= _EPS * tst:
                h[lo + (lo - 1) * n] = 0.0
                break
            lo -= 1
        if lo == hi:
            w[hi] = h[hi + hi * n]
            hi -= 1
            its = 0
            continue
        its += 1
        if its > 60 * n:
            return 1
        a = h[(hi - 1) + (hi - 1) * n]
        b = h[(hi - 1) + hi * n]
        c = h[hi + (hi - 1) * n]
        d = h[hi + hi * n]
        if its % 11 == 0:
            # exceptional shift to break cycles
            mu = d + 0.75 * _abs1(c)
        else:
            tr = 0.5 * (a + d)
            disc = csqrt((0.5 * (a - d)) * (0.5 * (a - d)) + b * c)
            mu1 = tr + disc
            mu2 = tr - disc
            mu = mu1 if cabs(mu1 - d) <= cabs(mu2 - d) else mu2
        for k in range(lo, hi + 1):
            h[k + k * n] -= mu
        # QR factorization by Givens rotations, R overwrites the window
        for k in range(lo, hi):
            x = h[k + k * n]
            y = h[(k + 1) + k * n]
            r = sqrt(creal(x) * creal(x) + cimag(x) * cimag(x) + creal(y) * creal(y) + cimag(y) * cimag(y))
            if r == 0.0:
                cs = 1.0
                sn = 0.0
            else:
                cs = x / r
                sn = y / r
            gc[k - lo] = cs
            gs[k - lo] = sn
            for j in range(k, hi + 1):
                t1 = h[k + j * n]
                t2 = h[(k + 1) + j * n]
                h[k + j * n] = conj(cs) * t1 + conj(sn) * t2
                h[(k + 1) + j * n] = -sn * t1 + cs * t2
        # form RQ
        for k in range(lo, hi):
            cs = gc[k - lo]
            sn = gs[k - lo]
            for j in range(lo, (k + 2 if k + 2 <= hi else hi) + 1):
                t1 = h[j + k * n]
                t2 = h[j + (k + 1) * n]
                h[j + k * n] = t1 * cs + t2 * sn
                h[j + (k + 1) * n] = -t1 * conj(sn) + t2 * conj(cs)
        for k in range(lo, hi + 1):
            h[k + k * n] += mu
    return 0


cdef double _max_modulus(const double[::1] c, const double[::1] b, double complex mu,
                         double complex* h, double complex* w, double* scale) noexcept nogil:
    cdef int n = c.shape[0] - 1
    cdef int i, j, ilo, ihi, info
    cdef double complex lead = c[n] - mu * b[n]
    cdef double best = 0.0, m
    cdef char job = b'S'
    if cabs(lead) == 0.0:
        return INFINITY
    for i in range(n * n):
        h[i] = 0.0
    for j in range(n):
        # first row holds -p_{n-1-j} / p_n
        h[j * n] = -(c[n - 1 - j] - mu * b[n - 1 - j]) / lead
    for i in range(1, n):
        h[i + (i - 1) * n] = 1.0
    zgebal(&job, &n, h, &n, &ilo, &ihi, scale, &info)
    if _hessenberg_eigvals(h, n, w) != 0:
        return INFINITY
    for i in range(n):
        m = cabs(w[i])
        if m != m:
            return INFINITY
        if m > best:
            best = m
    return best


cdef int _check_degree(int n) except -1:
    if n < 1 or n > 8:
        raise ValueError("polynomial degree must lie in 1..8")
    return 0


def max_root_modulus(c, b, mu):
    """Largest root modulus of ``c(z) - mu_i b(z)`` for every ``mu_i``.

    Parameters
    ----------
    c, b : array_like of float
        Coefficients low-to-high, equal lengths ``r + 1``.
    mu : array_like of complex

    Returns
    -------
    ndarray of float
        Same shape as ``mu``; ``inf`` where the polynomial degenerates.
    """
    cdef const double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    mu_arr = np.atleast_1d(np.asarray(mu, dtype=np.complex128))
    cdef const double complex[::1] muv = np.ascontiguousarray(mu_arr.ravel())
    out = np.empty(muv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef int n = cv.shape[0] - 1
    cdef Py_ssize_t k
    _check_degree(n)
    cdef double complex* h = <double complex*> malloc(n * n * sizeof(double complex))
    cdef double complex* w = <double complex*> malloc(n * sizeof(double complex))
    cdef double* scale = <double*> malloc(n * sizeof(double))
    try:
        with nogil:
            for k in range(muv.shape[0]):
                ov[k] = _max_modulus(cv, bv, muv[k], h, w, scale)
    finally:
        free(h)
        free(w)
        free(scale)
    return out.reshape(mu_arr.shape)


def first_exceeding(c, b, mu, double threshold):
    """Index of the first ``mu_i`` whose largest root modulus is ``>= threshold``.

    Returns -1 when every entry stays below the threshold. Stops at the first
    failure, which makes it the fast path for certification.
    """
    cdef const double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef const double complex[::1] muv = np.ascontiguousarray(np.ravel(np.asarray(mu, dtype=np.complex128)))
    cdef int n = cv.shape[0] - 1
    cdef Py_ssize_t k, hit = -1
    _check_degree(n)
    cdef double complex* h = <double complex*> malloc(n * n * sizeof(double complex))
    cdef double complex* w = <double complex*> malloc(n * sizeof(double complex))
    cdef double* scale = <double*> malloc(n * sizeof(double))
    try:
        with nogil:
            for k in range(muv.shape[0]):
                if not (_max_modulus(cv, bv, muv[k], h, w, scale) < threshold):
                    hit = k
                    break
    finally:
        free(h)
        free(w)
        free(scale)
    return hit
