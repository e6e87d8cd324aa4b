# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: exact Riemann-Liouville covariance fill, causal
Volterra noise sums and the linear Euler recursion.

Signatures and results match :mod:`mmfnoise._pykernels`.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, sqrt, tgamma, fabs, floor, round as cround

cnp.import_array()


cdef double _rgamma(double x) noexcept nogil:
    if x <= 0.0 and x == floor(x):
        return 0.0
    return 1.0 / tgamma(x)


cdef int _series(double a, double b, double c, double z, double *out) noexcept nogil:
    cdef double total = 1.0, term = 1.0
    cdef int n
    for n in range(20000):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        if fabs(term) * z <= 1e-17 * fabs(total) * (1.0 - z) or term == 0.0:
            out[0] = total
            return 0
    out[0] = total
    return 1


cdef int _hyp2f1(double a, double b, double c, double z, double *out) noexcept nogil:
    # 0 on success, 1 on series failure, 2 when c-a-b is near an integer
    cdef double d, w, first, second, s1, s2
    if z == 0.0 or a == 0.0 or b == 0.0:
        out[0] = 1.0
        return 0
    if z <= 0.5:
        return _series(a, b, c, z, out)
    d = c - a - b
    if fabs(d - cround(d)) < 1e-3:
        return 2
    w = 1.0 - z
    first = tgamma(c) * _rgamma(c - a) * _rgamma(c - b) / _rgamma(d)
    second = tgamma(c) * _rgamma(a) * _rgamma(b) / _rgamma(-d)
    if _series(a, b, 1.0 - d, w, &s1):
        return 1
    out[0] = first * s1
    if second != 0.0:
        if _series(c - a, c - b, 1.0 + d, w, &s2):
            return 1
        out[0] += second * pow(w, d) * s2
    return 0


def rl_covariance_matrix(const double[::1] t, const double[::1] h):
    """Exact Riemann-Liouville covariance on strictly positive times."""
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t i, j
    cdef double tm, tM, hm, hM, val, f, z
    cdef int status
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] c = out
    cdef double[::1] g = np.empty(n, dtype=np.float64)
    for i in range(n):
        g[i] = tgamma(h[i] + 0.5)
    for i in range(n):
        c[i, i] = pow(t[i], 2.0 * h[i]) / (2.0 * h[i] * g[i] * g[i])
        for j in range(i + 1, n):
            if t[i] <= t[j]:
                tm = t[i]; tM = t[j]; hm = h[i]; hM = h[j]
            else:
                tm = t[j]; tM = t[i]; hm = h[j]; hM = h[i]
            if tm == tM:
                val = pow(tm, 2.0 * hm) / (2.0 * hm * g[i] * g[j])
            else:
                z = tm / tM
                status = _hyp2f1(0.5 - hM, 1.0, hm + 1.5, z, &f)
                if status == 2:
                    from mmfnoise.numerics import hyp2f1
                    f = hyp2f1(0.5 - hM, 1.0, hm + 1.5, z)
                elif status == 1:
                    from mmfnoise.errors import NumericError
                    raise NumericError("2F1 series did not converge in covariance fill")
                val = (pow(tm, hm + 0.5) * pow(tM, hM - 0.5)
                       / ((hm + 0.5) * g[i] * g[j])) * f
            c[i, j] = val
            c[j, i] = val
    return out


def volterra_increments(const double[::1] t, const double[::1] gam,
                        const double[::1] norm, const double[:, ::1] dw):
    """Causal sums I[p, i] = norm[i] * sum_{j<i} w_ij dW[p, j]."""
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t npaths = dw.shape[0]
    cdef Py_ssize_t i, j, p
    cdef double e, ti, acc, a0, a1
    out = np.zeros((npaths, n), dtype=np.float64)
    cdef double[:, ::1] res = out
    cdef double[::1] w = np.empty(max(n - 1, 1), dtype=np.float64)
    for i in range(1, n):
        e = 2.0 * gam[i] + 1.0
        ti = t[i]
        for j in range(i):
            a0 = pow(ti - t[j], e)
            a1 = pow(ti - t[j + 1], e) if j + 1 < i else 0.0
            w[j] = sqrt((a0 - a1) / (e * (t[j + 1] - t[j]))) * norm[i]
        for p in range(npaths):
            acc = 0.0
            for j in range(i):
                acc += w[j] * dw[p, j]
            res[p, i] = acc
    return out


def euler_linear(const double[:, ::1] inc, const double[::1] dt, double lam,
                 const double[::1] sigma, double eps0):
    """eps[i+1] = eps[i] - lam*eps[i]*dt[i] + sigma[i]*(I[i+1] - I[i])."""
    cdef Py_ssize_t npaths = inc.shape[0]
    cdef Py_ssize_t n = inc.shape[1]
    cdef Py_ssize_t i, p
    cdef double e
    out = np.empty((npaths, n), dtype=np.float64)
    cdef double[:, ::1] eps = out
    for p in range(npaths):
        e = eps0
        eps[p, 0] = e
        for i in range(n - 1):
            e = e - lam * e * dt[i] + sigma[i] * (inc[p, i + 1] - inc[p, i])
            eps[p, i + 1] = e
    return out
