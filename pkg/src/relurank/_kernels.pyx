# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sign kernels for sampling difference families.

Both kernels evaluate in float64 alongside a running magnitude bound and
return, per (sample, point), +1 / -1 when the sign is certain and 0 when the
value is within ``rel_tol * magnitude`` of zero (a hidden pre-activation or
the difference itself).  Callers re-evaluate the 0 entries exactly.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow

cnp.import_array()


def relu_difference_signs(const double[:, ::1] thetas,
                          const double[:, ::1] points,
                          const long[::1] widths,
                          const double[::1] f0,
                          double rel_tol):
    cdef Py_ssize_t S = thetas.shape[0]
    cdef Py_ssize_t m = points.shape[0]
    cdef Py_ssize_t n_layers = widths.shape[0] - 1
    cdef Py_ssize_t max_w = 0
    cdef Py_ssize_t l, j, i, s, p, pos, n_in, n_out
    cdef double acc, mag, w, diff, dmag
    cdef bint uncertain
    for l in range(widths.shape[0]):
        if widths[l] > max_w:
            max_w = widths[l]
    out_arr = np.zeros((S, m), dtype=np.int8)
    cdef signed char[:, ::1] out = out_arr
    cdef double[::1] a = np.empty(max_w)
    cdef double[::1] am = np.empty(max_w)
    cdef double[::1] y = np.empty(max_w)
    cdef double[::1] ym = np.empty(max_w)

    for s in range(S):
        for p in range(m):
            for i in range(widths[0]):
                a[i] = points[p, i]
                am[i] = fabs(points[p, i])
            pos = 0
            uncertain = False
            for l in range(1, n_layers + 1):
                n_in = widths[l - 1]
                n_out = widths[l]
                for j in range(n_out):
                    acc = 0.0
                    mag = 0.0
                    for i in range(n_in):
                        w = thetas[s, pos + i]
                        acc += w * a[i]
                        mag += fabs(w) * am[i]
                    w = thetas[s, pos + n_in]
                    acc += w
                    mag += fabs(w)
                    y[j] = acc
                    ym[j] = mag
                    pos += n_in + 1
                if l < n_layers:
                    for j in range(n_out):
                        if fabs(y[j]) <= rel_tol * ym[j]:
                            uncertain = True
                        if y[j] > 0.0:
                            a[j] = y[j]
                            am[j] = ym[j]
                        else:
                            a[j] = 0.0
                            am[j] = 0.0
                if uncertain:
                    break
            if uncertain:
                out[s, p] = 0
                continue
            diff = y[0] - f0[p]
            dmag = ym[0] + fabs(f0[p])
            if fabs(diff) <= rel_tol * dmag:
                out[s, p] = 0
            elif diff > 0.0:
                out[s, p] = 1
            else:
                out[s, p] = -1
    return out_arr


def poly_difference_signs(const double[:, ::1] thetas,
                          const long[:, ::1] exps,
                          const double[::1] coefs,
                          const long[::1] slot_of_term,
                          const double[::1] f0,
                          double rel_tol):
    cdef Py_ssize_t S = thetas.shape[0]
    cdef Py_ssize_t T = exps.shape[0]
    cdef Py_ssize_t D = exps.shape[1]
    cdef Py_ssize_t m = f0.shape[0]
    cdef Py_ssize_t s, t, k, p
    cdef double term, tmag, v, diff, dmag
    out_arr = np.zeros((S, m), dtype=np.int8)
    cdef signed char[:, ::1] out = out_arr
    cdef double[::1] val = np.empty(m)
    cdef double[::1] mag = np.empty(m)
    for s in range(S):
        for p in range(m):
            val[p] = 0.0
            mag[p] = 0.0
        for t in range(T):
            term = coefs[t]
            tmag = fabs(coefs[t])
            for k in range(D):
                if exps[t, k]:
                    v = pow(thetas[s, k], <double>exps[t, k])
                    term *= v
                    tmag *= fabs(v)
            val[slot_of_term[t]] += term
            mag[slot_of_term[t]] += tmag
        for p in range(m):
            diff = val[p] - f0[p]
            dmag = mag[p] + fabs(f0[p])
            if fabs(diff) <= rel_tol * dmag:
                out[s, p] = 0
            elif diff > 0.0:
                out[s, p] = 1
            else:
                out[s, p] = -1
    return out_arr
