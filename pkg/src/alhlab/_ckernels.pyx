# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, floor, log2, pow

cnp.import_array()


def riemann_lower(ginv_, gamma1_, d2g_):
    cdef double[:, :, ::1] ginv = np.ascontiguousarray(ginv_, dtype=np.float64)
    cdef double[:, :, :, ::1] G = np.ascontiguousarray(gamma1_, dtype=np.float64)
    cdef double[:, :, :, :, ::1] h = np.ascontiguousarray(d2g_, dtype=np.float64)
    cdef Py_ssize_t M = ginv.shape[0], N = ginv.shape[1]
    out = np.zeros((M, N, N, N, N))
    cdef double[:, :, :, :, ::1] R = out
    # Gup[m, e, b, c] = Gamma^e_bc
    gup_arr = np.zeros((M, N, N, N))
    cdef double[:, :, :, ::1] Gup = gup_arr
    cdef Py_ssize_t m, a, b, c, d, e, f
    cdef double s
    for m in range(M):
        for e in range(N):
            for b in range(N):
                for c in range(N):
                    s = 0.0
                    for f in range(N):
                        s += ginv[m, e, f] * G[m, f, b, c]
                    Gup[m, e, b, c] = s
        for a in range(N):
            for b in range(N):
                for c in range(N):
                    for d in range(N):
                        s = 0.5 * (h[m, a, c, b, d] - h[m, a, d, b, c]
                                   - h[m, b, c, a, d] + h[m, b, d, a, c])
                        for e in range(N):
                            s += G[m, e, b, d] * Gup[m, e, a, c] - G[m, e, a, d] * Gup[m, e, b, c]
                        R[m, a, b, c, d] = s
    return out


def b_tensor(ginv_, R_):
    cdef double[:, :, ::1] ginv = np.ascontiguousarray(ginv_, dtype=np.float64)
    cdef double[:, :, :, :, ::1] R = np.ascontiguousarray(R_, dtype=np.float64)
    cdef Py_ssize_t M = ginv.shape[0], N = ginv.shape[1]
    tmp_arr = np.zeros((N, N, N, N))
    rup_arr = np.zeros((N, N, N, N))
    cdef double[:, :, :, ::1] tmp = tmp_arr
    cdef double[:, :, :, ::1] Rup = rup_arr
    out = np.zeros((M, N, N, N, N))
    cdef double[:, :, :, :, ::1] B = out
    cdef Py_ssize_t m, i, j, p, q, a, b, c, d
    cdef double s
    for m in range(M):
        # tmp[i, a, q, b] = g^ip R_paqb
        for i in range(N):
            for a in range(N):
                for q in range(N):
                    for b in range(N):
                        s = 0.0
                        for p in range(N):
                            s += ginv[m, i, p] * R[m, p, a, q, b]
                        tmp[i, a, q, b] = s
        # Rup[i, a, j, b] = g^jq tmp[i, a, q, b]
        for i in range(N):
            for a in range(N):
                for j in range(N):
                    for b in range(N):
                        s = 0.0
                        for q in range(N):
                            s += ginv[m, j, q] * tmp[i, a, q, b]
                        Rup[i, a, j, b] = s
        for a in range(N):
            for b in range(N):
                for c in range(N):
                    for d in range(N):
                        s = 0.0
                        for i in range(N):
                            for j in range(N):
                                s += Rup[i, a, j, b] * R[m, i, c, j, d]
                        B[m, a, b, c, d] = s
    return out


def pair_modulus(points_, values_, double alpha, long log2_lo, long nbins):
    cdef double[:, ::1] pts = np.ascontiguousarray(points_, dtype=np.float64)
    cdef double[::1] F = np.ascontiguousarray(values_, dtype=np.float64)
    cdef Py_ssize_t P = pts.shape[0], D = pts.shape[1]
    maxdiff_arr = np.zeros(nbins)
    maxquot_arr = np.zeros(nbins)
    count_arr = np.zeros(nbins, dtype=np.int64)
    cdef double[::1] maxdiff = maxdiff_arr
    cdef double[::1] maxquot = maxquot_arr
    cdef long long[::1] count = count_arr
    cdef Py_ssize_t i, j, t
    cdef long k
    cdef double d, dd, df, q
    for i in range(P - 1):
        for j in range(i + 1, P):
            d = 0.0
            for t in range(D):
                dd = pts[j, t] - pts[i, t]
                d += dd * dd
            if d <= 0.0:
                continue
            d = sqrt(d)
            k = <long>floor(log2(d)) - log2_lo
            if k < 0 or k >= nbins:
                continue
            df = fabs(F[j] - F[i])
            q = df / pow(d, alpha)
            if df > maxdiff[k]:
                maxdiff[k] = df
            if q > maxquot[k]:
                maxquot[k] = q
            count[k] += 1
    return maxdiff_arr, maxquot_arr, count_arr
