# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: angular-field outer product and the convolution
forward/backward used by the classifier. Signatures mirror pykernels."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def gaf_outer(x):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] m = out
    s_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] s = s_arr
    cdef Py_ssize_t i, j
    cdef double q, v
    for i in range(n):
        q = 1.0 - xv[i] * xv[i]
        s[i] = sqrt(q) if q > 0.0 else 0.0
    for i in range(n):
        for j in range(n):
            v = xv[i] * xv[j] - s[i] * s[j]
            if v > 1.0:
                v = 1.0
            elif v < -1.0:
                v = -1.0
            m[i, j] = v
    return out


def conv2d_forward(x, kernels, bias):
    # kernel-coefficient outer loops keep the i/j inner loops contiguous so
    # the C compiler can vectorize them
    cdef double[:, :, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, :, :, ::1] kv = np.ascontiguousarray(kernels, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(bias, dtype=np.float64)
    cdef Py_ssize_t N = xv.shape[0], C = xv.shape[1], H = xv.shape[2], W = xv.shape[3]
    cdef Py_ssize_t F = kv.shape[0], KH = kv.shape[2], KW = kv.shape[3]
    cdef Py_ssize_t OH = H - KH + 1, OW = W - KW + 1
    out = np.empty((N, F, OH, OW), dtype=np.float64)
    cdef double[:, :, :, ::1] ov = out
    cdef Py_ssize_t n, f, i, j, c, u, v
    cdef double coeff
    for n in range(N):
        for f in range(F):
            coeff = bv[f]
            for i in range(OH):
                for j in range(OW):
                    ov[n, f, i, j] = coeff
            for c in range(C):
                for u in range(KH):
                    for v in range(KW):
                        coeff = kv[f, c, u, v]
                        for i in range(OH):
                            for j in range(OW):
                                ov[n, f, i, j] += coeff * xv[n, c, i + u, j + v]
    return out


def conv2d_param_grads(x, dout, Py_ssize_t kh, Py_ssize_t kw):
    cdef double[:, :, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, :, :, ::1] dv = np.ascontiguousarray(dout, dtype=np.float64)
    cdef Py_ssize_t N = xv.shape[0], C = xv.shape[1]
    cdef Py_ssize_t F = dv.shape[1], OH = dv.shape[2], OW = dv.shape[3]
    dk = np.zeros((F, C, kh, kw), dtype=np.float64)
    db = np.zeros(F, dtype=np.float64)
    cdef double[:, :, :, ::1] dkv = dk
    cdef double[::1] dbv = db
    cdef Py_ssize_t n, f, i, j, c, u, v
    cdef double acc
    for n in range(N):
        for f in range(F):
            acc = 0.0
            for i in range(OH):
                for j in range(OW):
                    acc += dv[n, f, i, j]
            dbv[f] += acc
            for c in range(C):
                for u in range(kh):
                    for v in range(kw):
                        acc = 0.0
                        for i in range(OH):
                            for j in range(OW):
                                acc += dv[n, f, i, j] * xv[n, c, i + u, j + v]
                        dkv[f, c, u, v] += acc
    return dk, db
