# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled amplification-factor kernels; same contract as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.math cimport NAN

cnp.import_array()


cdef double complex _rk(double complex zi, double complex ze, const double[:, ::1] a_im,
                        const double[:, ::1] a_ex, const double[::1] b_im, const double[::1] b_ex,
                        double complex u, double dt, double complex* fc,
                        double complex* fd) nogil:
    cdef Py_ssize_t s = b_im.shape[0]
    cdef Py_ssize_t i, j
    cdef double complex rhs, denom, ui, out
    for i in range(s):
        rhs = u
        for j in range(i):
            rhs = rhs + dt * (a_ex[i, j] * fc[j] + a_im[i, j] * fd[j])
        denom = 1.0 - dt * a_im[i, i] * zi
        if denom == 0:
            return NAN
        ui = rhs / denom
        fc[i] = ze * ui
        fd[i] = zi * ui
    out = u
    for i in range(s):
        out = out + dt * (b_ex[i] * fc[i] + b_im[i] * fd[i])
    return out


def rk_amplification(zi, ze, const double[:, ::1] a_im, const double[:, ::1] a_ex,
                     const double[::1] b_im, const double[::1] b_ex):
    zi_a = np.ascontiguousarray(zi, dtype=np.complex128)
    ze_a = np.ascontiguousarray(np.broadcast_to(ze, zi_a.shape), dtype=np.complex128)
    shape = zi_a.shape
    cdef const double complex[::1] zi_f = zi_a.reshape(-1)
    cdef const double complex[::1] ze_f = ze_a.reshape(-1)
    cdef Py_ssize_t n = zi_f.shape[0]
    cdef Py_ssize_t s = b_im.shape[0]
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef double complex* work = <double complex*> malloc(2 * s * sizeof(double complex))
    cdef Py_ssize_t p
    try:
        with nogil:
            for p in range(n):
                o[p] = _rk(zi_f[p], ze_f[p], a_im, a_ex, b_im, b_ex, 1.0, 1.0, work, work + s)
    finally:
        free(work)
    return out.reshape(shape)


def sdc_amplification(zi, ze, const double[::1] dts, const double[:, ::1] w, int K,
                      const double[:, ::1] a_im, const double[:, ::1] a_ex,
                      const double[::1] b_im, const double[::1] b_ex):
    zi_a = np.ascontiguousarray(zi, dtype=np.complex128)
    ze_a = np.ascontiguousarray(np.broadcast_to(ze, zi_a.shape), dtype=np.complex128)
    shape = zi_a.shape
    cdef const double complex[::1] zi_f = zi_a.reshape(-1)
    cdef const double complex[::1] ze_f = ze_a.reshape(-1)
    cdef Py_ssize_t n = zi_f.shape[0]
    cdef Py_ssize_t s = b_im.shape[0]
    cdef Py_ssize_t M = dts.shape[0]
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef double complex* work = <double complex*> malloc((2 * s + 2 * (M + 1)) * sizeof(double complex))
    cdef double complex* fc = work
    cdef double complex* fd = work + s
    cdef double complex* u = work + 2 * s
    cdef double complex* unew = work + 2 * s + M + 1
    cdef double complex* tmp
    cdef double complex zim, zex, z, quad, rhs, denom
    cdef Py_ssize_t p, m, q, k
    cdef bint bad
    try:
        with nogil:
            for p in range(n):
                zim = zi_f[p]
                zex = ze_f[p]
                z = zim + zex
                bad = False
                u[0] = 1.0
                for m in range(M):
                    u[m + 1] = _rk(zim, zex, a_im, a_ex, b_im, b_ex, u[m], dts[m], fc, fd)
                    if u[m + 1] != u[m + 1]:
                        bad = True
                        break
                if not bad:
                    for k in range(K):
                        unew[0] = u[0]
                        for m in range(1, M + 1):
                            quad = 0
                            for q in range(M + 1):
                                quad = quad + w[q, m - 1] * z * u[q]
                            rhs = unew[m - 1] + dts[m - 1] * (zex * unew[m - 1] - zex * u[m - 1] - zim * u[m]) + quad
                            denom = 1.0 - dts[m - 1] * zim
                            if denom == 0:
                                bad = True
                                break
                            unew[m] = rhs / denom
                        if bad:
                            break
                        tmp = u
                        u = unew
                        unew = tmp
                o[p] = NAN if bad else u[M]
    finally:
        free(work)
    return out.reshape(shape)
