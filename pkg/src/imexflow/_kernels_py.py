"""Pure-Python amplification-factor kernels (fallback for the compiled module).

The point functions use only +, -, *, / and therefore also run on
``mpmath`` numbers for extended-precision evaluation.
"""
import math

import numpy as np


def rk_point(zi, ze, a_im, a_ex, b_im, b_ex, u=1.0, dt=1.0):
    """One IMEX RK step of u' = (zi + ze) u from ``u`` with step ``dt``."""
    s = len(b_im)
    fc = []
    fd = []
    for i in range(s):
        rhs = u
        for j in range(i):
            rhs = rhs + dt * (a_ex[i][j] * fc[j] + a_im[i][j] * fd[j])
        denom = 1 - dt * a_im[i][i] * zi
        if denom == 0:
            return math.nan
        ui = rhs / denom
        fc.append(ze * ui)
        fd.append(zi * ui)
    out = u
    for i in range(s):
        out = out + dt * (b_ex[i] * fc[i] + b_im[i] * fd[i])
    return out


def sdc_point(zi, ze, dts, w, K, a_im, a_ex, b_im, b_ex):
    """One SISDC step of size 1 on the scalar split problem, u(0) = 1."""
    M = len(dts)
    u = [1.0]
    for m in range(M):
        um = rk_point(zi, ze, a_im, a_ex, b_im, b_ex, u[m], dts[m])
        if um != um:
            return um
        u.append(um)
    z = zi + ze
    for _ in range(K):
        new = [u[0]]
        for m in range(1, M + 1):
            quad = 0
            for q in range(M + 1):
                quad = quad + w[q][m - 1] * z * u[q]
            h = dts[m - 1]
            rhs = new[m - 1] + h * (ze * new[m - 1] - ze * u[m - 1] - zi * u[m]) + quad
            denom = 1 - h * zi
            if denom == 0:
                return math.nan
            new.append(rhs / denom)
        u = new
    return u[M]


def rk_amplification(zi, ze, a_im, a_ex, b_im, b_ex):
    zi = np.asarray(zi, dtype=complex)
    ze = np.asarray(ze, dtype=complex)
    a_im, a_ex = a_im.tolist(), a_ex.tolist()
    b_im, b_ex = b_im.tolist(), b_ex.tolist()
    out = np.empty(zi.shape, dtype=complex)
    for idx in np.ndindex(zi.shape):
        out[idx] = rk_point(complex(zi[idx]), complex(ze[idx]), a_im, a_ex, b_im, b_ex)
    return out


def sdc_amplification(zi, ze, dts, w, K, a_im, a_ex, b_im, b_ex):
    zi = np.asarray(zi, dtype=complex)
    ze = np.asarray(ze, dtype=complex)
    dts, w = dts.tolist(), w.tolist()
    a_im, a_ex = a_im.tolist(), a_ex.tolist()
    b_im, b_ex = b_im.tolist(), b_ex.tolist()
    out = np.empty(zi.shape, dtype=complex)
    for idx in np.ndindex(zi.shape):
        out[idx] = sdc_point(complex(zi[idx]), complex(ze[idx]), dts, w, int(K),
                             a_im, a_ex, b_im, b_ex)
    return out
