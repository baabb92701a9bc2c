# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; same contracts as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


def kernel_sum(int l, const double[::1] coef,
               const double[::1] r, const double[::1] theta,
               const double[::1] nodes, const double complex[::1] weights):
    # complex products are spelled out in real arithmetic: Cython's complex
    # multiply goes through the inf/nan-aware library routine
    cdef Py_ssize_t nt = r.shape[0], nq = nodes.shape[0]
    cdef Py_ssize_t a, b, q
    out = np.zeros(nt, dtype=np.complex128)
    cdef double complex[::1] out_v = out
    cdef double rr, x, sh, ch, sx, cx, val, one_minus_r, fac
    cdef double dre, dim, den, qre, qim, wre, wim, vre, vim, are, aim, tmp
    cdef double tre, tim
    cdef int quarter = l % 4
    with nogil:
        for a in range(nt):
            rr = r[a]
            if rr == 1.0:
                out_v[a] = 0
                continue
            one_minus_r = 1.0 - rr
            fac = 1.0 - rr * rr
            tre = 0.0
            tim = 0.0
            for b in range(nq):
                x = theta[a] - nodes[b]
                sh = sin(0.5 * x)
                if l == 0:
                    val = fac / (one_minus_r * one_minus_r + 4.0 * rr * sh * sh)
                else:
                    ch = cos(0.5 * x)
                    sx = 2.0 * sh * ch
                    cx = 1.0 - 2.0 * sh * sh
                    # q = 1 / (1 - w), 1 - w = (1 - r) + 2 r sin^2(x/2) - i r sin x
                    dre = one_minus_r + 2.0 * rr * sh * sh
                    dim = -rr * sx
                    den = dre * dre + dim * dim
                    qre = dre / den
                    qim = -dim / den
                    wre = rr * cx
                    wim = rr * sx
                    vre = wre * qre - wim * qim
                    vim = wre * qim + wim * qre
                    are = 0.0
                    aim = 0.0
                    for q in range(l, 0, -1):
                        are = are + coef[q]
                        tmp = are * vre - aim * vim
                        aim = are * vim + aim * vre
                        are = tmp
                    # 2 q acc
                    tmp = 2.0 * (qre * are - qim * aim)
                    aim = 2.0 * (qre * aim + qim * are)
                    are = tmp
                    # Re(i^l acc)
                    if quarter == 0:
                        val = are
                    elif quarter == 1:
                        val = -aim
                    elif quarter == 2:
                        val = -are
                    else:
                        val = aim
                tre = tre + val * weights[b].real
                tim = tim + val * weights[b].imag
            out_v[a] = tre + 1j * tim
    return out


def horner(const double complex[::1] coeffs, const double complex[::1] z):
    # four points per pass: independent recurrences hide the multiply latency
    cdef Py_ssize_t n = coeffs.shape[0], nz = z.shape[0], a, q, k
    out = np.zeros(nz, dtype=np.complex128)
    cdef double complex[::1] out_v = out
    cdef double zr[4]
    cdef double zi[4]
    cdef double ar[4]
    cdef double ai[4]
    cdef double cr, ci, tmp
    with nogil:
        a = 0
        while a < nz:
            for k in range(4):
                if a + k < nz:
                    zr[k] = z[a + k].real
                    zi[k] = z[a + k].imag
                else:
                    zr[k] = 0.0
                    zi[k] = 0.0
                ar[k] = 0.0
                ai[k] = 0.0
            for q in range(n - 1, -1, -1):
                cr = coeffs[q].real
                ci = coeffs[q].imag
                for k in range(4):
                    tmp = ar[k] * zr[k] - ai[k] * zi[k] + cr
                    ai[k] = ar[k] * zi[k] + ai[k] * zr[k] + ci
                    ar[k] = tmp
            for k in range(4):
                if a + k < nz:
                    out_v[a + k] = ar[k] + 1j * ai[k]
            a += 4
    return out
