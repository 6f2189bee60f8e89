# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pointwise kernels.

All arrays are passed flattened to shape ``(3, M)`` and must be C-contiguous.
``nsmhall.kernels`` handles reshaping and dispatch.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def cross3(const double[:, ::1] a, const double[:, ::1] b, double[:, ::1] out):
    cdef Py_ssize_t i, m = a.shape[1]
    cdef double a0, a1, a2, b0, b1, b2
    for i in range(m):
        a0 = a[0, i]; a1 = a[1, i]; a2 = a[2, i]
        b0 = b[0, i]; b1 = b[1, i]; b2 = b[2, i]
        out[0, i] = a1 * b2 - a2 * b1
        out[1, i] = a2 * b0 - a0 * b2
        out[2, i] = a0 * b1 - a1 * b0


def hall_apply(const double[:, ::1] B, double kappa, const double[:, ::1] j,
               double[:, ::1] out):
    cdef Py_ssize_t i, m = B.shape[1]
    cdef double b0, b1, b2, j0, j1, j2
    for i in range(m):
        b0 = kappa * B[0, i]; b1 = kappa * B[1, i]; b2 = kappa * B[2, i]
        j0 = j[0, i]; j1 = j[1, i]; j2 = j[2, i]
        out[0, i] = j0 + (j1 * b2 - j2 * b1)
        out[1, i] = j1 + (j2 * b0 - j0 * b2)
        out[2, i] = j2 + (j0 * b1 - j1 * b0)


def hall_solve(const double[:, ::1] B, double kappa, const double[:, ::1] r,
               double[:, ::1] out):
    cdef Py_ssize_t i, m = B.shape[1]
    cdef double b0, b1, b2, r0, r1, r2, br, inv
    for i in range(m):
        b0 = kappa * B[0, i]; b1 = kappa * B[1, i]; b2 = kappa * B[2, i]
        r0 = r[0, i]; r1 = r[1, i]; r2 = r[2, i]
        br = b0 * r0 + b1 * r1 + b2 * r2
        inv = 1.0 / (1.0 + b0 * b0 + b1 * b1 + b2 * b2)
        out[0, i] = (r0 + b0 * br - (r1 * b2 - r2 * b1)) * inv
        out[1, i] = (r1 + b1 * br - (r2 * b0 - r0 * b2)) * inv
        out[2, i] = (r2 + b2 * br - (r0 * b1 - r1 * b0)) * inv


def maxwell_apply(const double complex[:, ::1] E, const double complex[:, ::1] B,
                  const double[:, ::1] xhat,
                  const double[::1] p11, const double[::1] p12,
                  const double[::1] p21, const double[::1] p22,
                  const double[::1] edamp,
                  double complex[:, ::1] Eout, double complex[:, ::1] Bout):
    cdef Py_ssize_t i, m = E.shape[1]
    cdef double x0, x1, x2
    cdef double complex e0, e1, e2, c0, c1, c2, xe, xb
    cdef double complex ke0, ke1, ke2, kb0, kb1, kb2
    cdef double complex I = 1j
    for i in range(m):
        x0 = xhat[0, i]; x1 = xhat[1, i]; x2 = xhat[2, i]
        e0 = E[0, i]; e1 = E[1, i]; e2 = E[2, i]
        c0 = B[0, i]; c1 = B[1, i]; c2 = B[2, i]
        xe = x0 * e0 + x1 * e1 + x2 * e2
        xb = x0 * c0 + x1 * c1 + x2 * c2
        ke0 = I * (x1 * e2 - x2 * e1)
        ke1 = I * (x2 * e0 - x0 * e2)
        ke2 = I * (x0 * e1 - x1 * e0)
        kb0 = I * (x1 * c2 - x2 * c1)
        kb1 = I * (x2 * c0 - x0 * c2)
        kb2 = I * (x0 * c1 - x1 * c0)
        Eout[0, i] = p11[i] * (e0 - x0 * xe) + edamp[i] * x0 * xe + p12[i] * kb0
        Eout[1, i] = p11[i] * (e1 - x1 * xe) + edamp[i] * x1 * xe + p12[i] * kb1
        Eout[2, i] = p11[i] * (e2 - x2 * xe) + edamp[i] * x2 * xe + p12[i] * kb2
        Bout[0, i] = p21[i] * ke0 + p22[i] * (c0 - x0 * xb) + x0 * xb
        Bout[1, i] = p21[i] * ke1 + p22[i] * (c1 - x1 * xb) + x1 * xb
        Bout[2, i] = p21[i] * ke2 + p22[i] * (c2 - x2 * xb) + x2 * xb
