"""Numpy reference implementations of the compiled kernels.

Same signatures as ``_kernels``: flattened ``(3, M)`` inputs, results written
into ``out`` arrays.
"""
import numpy as np


def cross3(a, b, out):
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


def hall_apply(B, kappa, j, out):
    b = kappa * B
    jxb = np.empty_like(j)
    cross3(j, b, jxb)
    out[...] = j + jxb


def hall_solve(B, kappa, r, out):
    b = kappa * B
    br = np.einsum("im,im->m", b, r)
    rxb = np.empty_like(r)
    cross3(r, b, rxb)
    out[...] = (r + b * br - rxb) / (1.0 + np.einsum("im,im->m", b, b))


def maxwell_apply(E, B, xhat, p11, p12, p21, p22, edamp, Eout, Bout):
    xe = np.einsum("im,im->m", xhat, E)
    xb = np.einsum("im,im->m", xhat, B)
    ke = np.empty_like(E)
    kb = np.empty_like(B)
    cross3(xhat, E, ke)
    cross3(xhat, B, kb)
    ke *= 1j
    kb *= 1j
    par_e = xhat * xe
    par_b = xhat * xb
    Eout[...] = p11 * (E - par_e) + edamp * par_e + p12 * kb
    Bout[...] = p21 * ke + p22 * (B - par_b) + par_b
