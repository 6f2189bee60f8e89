"""Dispatch for the pointwise hot kernels.

The compiled extension ``nsmhall._kernels`` is used when it imports; the numpy
versions in ``nsmhall._kernels_py`` are the fallback. Setting the environment
variable ``NSMHALL_PURE_PYTHON=1`` forces the fallback.

Every function takes arrays whose leading axis has length 3 and arbitrary
trailing shape, and returns a new array.
"""
import os

import numpy as np

from . import _kernels_py

_impl = _kernels_py
BACKEND = "python"
if os.environ.get("NSMHALL_PURE_PYTHON", "") != "1":
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def use_backend(name):
    """Switch between ``"cython"`` and ``"python"`` at runtime (benchmarks, tests)."""
    global _impl, BACKEND
    if name == "python":
        _impl, BACKEND = _kernels_py, "python"
    elif name == "cython":
        from . import _kernels as compiled

        _impl, BACKEND = compiled, "cython"
    else:
        raise ValueError(f"unknown backend {name!r}")


def _flat(a, dtype):
    return np.ascontiguousarray(a, dtype=dtype).reshape(3, -1)


def cross3(a, b):
    """Pointwise cross product of two real 3-vector fields."""
    out = np.empty(np.shape(a), dtype=np.float64)
    _impl.cross3(_flat(a, np.float64), _flat(b, np.float64), out.reshape(3, -1))
    return out


def hall_apply(B, kappa, j):
    """Pointwise ``j + kappa * j x B``."""
    out = np.empty(np.shape(j), dtype=np.float64)
    _impl.hall_apply(_flat(B, np.float64), float(kappa), _flat(j, np.float64),
                     out.reshape(3, -1))
    return out


def hall_solve(B, kappa, r):
    """Pointwise inverse of :func:`hall_apply` (closed-form adjugate)."""
    out = np.empty(np.shape(r), dtype=np.float64)
    _impl.hall_solve(_flat(B, np.float64), float(kappa), _flat(r, np.float64),
                     out.reshape(3, -1))
    return out


def maxwell_apply(E, B, xhat, p11, p12, p21, p22, edamp):
    """Apply the per-mode (E, B) propagator block; returns ``(E_new, B_new)``."""
    shape = np.shape(E)
    Eo = np.empty(shape, dtype=np.complex128)
    Bo = np.empty(shape, dtype=np.complex128)

    def scal(x):
        return np.ascontiguousarray(x, dtype=np.float64).reshape(-1)

    _impl.maxwell_apply(
        _flat(E, np.complex128), _flat(B, np.complex128), _flat(xhat, np.float64),
        scal(p11), scal(p12), scal(p21), scal(p22), scal(edamp),
        Eo.reshape(3, -1), Bo.reshape(3, -1),
    )
    return Eo, Bo
