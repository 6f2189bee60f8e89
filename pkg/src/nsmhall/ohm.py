"""Generalized Ohm's law ``j + kappa P(j x B) = sigma (c E + P(v x B))``.

The Hall matrix ``M(kappa, B) j = j + kappa j x B`` is handled pointwise by the
compiled kernels. The Leray-projected law is solved by a fixed-point iteration
that contracts at rate about ``kappa sup|B|``.
"""
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from . import spectral as sp
from .errors import NoConvergence
from .params import Variant


@dataclass(frozen=True)
class OhmSolveOptions:
    tol: float = 1e-12
    max_iters: int = 200
    mode: str = "implicit"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.mode not in ("implicit", "lagged"):
            raise ValueError(f"unknown Ohm mode {self.mode!r}")


@dataclass
class OhmResult:
    j: sp.SpectralField
    iterations: int
    residuals: list = field(default_factory=list)
    contraction: float = 0.0


# -- pointwise Hall matrix ---------------------------------------------------

def hall_matrix(B, kappa):
    """``M(kappa, B)`` as nested lists (entries keep their type, e.g. ``Fraction``)."""
    b1, b2, b3 = (kappa * x for x in B)
    one, zero = kappa ** 0, kappa * 0
    return [[one, b3, zero - b2], [zero - b3, one, b1], [b2, zero - b1, one]]


def hall_det(B, kappa):
    """Determinant of ``M`` by cofactor expansion (exact for exact input types)."""
    m = hall_matrix(B, kappa)
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def hall_matrix_apply(B, kappa, j):
    """``M(kappa, B) j`` for 3-vectors or ``(3, ...)`` arrays."""
    return kernels.hall_apply(np.asarray(B, float), kappa, np.asarray(j, float))


def hall_matrix_solve(B, kappa, r):
    """``M(kappa, B)^{-1} r`` via the closed-form adjugate over ``kappa^2 |B|^2 + 1``."""
    return kernels.hall_solve(np.asarray(B, float), kappa, np.asarray(r, float))


# -- spectral solves ---------------------------------------------------------

def keep_mask(box, m=None):
    """Retained modes: 2/3-rule cube intersected with ``|xi| <= m``."""
    g = box.grid()
    mask = g.dealias
    if m is not None:
        mask = mask & (g.kmag <= m)
    return mask


def _project(coeffs, box, on):
    return sp.leray_coeffs(coeffs, box) if on else coeffs


def ohm_rhs(v, E, B, p, mask, project=True):
    """``sigma (c E + P keep(v x B))`` as coefficients."""
    box = v.box
    vxb = sp.cross(v, B).coeffs * mask
    return p.sigma * (p.c * E.coeffs + _project(vxb, box, project))


def solve_ohm_lagged(v, E, B, j_prev, p, m=None, B_prev=None):
    """Explicit lagged law ``j = sigma(c E + P T_m(v x B_prev)) - kappa P T_m(j_prev x B)``.

    ``B_prev`` defaults to ``B``; for the perturbation variant pass total fields.
    The result is projected and supported in the retained set.
    """
    sp.same_box(v, E, B, j_prev)
    box = v.box
    mask = keep_mask(box, m)
    Bl = B if B_prev is None else B_prev
    out = p.sigma * (p.c * E.coeffs + sp.leray_coeffs(sp.cross(v, Bl).coeffs * mask, box))
    if p.kappa:
        out = out - p.kappa * sp.leray_coeffs(sp.cross(j_prev, B).coeffs * mask, box)
    return sp.SpectralField(box, sp.leray_coeffs(out * mask, box))


def solve_ohm_implicit(v, E, B, p, opts=None, m=None, project=None):
    """Fixed-point solve of ``j + kappa P keep(j x B) = sigma(c E + P keep(v x B))``.

    Seeded with the pointwise ``M^{-1} sigma(c E + v x B)`` (retained and
    projected). Stops when ``||j_{n+1} - j_n|| <= tol ||rhs||``, which is the
    residual of ``j_n``. For plain ``NSM`` (``project=False``) nothing is
    projected and ``kappa`` must vanish.

    Raises
    ------
    NoConvergence
        If the tolerance is not met within ``opts.max_iters`` iterations.
    """
    opts = opts or OhmSolveOptions()
    box = sp.same_box(v, E, B)
    if project is None:
        project = p.variant is not Variant.NSM
    mask = keep_mask(box, m)
    rhs = ohm_rhs(v, E, B, p, mask, project)
    rhs_norm = float(np.sqrt(np.vdot(rhs, rhs).real))
    contraction = p.kappa * sp.sup_norm(B) if p.kappa else 0.0
    if p.kappa == 0 or rhs_norm == 0:
        return OhmResult(sp.SpectralField(box, rhs), 1, [0.0], contraction)

    dmask = box.grid().dealias
    Bphys = sp.inverse(B.coeffs * dmask, box)
    vphys = sp.inverse(v.coeffs * dmask, box)
    pointwise_rhs = p.sigma * (p.c * sp.inverse(E.coeffs, box) + kernels.cross3(vphys, Bphys))
    seed = sp.forward(kernels.hall_solve(Bphys, p.kappa, pointwise_rhs), box) * mask
    j = _project(seed, box, project)

    residuals = []
    for it in range(1, opts.max_iters + 1):
        jxb = sp.forward(kernels.cross3(sp.inverse(j * dmask, box), Bphys), box) * mask
        j_new = rhs - p.kappa * _project(jxb, box, project)
        diff = j_new - j
        res = float(np.sqrt(np.vdot(diff, diff).real)) / rhs_norm
        residuals.append(res)
        j = j_new
        if res <= opts.tol:
            return OhmResult(sp.SpectralField(box, j), it, residuals, contraction)
    raise NoConvergence(
        f"Ohm fixed point stalled at relative residual {residuals[-1]:.3e} after "
        f"{opts.max_iters} iterations (kappa*sup|B| = {contraction:.3g})",
        iterations=opts.max_iters,
        residual=residuals[-1],
    )


def ohm_residual(j, v, E, B, p, m=None, project=True):
    """Relative residual ``||j + kappa P keep(j x B) - rhs|| / ||rhs||``."""
    box = j.box
    mask = keep_mask(box, m)
    rhs = ohm_rhs(v, E, B, p, mask, project)
    lhs = j.coeffs + p.kappa * _project(sp.cross(j, B).coeffs * mask, box, project)
    den = float(np.sqrt(np.vdot(rhs, rhs).real)) or 1.0
    return float(np.sqrt(np.vdot(lhs - rhs, lhs - rhs).real)) / den


def solve_ohm_dense(v, E, B, p, m=None, project=None):
    """Reference solve: assemble ``I + kappa P keep((.) x B)`` as a dense real matrix.

    The operator acts on the physical-space samples of ``j``; every column is
    one application to a unit sample. Intended for small grids only.
    """
    box = sp.same_box(v, E, B)
    if project is None:
        project = p.variant is not Variant.NSM
    mask = keep_mask(box, m)
    rhs = ohm_rhs(v, E, B, p, mask, project)
    dmask = box.grid().dealias
    Bphys = sp.inverse(B.coeffs * dmask, box)
    size = 3 * int(np.prod(box.shape))
    mat = np.empty((size, size))
    unit = np.zeros(size)
    for col in range(size):
        unit[col] = 1.0
        jc = sp.forward(unit.reshape((3,) + box.shape), box)
        jxb = sp.forward(kernels.cross3(sp.inverse(jc * dmask, box), Bphys), box) * mask
        mat[:, col] = sp.inverse(jc + p.kappa * _project(jxb, box, project), box).ravel()
        unit[col] = 0.0
    sol = np.linalg.solve(mat, sp.inverse(rhs, box).ravel())
    return sp.SpectralField(box, sp.forward(sol.reshape((3,) + box.shape), box))
