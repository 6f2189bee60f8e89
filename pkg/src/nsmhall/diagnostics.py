"""Energy, helicity and norm diagnostics.

A :class:`DiagnosticsRecord` is a flat, time-stamped snapshot. Records are
written as CSV (one row each) and JSONL (including the full norm map) with the
schema identified by :data:`SCHEMA_NAME` and :data:`SCHEMA_VERSION`.
"""
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.integrate import simpson

from . import littlewood_paley as lp
from . import spectral as sp
from .errors import NonSolenoidal, NonzeroMeanMode
from .ohm import solve_ohm_implicit
from .params import Variant

SCHEMA_NAME = "nsmhall.diagnostics"
SCHEMA_VERSION = 1

#: relative tolerance for the divergence check in ``vector_potential``
DIV_TOL = 1e-9

NORM_FAMILIES = ("Hdot", "H", "B21", "hybrid", "L2log", "Lp")


@dataclass(frozen=True)
class NormSpec:
    """A labelled norm of one field: ``field`` in ``v, E, B, j``."""

    field: str
    family: str
    s: float = 0.0
    s2: float = None
    p: float = 2.0

    def __post_init__(self):
        if self.field not in ("v", "E", "B", "j"):
            raise ValueError(f"unknown field {self.field!r}")
        if self.family not in NORM_FAMILIES:
            raise ValueError(f"unknown norm family {self.family!r}")
        if self.family == "hybrid" and self.s2 is None:
            raise ValueError("hybrid norms need s2")
        if self.family == "Lp" and not (self.p >= 1):
            raise ValueError("Lp norms need p >= 1")

    @property
    def label(self):
        if self.family == "hybrid":
            return f"{self.field}:hybrid({self.s:g},{self.s2:g})"
        if self.family == "L2log":
            return f"{self.field}:L2log"
        if self.family == "Lp":
            return f"{self.field}:L{self.p:g}"
        return f"{self.field}:{self.family}({self.s:g})"

    def evaluate(self, f):
        if self.family == "Hdot":
            return sp.sobolev_norm(f, self.s, homogeneous=True)
        if self.family == "H":
            return sp.sobolev_norm(f, self.s, homogeneous=False)
        if self.family == "B21":
            return lp.besov_norm(f, self.s, 1)
        if self.family == "hybrid":
            return lp.hybrid_norm(f, lp.HybridNormSpec(self.s, self.s2))
        if self.family == "L2log":
            return lp.l2log_norm(f)
        return sp.lp_norm(f, self.p)

    @classmethod
    def parse(cls, text):
        """Parse labels such as ``B:Hdot(-0.5)``, ``v:H(1)``, ``B:L2``, ``j:hybrid(1,0)``."""
        fld, rest = text.split(":", 1)
        if rest == "L2log":
            return cls(fld, "L2log")
        if rest.startswith("L") and "(" not in rest:
            return cls(fld, "Lp", p=float(rest[1:]))
        fam, args = rest.rstrip(")").split("(")
        vals = [float(a) for a in args.split(",")]
        if fam == "hybrid":
            return cls(fld, fam, vals[0], vals[1])
        return cls(fld, fam, vals[0])


@dataclass
class DiagnosticsRecord:
    t: float
    energy: float
    dissipation_v: float
    dissipation_j: float
    helicity: float
    cross_helicity: float
    ohm_iters: int = 0
    norms: dict = field(default_factory=dict)
    div_residuals: dict = field(default_factory=dict)

    def flat(self):
        """Flat mapping for CSV output (norms and divergences prefixed)."""
        row = {"schema_version": SCHEMA_VERSION}
        row.update({k: v for k, v in asdict(self).items() if k not in ("norms", "div_residuals")})
        for k in sorted(self.div_residuals):
            row[f"div_{k}"] = self.div_residuals[k]
        for k in sorted(self.norms):
            row[f"norm[{k}]"] = self.norms[k]
        return row

    def to_json(self):
        data = asdict(self)
        data["schema"] = SCHEMA_NAME
        data["schema_version"] = SCHEMA_VERSION
        return data


# -- helicity ----------------------------------------------------------------

def vector_potential(B):
    """Divergence-free, mean-free ``A`` with ``curl A = B``: ``A_hat = i xi x B_hat / |xi|^2``."""
    box = B.box
    if not sp._mean_is_zero(B.coeffs, box):
        raise NonzeroMeanMode("vector potential needs a mean-free B")
    scale = max(1.0, sp.sobolev_norm(B, 1.0))
    if sp.divergence_norm(B) > DIV_TOL * scale:
        raise NonSolenoidal("vector potential needs a divergence-free B")
    g = box.grid()
    inv = np.where(g.xi2_odd > 0, 1.0 / np.where(g.xi2_odd > 0, g.xi2_odd, 1.0), 0.0)
    return sp.SpectralField(box, sp.curl_coeffs(B.coeffs, box) * inv)


def magnetic_helicity(B):
    """``int A . B dx``."""
    return sp.inner(vector_potential(B), B)


def cross_helicity(v, B):
    return sp.inner(v, B)


def helicity_constant(B):
    """``|H(B)| / ||B||^2_{dot H^(-1/2)}`` (0 for the zero field)."""
    den = sp.sobolev_norm(B, -0.5) ** 2
    return abs(magnetic_helicity(B)) / den if den > 0 else 0.0


def ensure_current(state, p, m=None):
    """Return the Ohm current of ``state``, solving for it when not cached."""
    if state.j is not None:
        return state.j
    if state.variant in (Variant.HMHD, Variant.MHD):
        return sp.curl(state.B)
    Bt = state.B.copy()
    if any(p.B_star):
        Bt.coeffs[(slice(None),) + (0,) * state.box.d] += np.asarray(p.B_star)
    return solve_ohm_implicit(state.v, state.E, Bt, p, m=m).j


def helicity_rate(state, p):
    """Exact ``dH/dt`` at ``state``.

    Maxwell-coupled systems: ``-(2/sigma) <j, B>``. HMHD and MHD:
    ``-(2/sigma) <A, (-Delta)^beta B>``.
    """
    if state.variant in (Variant.HMHD, Variant.MHD):
        A = vector_potential(state.B)
        return -2.0 / p.sigma * sp.inner(A, sp.frac_laplacian(state.B, p.beta))
    vector_potential(state.B)  # validates B
    return -2.0 / p.sigma * sp.inner(ensure_current(state, p), state.B)


def helicity_rate_adjoint(state, p):
    """HMHD rate in the symmetric form ``-(2/sigma) <Lambda^beta A, Lambda^beta B>``."""
    A = vector_potential(state.B)
    half = p.beta / 2.0
    return -2.0 / p.sigma * sp.inner(sp.frac_laplacian(A, half), sp.frac_laplacian(state.B, half))


# -- records -----------------------------------------------------------------

def energy(state):
    """``1/2 ||(v, E, B)||^2_{L^2}``."""
    return 0.5 * sum(sp.l2_norm(f) ** 2 for f in state.fields().values())


def dissipation(state, p):
    """``(nu ||Lambda^alpha v||^2, j-dissipation)`` entering the energy balance."""
    dv = p.nu * sp.sobolev_norm(state.v, p.alpha) ** 2 if p.alpha else p.nu * sp.l2_norm(state.v) ** 2
    if state.variant in (Variant.HMHD, Variant.MHD):
        dj = sp.sobolev_norm(state.B, p.beta) ** 2 / p.sigma
    else:
        dj = sp.l2_norm(ensure_current(state, p)) ** 2 / p.sigma
    return dv, dj


def dedupe_specs(specs):
    seen, out = set(), []
    for spec in specs:
        if spec.label not in seen:
            seen.add(spec.label)
            out.append(spec)
    return out


def record(state, p, specs=()):
    """Evaluate a :class:`DiagnosticsRecord` (pure; ``state.j`` is reused when present)."""
    j = ensure_current(state, p)
    if state.j is None:
        state = state.copy()
        state.j = j
    dv, dj = dissipation(state, p)
    try:
        hel = magnetic_helicity(state.B)
    except (NonzeroMeanMode, NonSolenoidal):
        hel = float("nan")
    fields = dict(state.fields(), j=j)
    norms = {}
    for spec in dedupe_specs(specs):
        if spec.field in fields:
            norms[spec.label] = float(spec.evaluate(fields[spec.field]))
    divs = {k: sp.divergence_norm(f) for k, f in fields.items()}
    return DiagnosticsRecord(
        t=float(state.t), energy=energy(state), dissipation_v=float(dv), dissipation_j=float(dj),
        helicity=float(hel), cross_helicity=cross_helicity(state.v, state.B),
        ohm_iters=int(state.ohm_iters), norms=norms, div_residuals=divs,
    )


def recorder(specs=()):
    """Observer for :func:`nsmhall.dynamics.simulate` producing records."""
    specs = dedupe_specs(specs)
    return lambda state, p: record(state, p, specs)


# -- time-series checks ------------------------------------------------------

def _integrate(y, t):
    y, t = np.asarray(y, float), np.asarray(t, float)
    if len(t) >= 3:
        return float(simpson(y, x=t))
    return float(np.trapezoid(y, t))


def energy_balance_residual(records):
    """``|E(t1) - E(t0) + int (D_v + D_j) dt| / E(t0)`` with Simpson quadrature."""
    if len(records) < 2:
        raise ValueError("need at least two records")
    t = [r.t for r in records]
    diss = [r.dissipation_v + r.dissipation_j for r in records]
    num = abs(records[-1].energy - records[0].energy + _integrate(diss, t))
    if num == 0:
        return 0.0
    return num / max(records[0].energy, np.finfo(float).tiny)


def helicity_drift(records):
    """``|H(t) - H(0)|`` per record."""
    h0 = records[0].helicity
    return np.array([abs(r.helicity - h0) for r in records])
