"""Right-hand sides and time stepping for every system variant.

The state is advanced by a fourth-order integrating-factor Runge-Kutta scheme
(Lawson RK4). The linear part is propagated exactly per Fourier mode:

* velocity dissipation ``-nu |xi|^(2 alpha)`` (``alpha = 0`` gives ``-nu v``),
* magnetic dissipation ``-|xi|^(2 beta) / sigma`` for HMHD and MHD,
* for the Maxwell-coupled systems, the block
  ``dE/dt = c curl B - sigma c^2 E``, ``dB/dt = -c curl E``, whose transverse
  part is a damped rotation in the variables ``(E_perp, K B)`` with
  ``K = i xi_hat x`` and ``K^2 = P_perp``.

Everything else, including the Ohm's-law coupling beyond ``sigma c E``, is
treated explicitly. Pressure never appears: every velocity term is Leray
projected. All nonlinear terms are dealiased and restricted to the retained
set ``|xi| <= m``.
"""
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm

from . import kernels
from . import spectral as sp
from .errors import CflViolation, UnknownFamily
from .ohm import OhmSolveOptions, keep_mask, solve_ohm_lagged, solve_ohm_implicit
from .params import PhysicalParams, Variant

#: RK4 stability limit on the imaginary axis (about 2.83), rounded down
RK4_STABILITY = 2.8


def default_radius(box):
    """Default truncation radius: the 2/3-rule radius in physical units."""
    return box.dealias_kmax * box.k0


@dataclass
class SimState:
    """Fields of one system at time ``t``; ``E`` is ``None`` for HMHD and MHD."""

    variant: Variant
    t: float
    v: sp.SpectralField
    B: sp.SpectralField
    E: sp.SpectralField = None
    j: sp.SpectralField = None
    ohm_iters: int = 0

    @property
    def box(self):
        return self.v.box

    def fields(self):
        out = {"v": self.v, "B": self.B}
        if self.E is not None:
            out["E"] = self.E
        return out

    def copy(self):
        cp = lambda f: None if f is None else f.copy()  # noqa: E731
        return SimState(self.variant, self.t, self.v.copy(), self.B.copy(), cp(self.E),
                        cp(self.j), self.ohm_iters)


@dataclass(frozen=True)
class StepperConfig:
    """Fixed-step integrator settings.

    ``m`` is the truncation radius (``None`` selects :func:`default_radius`).
    ``nonlinear=False`` freezes all explicit terms, leaving the exact linear
    propagation. ``ohm_mode`` chooses the implicit or the lagged Ohm law.
    """

    dt: float
    cfl_safety: float = 1.0
    m: float = None
    nonlinear: bool = True
    ohm: OhmSolveOptions = field(default_factory=OhmSolveOptions)
    ohm_mode: str = "implicit"
    check_cfl: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.ohm_mode not in ("implicit", "lagged"):
            raise ValueError(f"unknown ohm_mode {self.ohm_mode!r}")


@dataclass
class Derivative:
    """Explicit part of the time derivative plus by-products of its evaluation."""

    dv: np.ndarray
    dE: np.ndarray
    dB: np.ndarray
    j: np.ndarray
    ohm_iters: int = 0
    sup_v: float = 0.0
    sup_B: float = 0.0


def maxwell_propagator(box, sigma, c, h):
    """Per-mode coefficients of ``exp(h L)`` for the (E, B) block.

    Returns ``(p11, p12, p21, p22, edamp)`` arrays over the grid where
    ``[[p11, p12], [p21, p22]] = expm(h [[-a, w], [-w, 0]])``, ``a = sigma c^2``,
    ``w = c |xi|``, and ``edamp = exp(-a h)`` acts on the longitudinal part of E.
    """
    kmag = box.grid().kmag
    a = sigma * c * c
    omega = c * kmag
    uniq, inv = np.unique(omega, return_inverse=True)
    mats = np.zeros((uniq.size, 2, 2))
    mats[:, 0, 0] = -a
    mats[:, 0, 1] = uniq
    mats[:, 1, 0] = -uniq
    phi = expm(h * mats)
    blocks = [phi[:, r, s][inv].reshape(kmag.shape) for r in (0, 1) for s in (0, 1)]
    edamp = np.full(kmag.shape, np.exp(-a * h))
    return (*blocks, edamp)


class Integrator:
    """Integrating-factor RK4 for one variant, box and time step."""

    def __init__(self, box, params, cfg):
        self.box = box
        self.p = params
        self.cfg = cfg
        self.variant = params.variant
        self.m = default_radius(box) if cfg.m is None else cfg.m
        self.keep = keep_mask(box, self.m)
        self.maxwell = self.variant.has_electric_field
        self.kmax = float(box.grid().kmag[self.keep].max()) if self.keep.any() else 0.0
        self._build(cfg.dt)

    # -- linear part -----------------------------------------------------
    def _build(self, h):
        box, p = self.box, self.p
        self._lin = {}
        for key, step in (("half", 0.5 * h), ("full", h)):
            ev = np.exp(-p.nu * step * sp.fractional_symbol(box, p.alpha))
            if self.maxwell:
                blk = maxwell_propagator(box, p.sigma, p.c, step)
                eb = None
            else:
                blk = None
                eb = np.exp(-step * sp.fractional_symbol(box, p.beta) / p.sigma)
            self._lin[key] = (ev, eb, blk)

    def linear(self, U, key):
        """Apply ``exp(L h)`` (``key='full'``) or ``exp(L h/2)`` (``'half'``) to ``U = (v, E, B)``."""
        v, E, B = U
        ev, eb, blk = self._lin[key]
        if self.maxwell:
            E2, B2 = kernels.maxwell_apply(E, B, self.box.grid().xhat, *blk)
            return (ev * v, E2, B2)
        return (ev * v, None, eb * B)

    # -- explicit part ---------------------------------------------------
    def _b_total(self, B):
        if not any(self.p.B_star):
            return B
        Bt = B.copy()
        Bt[(slice(None),) + (0,) * self.box.d] += np.asarray(self.p.B_star)
        return Bt

    def nonlinear(self, U, j_prev=None):
        """Explicit derivative at ``U``; ``j_prev`` feeds the lagged Ohm law."""
        box, p, keep = self.box, self.p, self.keep
        v, E, B = U
        zero = np.zeros_like(v)
        if not self.cfg.nonlinear:
            j = p.sigma * p.c * E if self.maxwell else sp.curl_coeffs(B, box)
            return Derivative(zero, None if E is None else np.zeros_like(E), zero.copy(), j)
        dm = box.grid().dealias
        Bt = self._b_total(B)
        vf, Ef, Bf = (sp.SpectralField(box, a) for a in (v, E if E is not None else zero, Bt))
        vphys = sp.inverse(v * dm, box)
        Bphys = sp.inverse(Bt * dm, box)
        adv = sp.advect(vf, vf).coeffs
        iters = 0
        if self.maxwell:
            if self.cfg.ohm_mode == "lagged":
                jp = sp.SpectralField(box, zero if j_prev is None else j_prev)
                j = solve_ohm_lagged(vf, Ef, sp.SpectralField(box, Bt), jp, p, self.m).coeffs
                iters = 1
            else:
                res = solve_ohm_implicit(vf, Ef, sp.SpectralField(box, Bt), p, self.cfg.ohm, self.m)
                j, iters = res.j.coeffs, res.iterations
            jxb = sp.forward(kernels.cross3(sp.inverse(j * dm, box), Bphys), box)
            dv = sp.leray_coeffs((jxb - adv) * keep, box)
            dE = -p.c * (j - p.sigma * p.c * E)
            dB = np.zeros_like(B)
        elif self.variant is Variant.HMHD:
            j = sp.curl_coeffs(B, box)
            jphys = sp.inverse(j * dm, box)
            jxb = sp.forward(kernels.cross3(jphys, Bphys), box)
            vxb = sp.forward(kernels.cross3(vphys, Bphys), box)
            dv = sp.leray_coeffs((jxb - adv) * keep, box)
            dB = sp.curl_coeffs((vxb - (p.kappa / p.sigma) * jxb) * keep, box)
            dE = None
        else:  # MHD
            j = sp.curl_coeffs(B, box)
            bf = sp.SpectralField(box, B)
            bgb = sp.advect(bf, bf).coeffs
            bgv = sp.advect(bf, vf).coeffs
            vgb = sp.advect(vf, bf).coeffs
            dv = sp.leray_coeffs((bgb - adv) * keep, box)
            dB = sp.leray_coeffs((bgv - vgb) * keep, box)
            dE = None
        sup_v = float(np.sqrt((vphys ** 2).sum(axis=0)).max())
        sup_b = float(np.sqrt((Bphys ** 2).sum(axis=0)).max())
        return Derivative(dv, dE, dB, j, iters, sup_v, sup_b)

    # -- stepping --------------------------------------------------------
    def cfl_rate(self, sup_v, sup_b):
        """Largest explicit frequency estimate for the current amplitudes."""
        p, k = self.p, self.kmax
        rate = k * (sup_v + sup_b)
        if self.maxwell:
            rate += p.sigma * sup_b ** 2 + p.sigma * p.c * sup_b + p.sigma * p.c ** 2 * p.kappa * sup_b
        elif self.variant is Variant.HMHD:
            rate += p.kappa * k * k * sup_b / p.sigma
        return rate

    def check_cfl(self, k1):
        if not self.cfg.check_cfl or not self.cfg.nonlinear:
            return
        rate = self.cfl_rate(k1.sup_v, k1.sup_B)
        if self.cfg.dt * rate > RK4_STABILITY * self.cfg.cfl_safety:
            raise CflViolation(
                f"dt={self.cfg.dt:g} exceeds the explicit bound "
                f"{RK4_STABILITY * self.cfg.cfl_safety / rate:.3g}"
            )

    @staticmethod
    def _axpy(a, x, y):
        """``a * x + y`` over state tuples (``None`` entries pass through)."""
        return tuple(None if yi is None else a * xi + yi for xi, yi in zip(x, y))

    def _tuple(self, d):
        return (d.dv, d.dE, d.dB)

    def _project(self, U):
        v, E, B = U
        box, keep = self.box, self.keep
        v = sp.leray_coeffs(v * keep, box)
        B = sp.leray_coeffs(B * keep, box)
        if E is not None:
            E = E * keep
            if self.variant.solenoidal_e:
                E = sp.leray_coeffs(E, box)
        return (v, E, B)

    def step_arrays(self, U, k1=None, j_prev=None):
        """One Lawson RK4 step on raw coefficient tuples; returns ``(U_next, k1)``."""
        h = self.cfg.dt
        if k1 is None:
            k1 = self.nonlinear(U, j_prev)
        self.check_cfl(k1)
        jp = k1.j
        t1 = self._tuple(k1)
        ua = self.linear(self._axpy(0.5 * h, t1, U), "half")
        k2 = self._tuple(self.nonlinear(ua, jp))
        uh = self.linear(U, "half")
        k3 = self._tuple(self.nonlinear(self._axpy(0.5 * h, k2, uh), jp))
        uf = self.linear(uh, "half")
        k4 = self._tuple(self.nonlinear(self._axpy(h, self.linear(k3, "half"), uf), jp))
        e1 = self.linear(t1, "full")
        mid = self.linear(tuple(None if a is None else a + b for a, b in zip(k2, k3)), "half")
        out = []
        for u, a, b, c in zip(uf, e1, mid, k4):
            out.append(None if u is None else u + (h / 6.0) * (a + 2.0 * b + c))
        return self._project(tuple(out)), k1

    def state_arrays(self, state):
        return (state.v.coeffs, None if state.E is None else state.E.coeffs, state.B.coeffs)

    def wrap(self, U, t, d=None):
        box = self.box
        v, E, B = U
        mk = lambda a: None if a is None else sp.SpectralField(box, a)  # noqa: E731
        return SimState(self.variant, t, mk(v), mk(B), mk(E),
                        None if d is None else mk(d.j), 0 if d is None else d.ohm_iters)

    def derivative(self, state):
        return self.nonlinear(self.state_arrays(state), None if state.j is None else state.j.coeffs)

    def step(self, state, k1=None):
        U, _ = self.step_arrays(self.state_arrays(state), k1,
                                None if state.j is None else state.j.coeffs)
        return self.wrap(U, state.t + self.cfg.dt)


def rhs(state, p, m=None, ohm_opts=None, ohm_mode="implicit"):
    """Full time derivative ``(dv/dt, dE/dt, dB/dt)`` as spectral fields, plus ``j``.

    Returns a dict with keys ``v``, ``E`` (``None`` for HMHD/MHD), ``B`` and ``j``.
    """
    cfg = StepperConfig(dt=1.0, m=m, ohm=ohm_opts or OhmSolveOptions(), ohm_mode=ohm_mode,
                        check_cfl=False)
    integ = Integrator(state.box, p, cfg)
    U = integ.state_arrays(state)
    d = integ.derivative(state)
    box = state.box
    v, E, B = U
    lin_v = -p.nu * sp.fractional_symbol(box, p.alpha) * v
    if integ.maxwell:
        dE = p.c * sp.curl_coeffs(B, box) - p.sigma * p.c ** 2 * E + d.dE
        dB = -p.c * sp.curl_coeffs(E, box) + d.dB
    else:
        dE = None
        dB = -sp.fractional_symbol(box, p.beta) / p.sigma * B + d.dB
    mk = lambda a: None if a is None else sp.SpectralField(box, a)  # noqa: E731
    return {"v": mk(lin_v + d.dv), "E": mk(dE), "B": mk(dB), "j": mk(d.j), "ohm_iters": d.ohm_iters}


def step(state, p, cfg):
    """Advance ``state`` by ``cfg.dt``."""
    return Integrator(state.box, p, cfg).step(state)


def _n_steps(t0, t_final, dt):
    span = t_final - t0
    if span < 0:
        raise ValueError("T_final precedes the initial time")
    n = int(round(span / dt))
    if abs(n * dt - span) > 1e-9 * max(1.0, abs(span)):
        raise ValueError(f"T_final - t0 = {span} is not a multiple of dt = {dt}")
    return n


def simulate(initial, p, cfg, t_final, observers=(), cadence=1, integrator=None, callback=None):
    """March ``initial`` to ``t_final`` with fixed steps.

    Each observer is called as ``observer(state, params)`` at ``t0`` and after
    every ``cadence`` steps (and at the final step); the state passed in carries
    the Ohm current ``j`` of that instant. Returns ``(records, final_state)``
    where ``records`` holds one list per observer (a flat list if there is one
    observer). ``T_final == t0`` returns empty records and the unchanged state.
    """
    n = _n_steps(initial.t, t_final, cfg.dt)
    observers = list(observers)
    records = [[] for _ in observers]
    if n == 0:
        return (records[0] if len(observers) == 1 else records), initial
    integ = integrator or Integrator(initial.box, p, cfg)
    U = integ.state_arrays(initial)
    j_prev = None if initial.j is None else initial.j.coeffs
    k1 = integ.nonlinear(U, j_prev)
    t0 = initial.t

    def observe(U, t, d):
        st = integ.wrap(U, t, d)
        for rec, obs in zip(records, observers):
            rec.append(obs(st, p))

    observe(U, t0, k1)
    for i in range(1, n + 1):
        U, _ = integ.step_arrays(U, k1)
        t = t0 + i * cfg.dt
        k1 = integ.nonlinear(U, k1.j)
        if i % cadence == 0 or i == n:
            observe(U, t, k1)
        if callback is not None:
            callback(i, integ.wrap(U, t, k1))
    final = integ.wrap(U, t0 + n * cfg.dt, k1)
    return (records[0] if len(observers) == 1 else records), final


# -- initial data ------------------------------------------------------------

def xs_norm_sq(v, E, B, s):
    """``||v||^2_{H^(s-1)} + ||E||^2_{H^s} + ||B||^2_{H^s}`` (inhomogeneous)."""
    total = sp.sobolev_norm(v, s - 1, homogeneous=False) ** 2
    total += sp.sobolev_norm(B, s, homogeneous=False) ** 2
    if E is not None:
        total += sp.sobolev_norm(E, s, homogeneous=False) ** 2
    return total


def _beltrami(box, handedness=1):
    """Unit Beltrami field: ``curl B = -B`` in 2D, ``curl B = handedness * B`` (ABC) in 3D."""
    x = box.coordinates()
    if box.d == 2:
        return sp.SpectralField.from_physical(
            box, np.array([np.sin(x[1]), np.zeros_like(x[0]), np.cos(x[1])])
        )
    a, b, c = 1.0, 0.8, 0.6
    X, Y, Z = x
    if handedness >= 0:
        f = [a * np.sin(Z) + c * np.cos(Y), b * np.sin(X) + a * np.cos(Z),
             c * np.sin(Y) + b * np.cos(X)]
    else:  # mirror image in x3
        f = [-a * np.sin(Z) + c * np.cos(Y), b * np.sin(X) + a * np.cos(Z),
             -c * np.sin(Y) - b * np.cos(X)]
    return sp.SpectralField.from_physical(box, np.array(f))


def _single_mode(box, k):
    """``cos(k . x) a`` with a unit polarization ``a`` orthogonal to ``k``."""
    k = np.asarray(list(k) + [0] * (3 - len(k)), dtype=float)
    kk = k[: box.d]
    khat = k / np.linalg.norm(k)
    ref = np.array([0.0, 0.0, 1.0]) if abs(khat[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    pol = np.cross(ref, khat)
    pol /= np.linalg.norm(pol)
    x = box.coordinates()
    phase = np.tensordot(kk * box.k0, x, axes=(0, 0))
    return sp.SpectralField.from_physical(box, pol.reshape((3,) + (1,) * box.d) * np.cos(phase)[None])


def make_initial(family, box, variant, amplitude=1.0, seed=0, s=None, kmax=None, slope=None,
                 perturb=0.0, m=None, handedness=1, mode=(1, 0, 0), fields=("v", "E", "B")):
    """Build an initial :class:`SimState`.

    Families
    --------
    ``random``
        Band-limited (``|xi| <= kmax``) solenoidal random v, E, B scaled so the
        ``X^s = H^(s-1) x H^s x H^s`` norm equals ``amplitude``.
    ``beltrami``
        ``B = amplitude * Beltrami``, ``v = E = 0``, optionally plus a random
        solenoidal perturbation of L^2 size ``perturb`` in v and B.
    ``single_mode``
        ``amplitude * cos(k . x) a`` with ``a`` orthogonal to ``mode``, in the
        fields listed in ``fields``.

    Mean modes are zero and every field is projected and restricted to the
    retained set. The same ``seed`` always yields a bit-identical state.
    """
    if not amplitude > 0:
        raise ValueError("amplitude must be positive")
    variant = Variant(variant)
    rng = np.random.default_rng(seed)
    s = box.d / 2 + 1.5 if s is None else s
    radius = default_radius(box) if m is None else m
    keep = keep_mask(box, radius)
    has_e = variant.has_electric_field

    def clean(f):
        c = sp.leray_coeffs(f.coeffs * keep, box)
        c[(slice(None),) + (0,) * box.d] = 0.0
        return sp.SpectralField(box, c)

    zero = sp.SpectralField.zeros(box)
    if family == "random":
        kcut = kmax if kmax is not None else radius / 2
        sl = s + 0.5 if slope is None else slope
        v = clean(sp.random_field(box, rng, kmax=kcut, slope=sl - 1))
        E = clean(sp.random_field(box, rng, kmax=kcut, slope=sl))
        B = clean(sp.random_field(box, rng, kmax=kcut, slope=sl))
        if not has_e:
            E = None
        scale = amplitude / np.sqrt(xs_norm_sq(v, E, B, s))
        v, B = v * scale, B * scale
        E = None if E is None else E * scale
    elif family == "beltrami":
        B = clean(_beltrami(box, handedness) * amplitude)
        v = zero.copy()
        E = zero.copy() if has_e else None
        if perturb:
            dv = clean(sp.random_field(box, rng, kmax=kmax or radius / 2, slope=2.0))
            dB = clean(sp.random_field(box, rng, kmax=kmax or radius / 2, slope=2.0))
            v = v + dv * (perturb / sp.l2_norm(dv))
            B = B + dB * (perturb / sp.l2_norm(dB))
    elif family == "single_mode":
        base = clean(_single_mode(box, mode) * amplitude)
        v = base.copy() if "v" in fields else zero.copy()
        B = base.copy() if "B" in fields else zero.copy()
        E = (base.copy() if "E" in fields else zero.copy()) if has_e else None
    else:
        raise UnknownFamily(family)
    return SimState(variant, 0.0, v, B, E)


def with_variant(state, variant):
    """Reinterpret a state for another variant (drops or zero-fills E)."""
    variant = Variant(variant)
    E = state.E
    if variant.has_electric_field and E is None:
        E = sp.SpectralField.zeros(state.box)
    if not variant.has_electric_field:
        E = None
    return SimState(variant, state.t, state.v.copy(), state.B.copy(),
                    None if E is None else E.copy())


__all__ = [
    "SimState", "StepperConfig", "Integrator", "Derivative", "PhysicalParams", "Variant",
    "maxwell_propagator", "rhs", "step", "simulate", "make_initial", "with_variant",
    "xs_norm_sq", "default_radius", "replace",
]
