"""Sharp-cutoff Littlewood-Paley decomposition on the periodic box.

Shell ``q`` holds the modes with ``2^(q-1) <= |xi| < 2^q``; the mean mode
belongs to no shell. Paraproducts act componentwise (``f_i g_i``) and every
product is dealiased, so the Bony decomposition holds to roundoff.

The second half of the module measures the constants of the appendix
inequalities (paraproduct bounds, Bernstein, heat-semigroup envelope and
maximal regularity) on random inputs.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import spectral as sp
from .errors import DegenerateRHS

#: lower and upper annulus radii of shell q, in units of 2^q
SHELL_C1 = 0.5
SHELL_C2 = 1.0
#: smallest right-hand side accepted by the inequality checks
RHS_FLOOR = 1e-200


@lru_cache(maxsize=32)
def shell_index(box):
    """Integer shell index per mode; the mean mode gets the sentinel ``-10**6``."""
    kmag = box.grid().kmag
    q = np.full(kmag.shape, -(10 ** 6), dtype=np.int64)
    nz = kmag > 0
    q[nz] = np.floor(np.log2(kmag[nz]) + 1e-12).astype(np.int64) + 1
    q.setflags(write=False)
    return q


def occupied_shells(box):
    q = shell_index(box)
    return [int(v) for v in np.unique(q[box.grid().kmag > 0])]


def _shell_mask(box, q):
    return shell_index(box) == q


def _low_mask(box, j):
    """Modes in shells ``<= j - 1`` (mean excluded)."""
    q = shell_index(box)
    return (q <= j - 1) & (box.grid().kmag > 0)


def _mul(a, b, box):
    """Dealiased pointwise product of two coefficient arrays of equal shape."""
    mask = box.grid().dealias
    out = sp.forward(sp.inverse(a * mask, box) * sp.inverse(b * mask, box), box)
    out *= mask
    return out


def _coeffs_pair(f, g):
    sp.same_box(f, g)
    return f.coeffs, g.coeffs, f.box


# -- blocks ------------------------------------------------------------------

def dyadic_block(f, q):
    """``Delta_q f``: sharp restriction to shell ``q``."""
    return sp.SpectralField(f.box, f.coeffs * _shell_mask(f.box, q))


def low_cutoff(f, j):
    """``S_j f = sum_{q <= j-1} Delta_q f``."""
    return sp.SpectralField(f.box, f.coeffs * _low_mask(f.box, j))


def mean_free(f):
    g = f.copy()
    g.coeffs[(slice(None),) + (0,) * f.box.d] = 0.0
    return g


def _t_coeffs(a, b, box):
    out = np.zeros_like(a)
    for j in occupied_shells(box):
        low = a * _low_mask(box, j - 1)
        if not low.any():
            continue
        blk = b * _shell_mask(box, j)
        if blk.any():
            out += _mul(low, blk, box)
    return out


def _r_coeffs(a, b, box):
    out = np.zeros_like(a)
    q = shell_index(box)
    for j in occupied_shells(box):
        fa = a * (q == j)
        if not fa.any():
            continue
        near = b * ((q >= j - 1) & (q <= j + 1))
        if near.any():
            out += _mul(fa, near, box)
    return out


def paraproduct_T(f, g):
    """``T_f g = sum_j S_{j-1} f Delta_j g`` (componentwise, dealiased)."""
    a, b, box = _coeffs_pair(f, g)
    return sp.SpectralField(box, _t_coeffs(a, b, box))


def remainder_R(f, g):
    """``R(f, g) = sum_j Delta_j f (Delta_{j-1} + Delta_j + Delta_{j+1}) g``."""
    a, b, box = _coeffs_pair(f, g)
    return sp.SpectralField(box, _r_coeffs(a, b, box))


def product(f, g):
    """Dealiased componentwise product ``f_i g_i``."""
    a, b, box = _coeffs_pair(f, g)
    return sp.SpectralField(box, _mul(a, b, box))


def bony_residual(f, g):
    """``||T_f g + T_g f + R(f, g) - f~ g~||_{L^2}`` with ``f~, g~`` mean-free."""
    ff, gg = mean_free(f), mean_free(g)
    total = paraproduct_T(ff, gg) + paraproduct_T(gg, ff) + remainder_R(ff, gg)
    return sp.l2_norm(total - product(ff, gg))


# -- norms -------------------------------------------------------------------

def _shell_l2_sq(coeffs, box):
    """Map shell -> ``||Delta_q f||^2_{L^2}`` for a coefficient array."""
    q = shell_index(box)
    power = np.abs(coeffs) ** 2
    if power.ndim > len(box.shape):
        power = power.reshape((-1,) + box.shape).sum(axis=0)
    return {j: box.volume * float(power[q == j].sum()) for j in occupied_shells(box)}


def shell_norms(f, p=2):
    """``{q: ||Delta_q f||_{L^p}}`` over occupied shells; ``p`` is 2 or ``inf``."""
    if p == 2:
        return {q: np.sqrt(v) for q, v in _shell_l2_sq(f.coeffs, f.box).items()}
    return {q: sp.lp_norm(dyadic_block(f, q), p) for q in occupied_shells(f.box)}


def _lsum(terms, p_sum):
    terms = np.asarray(list(terms), dtype=float)
    if terms.size == 0:
        return 0.0
    if np.isinf(p_sum):
        return float(terms.max())
    return float((terms ** p_sum).sum() ** (1.0 / p_sum))


def besov_norm(f, s, p_sum=2, p_space=2):
    """``|| (2^{qs} ||Delta_q f||_{L^p_space})_q ||_{l^p_sum}``."""
    norms = shell_norms(f, p_space)
    return _lsum((2.0 ** (q * s) * v for q, v in norms.items()), p_sum)


@dataclass(frozen=True)
class HybridNormSpec:
    """Exponent ``s1`` on shells ``q <= 0`` and ``s2`` on shells ``q > 0``."""

    s1: float
    s2: float


def hybrid_norm(f, spec):
    sq = _shell_l2_sq(f.coeffs, f.box)
    total = sum(2.0 ** (2 * q * (spec.s1 if q <= 0 else spec.s2)) * v for q, v in sq.items())
    return float(np.sqrt(total))


def l2log_norm(f):
    sq = _shell_l2_sq(f.coeffs, f.box)
    return float(np.sqrt(sum((1.0 if q <= 0 else float(q)) * v for q, v in sq.items())))


def heat_symbol(box, t, nu, alpha):
    return np.exp(-nu * t * sp.fractional_symbol(box, alpha))


def heat_semigroup(f, t, nu, alpha):
    """``exp(-t nu (-Delta)^alpha) f``."""
    if t < 0:
        raise ValueError("heat semigroup needs t >= 0")
    return sp.SpectralField(f.box, f.coeffs * heat_symbol(f.box, t, nu, alpha))


# -- random inputs -----------------------------------------------------------

def random_scalar(box, rng, slope=0.0, kmax=None):
    """Real random scalar (component 0 only), mean-free and band-limited."""
    return sp.random_field(box, rng, kmax=kmax, slope=slope, solenoidal=False, components=1)


def random_shell_field(box, q, rng, components=1):
    """Random real field supported in shell ``q``."""
    f = sp.random_field(box, rng, solenoidal=False, components=components)
    return dyadic_block(f, q)


# -- inequality verification -------------------------------------------------

@dataclass
class InequalityRow:
    trial: int
    name: str
    lhs: float
    rhs: float
    ratio: float
    status: str = "ok"


@dataclass
class LemmaReport:
    """Rows of individual checks plus the per-inequality maximum ratio."""

    rows: list = field(default_factory=list)
    max_ratio: dict = field(default_factory=dict)
    discarded: list = field(default_factory=list)

    def add(self, row):
        self.rows.append(row)
        if row.status == "ok":
            self.max_ratio[row.name] = max(self.max_ratio.get(row.name, 0.0), row.ratio)

    def csv_rows(self):
        return [
            {"trial": r.trial, "inequality": r.name, "lhs": r.lhs, "rhs": r.rhs,
             "ratio": r.ratio, "status": r.status}
            for r in self.rows
        ]


def _ratio(lhs, rhs):
    if not rhs > RHS_FLOOR:
        raise DegenerateRHS(f"right-hand side {rhs!r} underflowed")
    return lhs / rhs


def _time_norm(values, dt, p):
    values = np.asarray(values, dtype=float)
    if np.isinf(p):
        return float(values.max())
    return float((dt * (values ** p).sum()) ** (1.0 / p))


PARAPRODUCT_INEQUALITIES = ("para1", "para2", "para3", "para4", "para5", "para6")


def paraproduct_terms(f_path, g_path, dt, s):
    """Left and right sides of the six paraproduct estimates for piecewise-constant paths.

    ``f_path`` and ``g_path`` are lists of fields, one per time slice of length
    ``dt``. Time norms are exact for piecewise-constant paths.
    """
    hyb = HybridNormSpec(1.0, 0.0)
    cols = {k: [] for k in ("s2r_l2", "tfg", "tgf", "hir_b", "s2r_hs", "hir_bs",
                            "f_l2", "g_l2", "g_h10", "f_log", "g_log", "g_hs")}
    for f, g in zip(f_path, g_path):
        r = remainder_R(f, g)
        low = low_cutoff(r, 2)
        high = r - low
        high = mean_free(high)
        cols["s2r_l2"].append(sp.l2_norm(low))
        cols["tfg"].append(besov_norm(paraproduct_T(f, g), -1.0, 1))
        cols["tgf"].append(besov_norm(paraproduct_T(g, f), -1.0, 1))
        cols["hir_b"].append(besov_norm(high, -1.0, 1))
        cols["s2r_hs"].append(sp.sobolev_norm(low, s - 1.0))
        cols["hir_bs"].append(besov_norm(high, s - 1.0, 1))
        cols["f_l2"].append(sp.l2_norm(f))
        cols["g_l2"].append(sp.l2_norm(g))
        cols["g_h10"].append(hybrid_norm(g, hyb))
        cols["f_log"].append(l2log_norm(f))
        cols["g_log"].append(l2log_norm(g))
        cols["g_hs"].append(sp.sobolev_norm(g, s))
    tn = lambda key, p: _time_norm(cols[key], dt, p)  # noqa: E731
    inf = np.inf
    return {
        "para1": (tn("s2r_l2", 1), tn("f_l2", 2) * tn("g_h10", 2)),
        "para2": (tn("tfg", 2), tn("f_l2", 2) * tn("g_l2", inf)),
        "para3": (tn("tgf", 2), tn("f_l2", 2) * tn("g_l2", inf)),
        "para4": (tn("hir_b", 2), tn("f_log", 2) * tn("g_log", inf)),
        "para5": (tn("s2r_hs", 1), tn("f_l2", 2) * tn("g_hs", 2)),
        "para6": (tn("hir_bs", 2), tn("f_l2", 2) * tn("g_hs", inf)),
    }


def verify_paraproduct_lemma(trials, box, seed=0, s=1.5, n_slices=4, horizon=1.0,
                             f_slope=1.0, g_slope=None, paths=None):
    """Measure LHS/RHS of the six paraproduct estimates over random space-time paths.

    ``paths`` may supply explicit ``(f_path, g_path)`` pairs instead of random
    ones. Trials whose right-hand side underflows are discarded and listed in
    ``report.discarded``; all-zero inputs are reported as skipped.
    """
    if box.d != 2:
        raise ValueError("the paraproduct estimates are two-dimensional")
    if s <= 1:
        raise ValueError("s must exceed 1")
    rng = np.random.default_rng(seed)
    g_slope = s + 1.0 if g_slope is None else g_slope
    dt = horizon / n_slices
    report = LemmaReport()
    if paths is None:
        paths = []
        for _ in range(trials):
            amp_f = rng.uniform(0.2, 1.0, n_slices)
            amp_g = rng.uniform(0.2, 1.0, n_slices)
            paths.append((
                [a * random_scalar(box, rng, f_slope) for a in amp_f],
                [a * random_scalar(box, rng, g_slope) for a in amp_g],
            ))
    for trial, (fp, gp) in enumerate(paths):
        if all(not f.coeffs.any() for f in fp) and all(not g.coeffs.any() for g in gp):
            for name in PARAPRODUCT_INEQUALITIES:
                report.add(InequalityRow(trial, name, 0.0, 0.0, float("nan"), "skipped"))
            continue
        terms = paraproduct_terms(fp, gp, dt, s)
        for name in PARAPRODUCT_INEQUALITIES:
            lhs, rhs = terms[name]
            try:
                ratio = _ratio(lhs, rhs)
            except DegenerateRHS:
                report.discarded.append((trial, name))
                report.add(InequalityRow(trial, name, lhs, rhs, float("nan"), "degenerate"))
                continue
            report.add(InequalityRow(trial, name, lhs, rhs, ratio))
    return report


def bernstein_ratios(box, shells, trials, seed=0):
    """Max over random shell fields of ``||u||_inf / (2^{qd/2} ||u||_2)`` and ``||u||_2 / (2^{qd/2} ||u||_1)``."""
    rng = np.random.default_rng(seed)
    out = {}
    for q in shells:
        r_inf, r_one = 0.0, 0.0
        w = 2.0 ** (q * box.d / 2.0)
        for _ in range(trials):
            u = random_shell_field(box, q, rng)
            l2 = sp.l2_norm(u)
            if l2 == 0:
                break
            r_inf = max(r_inf, sp.lp_norm(u, np.inf) / (w * l2))
            r_one = max(r_one, l2 / (w * sp.lp_norm(u, 1)))
        out[q] = (r_inf, r_one)
    return out


@dataclass
class EnvelopeFit:
    q: int
    p: float
    c3: float
    c4: float
    taus: np.ndarray
    ratios: np.ndarray


def heat_envelope(box, q, p=2, alpha=1.0, nu=1.0, taus=None, trials=20, seed=0, fit_from=None):
    """Fit ``max ratio ||S(t)u||_p / ||u||_p <= C4 exp(-C3 tau)``, ``tau = nu t 2^{2 alpha q}``.

    The fit is a least-squares line through ``log(ratio)`` over ``tau >= fit_from``.
    """
    taus = np.linspace(0.0, 40.0, 41) if taus is None else np.asarray(taus, dtype=float)
    fit_from = taus[len(taus) // 2] if fit_from is None else fit_from
    rng = np.random.default_rng(seed)
    lam = 2.0 ** q
    ratios = np.zeros_like(taus)
    for _ in range(trials):
        u = random_shell_field(box, q, rng)
        base = sp.lp_norm(u, p)
        for i, tau in enumerate(taus):
            t = tau / (nu * lam ** (2 * alpha))
            ratios[i] = max(ratios[i], sp.lp_norm(heat_semigroup(u, t, nu, alpha), p) / base)
    sel = (taus >= fit_from) & (ratios > 0)
    slope, intercept = np.polyfit(taus[sel], np.log(ratios[sel]), 1)
    return EnvelopeFit(q, p, float(-slope), float(np.exp(intercept)), taus, ratios)


def _besov_time_l2(box, w_start, f_piece, h, nu, alpha, sigma):
    """``int_0^h ||w(t)||^2_{B^sigma_{2,2}} dt`` for constant forcing on one interval (exact)."""
    lam = nu * sp.fractional_symbol(box, alpha)
    q = shell_index(box)
    nz = box.grid().kmag > 0
    weight = np.where(nz, 2.0 ** (2.0 * sigma * np.where(nz, q, 0)), 0.0)
    lam_s = np.where(lam > 0, lam, 1.0)
    b = np.where(lam > 0, f_piece / lam_s, 0.0)
    a = w_start - b
    e1 = np.where(lam > 0, -np.expm1(-lam * h) / lam_s, h)
    e2 = np.where(lam > 0, -np.expm1(-2 * lam * h) / (2 * lam_s), h)
    integ = (np.abs(b) ** 2 * h + 2 * np.real(np.conj(b) * a) * e1 + np.abs(a) ** 2 * e2)
    return box.volume * float((weight * integ).sum())


def forced_heat(box, w0, forcing, dt, nu, alpha):
    """Exact per-mode Duhamel solution with piecewise-constant forcing; returns the states at slice ends."""
    lam = nu * sp.fractional_symbol(box, alpha)
    decay = np.exp(-lam * dt)
    gain = np.where(lam > 0, -np.expm1(-lam * dt) / np.where(lam > 0, lam, 1.0), dt)
    w = w0.coeffs.copy()
    states = [w.copy()]
    for f in forcing:
        w = decay * w + gain * f.coeffs
        states.append(w.copy())
    return states


def maximal_regularity_ratio(box, w0, forcing, dt, nu=1.0, alpha=1.0, delta0=0.0):
    """LHS and RHS of the forced-heat estimate with ``p = q = m = r = 2`` and unit constants."""
    states = forced_heat(box, w0, forcing, dt, nu, alpha)
    sig_w = delta0 + 2 * alpha + alpha
    lhs_sq = sum(
        _besov_time_l2(box, states[i], forcing[i].coeffs, dt, nu, alpha, sig_w)
        for i in range(len(forcing))
    )
    f_norm = _time_norm([besov_norm(f, delta0 + alpha, 2) for f in forcing], dt, 2)
    w0_norm = besov_norm(w0, delta0 + 2 * alpha, 2)
    lhs = float(np.sqrt(lhs_sq))
    rhs = f_norm + w0_norm
    return lhs, rhs


def verify_maximal_regularity(box, trials=50, seed=0, n_slices=8, horizon=1.0, nu=1.0, alpha=1.0):
    """Ratios of the forced-heat estimate over random shell forcing and data."""
    rng = np.random.default_rng(seed)
    shells = [q for q in occupied_shells(box) if (shell_index(box) == q)[box.grid().dealias].any()]
    dt = horizon / n_slices
    report = LemmaReport()
    for trial in range(trials):
        forcing = [random_shell_field(box, int(rng.choice(shells)), rng) * rng.uniform(0, 1)
                   for _ in range(n_slices)]
        w0 = random_shell_field(box, int(rng.choice(shells)), rng) * rng.uniform(0, 1)
        lhs, rhs = maximal_regularity_ratio(box, w0, forcing, dt, nu, alpha)
        try:
            report.add(InequalityRow(trial, "max_regularity", lhs, rhs, _ratio(lhs, rhs)))
        except DegenerateRHS:
            report.discarded.append((trial, "max_regularity"))
    return report
