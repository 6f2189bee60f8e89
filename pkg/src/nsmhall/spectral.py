"""Periodic-box Fourier representation and spectral operators.

Fields are stored as full complex coefficient arrays of shape ``(3, n, ..., n)``
normalized so that ``f(x) = sum_k f_hat(k) exp(i xi.x)`` with ``xi = 2 pi k / L``.
Every field carries three value components; in ``d = 2`` the fields depend on
``(x1, x2)`` only and all ``d/dx3`` terms vanish.

Conventions
-----------
* ``||f||^2_{L^2} = L^d sum_k |f_hat(k)|^2``.
* Odd Fourier symbols (derivatives) drop the Nyquist index so that Hermitian
  symmetry survives differentiation.
* Quadratic products are dealiased with the 2/3 rule on a cube,
  ``|k_i| <= n // 3``, applied to both inputs and the output.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from . import kernels
from .errors import BoxMismatch, NegativePowerOnMeanMode

#: relative threshold below which a mean mode counts as zero
MEAN_TOL = 1e-13


@dataclass(frozen=True)
class BoxSpec:
    """Periodic box ``[0, L)^d`` sampled with ``n_per_axis`` points per axis."""

    d: int
    n_per_axis: int
    box_length: float = 2 * np.pi

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError(f"d must be 2 or 3, got {self.d}")
        if self.n_per_axis < 8 or self.n_per_axis % 2:
            raise ValueError(f"n_per_axis must be even and >= 8, got {self.n_per_axis}")
        if not self.box_length > 0:
            raise ValueError("box_length must be positive")

    @property
    def shape(self):
        return (self.n_per_axis,) * self.d

    @property
    def volume(self):
        return float(self.box_length) ** self.d

    @property
    def k0(self):
        """Smallest nonzero wavenumber ``2 pi / L``."""
        return 2 * np.pi / self.box_length

    @property
    def dealias_kmax(self):
        """Largest integer index retained by the 2/3 rule."""
        return self.n_per_axis // 3

    def grid(self):
        return _grid(self)

    def coordinates(self):
        """Physical grid coordinates, shape ``(d, n, ..., n)``."""
        x = np.arange(self.n_per_axis) * (self.box_length / self.n_per_axis)
        return np.array(np.meshgrid(*([x] * self.d), indexing="ij"))

    def to_dict(self):
        return {"d": self.d, "n_per_axis": self.n_per_axis, "box_length": self.box_length}


@dataclass(frozen=True)
class WaveGrid:
    """Cached wavenumber arrays for one box (all read-only)."""

    k: np.ndarray        # integer indices, (d, *shape)
    xi: np.ndarray       # odd-symbol wavevector, Nyquist zeroed, (3, *shape)
    kmag: np.ndarray     # |xi| from the full wavevector, (*shape)
    xhat: np.ndarray     # xi / |xi| (zero where xi = 0), (3, *shape)
    xi2_odd: np.ndarray  # |xi|^2 of the odd-symbol wavevector
    dealias: np.ndarray  # bool, 2/3 cube


def _readonly(a):
    a.setflags(write=False)
    return a


@lru_cache(maxsize=32)
def _grid(box):
    n, d = box.n_per_axis, box.d
    k1 = np.fft.fftfreq(n, 1.0 / n)
    k = np.array(np.meshgrid(*([k1] * d), indexing="ij"))
    xi_full = k * box.k0
    kmag = np.sqrt((xi_full ** 2).sum(axis=0))
    k_odd = np.where(np.abs(k) == n // 2, 0.0, k)
    xi = np.zeros((3,) + box.shape)
    xi[:d] = k_odd * box.k0
    xi2 = (xi ** 2).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        xhat = np.where(xi2 > 0, xi / np.sqrt(xi2), 0.0)
    dealias = np.all(np.abs(k) <= box.dealias_kmax, axis=0)
    return WaveGrid(*(_readonly(a) for a in (k.astype(np.int64), xi, kmag, xhat, xi2, dealias)))


def _unfold_half(half, n, d):
    """Rebuild a full Hermitian spectrum from an ``rfftn`` half spectrum."""
    lead = half.shape[: half.ndim - d]
    full = np.empty(lead + (n,) * d, dtype=np.complex128)
    h = n // 2
    full[..., : h + 1] = half
    other = tuple(range(half.ndim - d, half.ndim - 1))
    tail = half[..., h - 1 : 0 : -1]
    if other:
        tail = np.roll(np.flip(tail, axis=other), 1, axis=other)
    full[..., h + 1 :] = np.conj(tail)
    for plane in (0, h):
        sl = full[..., plane]
        refl = np.roll(np.flip(sl, axis=other), 1, axis=other) if other else sl
        full[..., plane] = 0.5 * (sl + np.conj(refl))
    return full


def forward(phys, box):
    """Physical samples ``(..., n, ..., n)`` to normalized coefficients."""
    d, n = box.d, box.n_per_axis
    axes = tuple(range(phys.ndim - d, phys.ndim))
    half = sfft.rfftn(phys, axes=axes) / n ** d
    return _unfold_half(half, n, d)


def inverse(coeffs, box):
    """Normalized coefficients to real physical samples."""
    d, n = box.d, box.n_per_axis
    axes = tuple(range(coeffs.ndim - d, coeffs.ndim))
    half = coeffs[..., : n // 2 + 1]
    return sfft.irfftn(half, s=box.shape, axes=axes) * n ** d


@dataclass
class SpectralField:
    """A real three-component field on a periodic box, stored by its coefficients."""

    box: BoxSpec
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != (3,) + self.box.shape:
            raise ValueError(
                f"coeffs shape {self.coeffs.shape} does not match box {(3,) + self.box.shape}"
            )

    @classmethod
    def zeros(cls, box):
        return cls(box, np.zeros((3,) + box.shape, dtype=np.complex128))

    @classmethod
    def from_physical(cls, box, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (3,) + box.shape:
            raise ValueError(f"expected physical shape {(3,) + box.shape}, got {values.shape}")
        return cls(box, forward(values, box))

    @classmethod
    def from_function(cls, box, func):
        """Sample ``func(x) -> (3, *shape)`` on the grid."""
        return cls.from_physical(box, np.asarray(func(box.coordinates())))

    @classmethod
    def constant(cls, box, vec):
        f = cls.zeros(box)
        f.coeffs[(slice(None),) + (0,) * box.d] = np.asarray(vec, dtype=float)
        return f

    def to_physical(self):
        return inverse(self.coeffs, self.box)

    def copy(self):
        return SpectralField(self.box, self.coeffs.copy())

    @property
    def mean(self):
        return self.coeffs[(slice(None),) + (0,) * self.box.d].copy()

    def _check(self, other):
        if not isinstance(other, SpectralField):
            return NotImplemented
        if other.box != self.box:
            raise BoxMismatch(f"{self.box} vs {other.box}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return SpectralField(self.box, self.coeffs + other.coeffs)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return SpectralField(self.box, self.coeffs - other.coeffs)

    def __neg__(self):
        return SpectralField(self.box, -self.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            return NotImplemented
        return SpectralField(self.box, self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return SpectralField(self.box, self.coeffs / scalar)


def same_box(*fields):
    box = fields[0].box
    for f in fields[1:]:
        if f.box != box:
            raise BoxMismatch(f"{box} vs {f.box}")
    return box


def _mean_is_zero(coeffs, box):
    mean = coeffs[(slice(None),) + (0,) * box.d]
    scale = max(1.0, float(np.abs(coeffs).max()))
    return float(np.abs(mean).max()) <= MEAN_TOL * scale


# -- linear operators --------------------------------------------------------

def truncation_mask(box, m):
    return box.grid().kmag <= m


def truncate(f, m):
    """Sharp Fourier cutoff ``T_m``: keep ``|xi| <= m``."""
    if not m > 0:
        raise ValueError("truncation radius must be positive")
    return SpectralField(f.box, f.coeffs * truncation_mask(f.box, m))


def dealias(f):
    """Apply the 2/3-rule mask."""
    return SpectralField(f.box, f.coeffs * f.box.grid().dealias)


def fractional_symbol(box, s):
    """``|xi|^(2s)``; the mean mode maps to 1 when ``s == 0`` and to 0 otherwise."""
    kmag = box.grid().kmag
    if s == 0:
        return np.ones_like(kmag)
    safe = np.where(kmag > 0, kmag, 1.0)
    return np.where(kmag > 0, safe ** (2.0 * s), 0.0)


def frac_laplacian(f, s):
    """``(-Delta)^s f``."""
    if s < 0 and not _mean_is_zero(f.coeffs, f.box):
        raise NegativePowerOnMeanMode(f"(-Delta)^{s} needs a zero mean mode")
    return SpectralField(f.box, f.coeffs * fractional_symbol(f.box, s))


def leray_coeffs(coeffs, box):
    """Leray projection on raw coefficients (first ``d`` components)."""
    xhat = box.grid().xhat
    proj = (xhat * coeffs).sum(axis=0)
    return coeffs - xhat * proj


def leray_project(f):
    """Remove the gradient part of the first ``d`` components."""
    return SpectralField(f.box, leray_coeffs(f.coeffs, f.box))


def curl_coeffs(coeffs, box):
    xi = box.grid().xi
    out = np.empty_like(coeffs)
    out[0] = 1j * (xi[1] * coeffs[2] - xi[2] * coeffs[1])
    out[1] = 1j * (xi[2] * coeffs[0] - xi[0] * coeffs[2])
    out[2] = 1j * (xi[0] * coeffs[1] - xi[1] * coeffs[0])
    return out


def curl(f):
    return SpectralField(f.box, curl_coeffs(f.coeffs, f.box))


def divergence_coeffs(coeffs, box):
    """Scalar coefficient array ``i xi . f_hat`` over the first ``d`` components."""
    xi = box.grid().xi
    return 1j * (xi * coeffs).sum(axis=0)


def divergence(f):
    return divergence_coeffs(f.coeffs, f.box)


def divergence_norm(f):
    """``||div f||_{L^2}``."""
    div = divergence(f)
    return float(np.sqrt(f.box.volume * (np.abs(div) ** 2).sum()))


def gradient(box, scalar_coeffs):
    """Gradient of a scalar field given by its coefficient array (third component 0 in 2D)."""
    xi = box.grid().xi
    return SpectralField(box, 1j * xi * scalar_coeffs[None])


def scalar_to_physical(box, scalar_coeffs):
    return inverse(scalar_coeffs, box)


# -- products ----------------------------------------------------------------

def pointwise(func, *fields):
    """Dealiased pointwise product: ``func`` maps physical arrays to a ``(3, *shape)`` array."""
    box = same_box(*fields)
    mask = box.grid().dealias
    phys = [inverse(f.coeffs * mask, box) for f in fields]
    out = forward(np.asarray(func(*phys), dtype=np.float64), box)
    out *= mask
    return SpectralField(box, out)


def cross(f, g):
    """Dealiased ``f x g``."""
    return pointwise(kernels.cross3, f, g)


def advect(u, w):
    """Dealiased ``(u . grad) w`` for vector fields ``u``, ``w``."""
    box = same_box(u, w)
    mask = box.grid().dealias
    xi = box.grid().xi
    up = inverse(u.coeffs * mask, box)
    wc = w.coeffs * mask
    out = np.zeros((3,) + box.shape)
    for i in range(box.d):
        out += up[i] * inverse(1j * xi[i] * wc, box)
    res = forward(out, box)
    res *= mask
    return SpectralField(box, res)


# -- norms and inner products ------------------------------------------------

def inner(f, g):
    """Real L^2 inner product ``int f . g dx``."""
    same_box(f, g)
    return float(f.box.volume * np.real(np.vdot(f.coeffs, g.coeffs)))


def l2_norm(f):
    return float(np.sqrt(f.box.volume * np.vdot(f.coeffs, f.coeffs).real))


def sobolev_norm(f, s, homogeneous=True):
    """``||f||_{H^s}`` (weight ``(1+|xi|^2)^s``) or ``||f||_{dot H^s}`` (weight ``|xi|^{2s}``)."""
    kmag = f.box.grid().kmag
    power = (np.abs(f.coeffs) ** 2).sum(axis=0)
    if homogeneous:
        if s < 0 and not _mean_is_zero(f.coeffs, f.box):
            raise NegativePowerOnMeanMode(f"homogeneous H^{s} norm needs a zero mean mode")
        nz = kmag > 0
        total = (kmag[nz] ** (2.0 * s) * power[nz]).sum()
    else:
        total = ((1.0 + kmag ** 2) ** s * power).sum()
    return float(np.sqrt(f.box.volume * total))


def lp_norm(f, p):
    """Physical-space ``L^p`` norm of the Euclidean magnitude (``p = inf`` allowed)."""
    mag = np.sqrt((f.to_physical() ** 2).sum(axis=0))
    if np.isinf(p):
        return float(mag.max())
    cell = f.box.volume / mag.size
    return float((cell * (mag ** p).sum()) ** (1.0 / p))


def sup_norm(f):
    return lp_norm(f, np.inf)


def hermitian_defect(f):
    """``max |f_hat(-k) - conj(f_hat(k))|``."""
    c = f.coeffs
    axes = tuple(range(1, c.ndim))
    refl = np.roll(np.flip(c, axis=axes), 1, axis=axes)
    return float(np.abs(refl - np.conj(c)).max())


# -- random fields -----------------------------------------------------------

def random_field(box, rng, kmax=None, slope=0.0, solenoidal=True, components=3):
    """Random real field, band-limited to ``|xi| <= kmax`` and mean-free.

    Coefficients are white noise shaped by ``|xi|^(-slope)``. With ``components``
    below 3 the trailing components are zero.
    """
    noise = np.zeros((3,) + box.shape)
    noise[:components] = rng.standard_normal((components,) + box.shape)
    coeffs = forward(noise, box)
    g = box.grid()
    safe = np.where(g.kmag > 0, g.kmag, 1.0)
    env = np.where(g.kmag > 0, safe ** (-float(slope)), 0.0)
    if kmax is not None:
        env = env * (g.kmag <= kmax)
    coeffs *= env * g.dealias
    if solenoidal:
        coeffs = leray_coeffs(coeffs, box)
    return SpectralField(box, coeffs)
