"""Physical parameters and system variants."""
import enum
from dataclasses import dataclass, field, asdict


class Variant(str, enum.Enum):
    """System selector."""

    NSM = "NSM"
    NSM_SO = "NSM_SO"
    NSM_GO = "NSM_GO"
    HMHD = "HMHD"
    MHD = "MHD"
    NSM_GO_STAR = "NSM_GO_STAR"

    @property
    def has_electric_field(self):
        return self not in (Variant.HMHD, Variant.MHD)

    @property
    def solenoidal_e(self):
        """Whether E is kept divergence-free (everything except plain NSM)."""
        return self in (Variant.NSM_SO, Variant.NSM_GO, Variant.NSM_GO_STAR)


#: critical dissipation exponents for the Hall-MHD helicity experiment
ALPHA_CRITICAL = 5.0 / 4.0
BETA_CRITICAL = 7.0 / 4.0


@dataclass(frozen=True)
class PhysicalParams:
    """Coefficients of one system. ``B_star`` is only used by ``NSM_GO_STAR``."""

    variant: Variant = Variant.NSM_GO
    nu: float = 1.0
    sigma: float = 1.0
    c: float = 1.0
    kappa: float = 0.0
    alpha: float = 1.0
    beta: float = 1.0
    B_star: tuple = field(default=(0.0, 0.0, 0.0))

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "B_star", tuple(float(b) for b in self.B_star))
        if len(self.B_star) != 3:
            raise ValueError("B_star must be a 3-vector")
        if self.nu < 0 or self.kappa < 0 or self.alpha < 0 or self.beta < 0:
            raise ValueError("nu, kappa, alpha and beta must be nonnegative")
        if not (self.sigma > 0 and self.c > 0):
            raise ValueError("sigma and c must be positive")
        if self.variant in (Variant.NSM, Variant.NSM_SO, Variant.MHD) and self.kappa != 0:
            raise ValueError(f"{self.variant.value} has no Hall term; kappa must be 0")
        if self.variant is Variant.NSM_GO_STAR and self.alpha != 0:
            raise ValueError("NSM_GO_STAR requires alpha = 0")
        if self.variant is not Variant.NSM_GO_STAR and any(self.B_star):
            raise ValueError("B_star is only meaningful for NSM_GO_STAR")

    def replace(self, **kw):
        data = asdict(self)
        data.update(kw)
        return PhysicalParams(**data)

    def to_dict(self):
        data = asdict(self)
        data["variant"] = self.variant.value
        data["B_star"] = list(self.B_star)
        return data
