"""Pseudo-spectral Navier-Stokes-Maxwell and Hall-MHD simulator with a verification harness."""
from .dynamics import SimState, StepperConfig, make_initial, simulate, step
from .errors import (
    BoxMismatch, CflViolation, DegenerateRHS, FitDegenerate, NegativePowerOnMeanMode,
    NoConvergence, NonPositiveInput, NonSolenoidal, NonzeroMeanMode, NsmHallError, UnknownFamily,
)
from .params import PhysicalParams, Variant
from .spectral import BoxSpec, SpectralField

__version__ = "0.1.0"

__all__ = [
    "BoxMismatch", "BoxSpec", "CflViolation", "DegenerateRHS", "FitDegenerate",
    "NegativePowerOnMeanMode", "NoConvergence", "NonPositiveInput", "NonSolenoidal",
    "NonzeroMeanMode", "NsmHallError", "PhysicalParams", "SimState", "SpectralField",
    "StepperConfig", "UnknownFamily", "Variant", "make_initial", "simulate", "step",
]
