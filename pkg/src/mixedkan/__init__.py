"""Simulation and certification of a partially hyperbolic skew product on
T^2 x S x T^2 with a mostly contracting circle fibre and a mostly expanding
second torus, together with its heteroclinic perturbation."""

from .errors import (
    CertificationError,
    ConfigurationError,
    MixedKanError,
    SearchExhaustedError,
    UncertifiedParamsError,
)
from .presets import desk_preset, get_preset, paper_preset
from .system import GPoint, MPoint, SystemParams

__all__ = [
    "CertificationError",
    "ConfigurationError",
    "MixedKanError",
    "SearchExhaustedError",
    "UncertifiedParamsError",
    "GPoint",
    "MPoint",
    "SystemParams",
    "desk_preset",
    "get_preset",
    "paper_preset",
]
