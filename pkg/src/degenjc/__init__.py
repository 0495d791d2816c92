"""Dispersive, damped Jaynes-Cummings dynamics of an atom with degenerate levels."""

__version__ = "0.1.0"

from .analytic import (EntropySeries, FrequencyConvention, FrequencyTable, ModelParams,
                       disentanglement_period, entropy_atom, entropy_field, entropy_series,
                       entropy_total)
from .angular import build_coefficient_table, transition_coefficient, wigner_3j
from .hilbert import LevelSpec, ProductBasis
from .lindblad import IntegratorConfig, ValidationReport, simulate, validate

__all__ = [
    "EntropySeries", "FrequencyConvention", "FrequencyTable", "IntegratorConfig", "LevelSpec",
    "ModelParams", "ProductBasis", "ValidationReport", "build_coefficient_table",
    "disentanglement_period", "entropy_atom", "entropy_field", "entropy_series",
    "entropy_total", "simulate", "transition_coefficient", "validate", "wigner_3j",
]
