"""Geometric phases of adiabatically controlled quantum systems whose
control is disturbed by classical noise."""
from .errors import (ConfigError, DegenerateDensity, GapViolation, GeophaseError,
                     NumericalBlowup, StepTooCoarse, ValidationError)

__version__ = "0.1.0"
