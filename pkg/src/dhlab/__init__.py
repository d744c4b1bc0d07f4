"""Numerical laboratory for Derivative-Hilbert operators on spaces of analytic functions."""
from .analytic import PowerSeries
from .measure import MomentSequence, RadialMeasure
from .operator import WeightedHankelMatrix
from .verify import VerificationOutcome, run_scenario

__version__ = "0.1.0"

__all__ = [
    "PowerSeries",
    "RadialMeasure",
    "MomentSequence",
    "WeightedHankelMatrix",
    "VerificationOutcome",
    "run_scenario",
    "__version__",
]
