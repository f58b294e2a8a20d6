"""Mean-field phase unwrapping.

Typical use::

    from mfunwrap import WrappedImage, anneal, integrate
    report = anneal(WrappedImage(phi))
    surface = integrate(WrappedImage(phi), report.shifts)
"""
from .grid import CurlViolationError, ShiftField, WrappedImage, curl, greedy_shift_field, integrate, wrap
from .lsq import hybrid_unwrap, lsq_unwrap
from .model import BeliefField, ModelParams, free_energy
from .oracle import enumerate_posterior
from .solver import DEFAULT_SCHEDULE, AnnealSchedule, anneal, extract_map_shifts

__all__ = [
    "AnnealSchedule", "BeliefField", "CurlViolationError", "DEFAULT_SCHEDULE", "ModelParams",
    "ShiftField", "WrappedImage", "anneal", "curl", "enumerate_posterior", "extract_map_shifts",
    "free_energy", "greedy_shift_field", "hybrid_unwrap", "integrate", "lsq_unwrap", "wrap",
]
