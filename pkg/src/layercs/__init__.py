"""Coherent states for a charged particle in a layer under a constant magnetic field."""

from .coherent import CSClass, CSLabel, CSTag, build_state, evolve, overlap
from .errors import (
    ClassMismatch,
    DegenerateSpectrum,
    DomainError,
    LayerCSError,
    NonConvergence,
    PoleError,
    UnsupportedClass,
    UnsupportedOrder,
)
from .reports import VerificationReport
from .spectrum import LayerParams, QuantumNumbers

__version__ = "0.1.0"

__all__ = [
    "CSClass",
    "CSLabel",
    "CSTag",
    "ClassMismatch",
    "DegenerateSpectrum",
    "DomainError",
    "LayerCSError",
    "LayerParams",
    "NonConvergence",
    "PoleError",
    "QuantumNumbers",
    "UnsupportedClass",
    "UnsupportedOrder",
    "VerificationReport",
    "build_state",
    "evolve",
    "overlap",
]
