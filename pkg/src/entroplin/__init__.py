"""Kernel estimation of the quadratic functional, quadratic Renyi entropy and
L2 divergence for stationary linear processes."""

from ._backend import BACKEND
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DegenerateSampleError,
    DomainError,
    EntroplinError,
    InsufficientSignalError,
)
from .model import (
    CoefficientSequence,
    Gaussian,
    LinearProcessModel,
    MemoryLabel,
    SymmetricAlphaStable,
    true_quadratic_functional,
)

__version__ = "0.1.0"
