"""Exception hierarchy shared by all modules."""

from __future__ import annotations

import numpy as np


class KreinKernelError(ValueError):
    """Base class for every error raised by the package."""


class NotHermitianError(KreinKernelError):
    def __init__(self, message: str, deviation: float):
        super().__init__(message)
        self.deviation = deviation


class NotPSDError(KreinKernelError):
    """A matrix expected to be positive semidefinite has a negative eigenvalue.

    ``witness`` is a unit eigenvector for the offending eigenvalue.
    """

    def __init__(self, message: str, eigenvalue: float, witness: np.ndarray):
        super().__init__(message)
        self.eigenvalue = eigenvalue
        self.witness = witness


class EigenError(KreinKernelError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class ShapeMismatchError(KreinKernelError):
    pass


class SchwartzViolation(KreinKernelError):
    """``-L <= K <= L`` fails; ``side`` is ``"upper"`` (L-K) or ``"lower"`` (L+K)."""

    def __init__(self, message: str, side: str, eigenvalue: float, witness):
        super().__init__(message)
        self.side = side
        self.eigenvalue = eigenvalue
        self.witness = witness


class InconsistencyError(KreinKernelError):
    """A linear system that should be solvable has a nonzero residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class InvarianceError(KreinKernelError):
    def __init__(self, message: str, generator: str, x: str, y: str, residual: float):
        super().__init__(message)
        self.generator = generator
        self.x = x
        self.y = y
        self.residual = residual


class DomainError(KreinKernelError):
    pass


class ValidationError(KreinKernelError):
    pass
