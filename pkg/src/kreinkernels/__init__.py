"""Kolmogorov decompositions of hermitian kernels into Krein spaces, with dilations."""

from .errors import (
    DomainError,
    EigenError,
    InconsistencyError,
    InvarianceError,
    KreinKernelError,
    NotHermitianError,
    NotPSDError,
    SchwartzViolation,
    ShapeMismatchError,
    ValidationError,
)
from .kernel import FiniteKernel, gram, gram_operator, schwartz_check, schwartz_minimal, uniqueness_gap
from .kolmogorov import KolmogorovDecomposition, SemigroupAction, decompose, invariant_decompose, unitary_equivalence, verify
from .hankel import MomentSequence, gns_build, hamburger_feasible, hankel_kernel, moment_recover, verify_hankel
from .dilation import HermitianLinearMap, contraction_dilate, dilation_to_block, paulsen_S, stinespring, wittstock_split
from .fock import PolynomialKernel, TruncatedFock, assemble_P, holomorphic_contraction_dilate, holomorphic_linearize, szego

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "EigenError",
    "FiniteKernel",
    "HermitianLinearMap",
    "InconsistencyError",
    "InvarianceError",
    "KolmogorovDecomposition",
    "KreinKernelError",
    "MomentSequence",
    "NotHermitianError",
    "NotPSDError",
    "PolynomialKernel",
    "SchwartzViolation",
    "SemigroupAction",
    "ShapeMismatchError",
    "TruncatedFock",
    "ValidationError",
    "assemble_P",
    "contraction_dilate",
    "decompose",
    "dilation_to_block",
    "gns_build",
    "gram",
    "gram_operator",
    "hamburger_feasible",
    "hankel_kernel",
    "holomorphic_contraction_dilate",
    "holomorphic_linearize",
    "invariant_decompose",
    "moment_recover",
    "paulsen_S",
    "schwartz_check",
    "schwartz_minimal",
    "stinespring",
    "szego",
    "uniqueness_gap",
    "unitary_equivalence",
    "verify",
    "verify_hankel",
    "wittstock_split",
]
