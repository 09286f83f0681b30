"""Numerical toolkit for noncommutative arithmetic-geometric mean inequalities
of matrix products, with the incremental solvers that motivate them."""

from .expectations import (
    EnumerationCapError,
    ExpectationReport,
    ExpectationSpec,
    InvalidSpecError,
    MatrixTuple,
    arithmetic_mean,
    deterministic_product,
    expect,
    expect_product,
    expect_quadratic,
)
from .frames import Frame, FrameError, frame_to_tuple, general_frame, harmonic_frame_2d
from .linalg import InvalidInputError, PsdMatrix, SymmetricMatrix, is_psd, spectral_norm

__version__ = "0.1.0"

__all__ = [
    "EnumerationCapError", "ExpectationReport", "ExpectationSpec", "Frame", "FrameError",
    "InvalidInputError", "InvalidSpecError", "MatrixTuple", "PsdMatrix", "SymmetricMatrix",
    "arithmetic_mean", "deterministic_product", "expect", "expect_product", "expect_quadratic",
    "frame_to_tuple", "general_frame", "harmonic_frame_2d", "is_psd", "spectral_norm",
]
