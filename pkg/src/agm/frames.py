"""Harmonic tight frames and their rank-one matrix tuples.

Two families are built:

* the planar harmonic frame ``a_k = (cos k w, sin k w)``, ``w = pi/n``,
  indexed ``k = 1..n``;
* a ``d``-dimensional family indexed ``k = 0..n-1`` that concatenates
  planar vectors at odd multiples ``a_{k}, a_{3k}, ..., a_{(d-1)k}`` (even
  ``d``) or a constant ``1/sqrt(2)`` entry followed by even multiples
  ``a_{2k}, ..., a_{(d-1)k}`` (odd ``d``), all scaled by ``sqrt(2/d)``.

Every frame is checked for unit norms and the tight-frame identity
``(1/n) sum v v^T = I/d`` when it is constructed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .expectations import MatrixTuple
from .linalg import InvalidInputError

__all__ = [
    "Frame",
    "FrameError",
    "harmonic_frame_2d",
    "general_frame",
    "frame_to_tuple",
    "adjacent_inner_product",
    "adjacent_inner_product_asymptotic",
]

UNIT_TOL = 1e-12
TIGHT_TOL = 1e-10

FrameKind = Literal["harmonic-2d", "general-even-d", "general-odd-d"]


class FrameError(ValueError):
    """A constructed frame failed its unit-norm or tightness certificate."""


@dataclass(frozen=True)
class Frame:
    vectors: np.ndarray  # shape (n, d), row k is the k-th frame vector
    kind: FrameKind

    def __post_init__(self):
        v = self.vectors
        norms = np.linalg.norm(v, axis=1)
        if np.max(np.abs(norms - 1.0)) > UNIT_TOL:
            raise FrameError(f"frame vectors are not unit length (max dev {np.max(np.abs(norms - 1)):.3g})")
        if self.tightness_residual() > TIGHT_TOL:
            raise FrameError(f"frame is not tight (residual {self.tightness_residual():.3g})")
        v.setflags(write=False)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def frame_operator(self) -> np.ndarray:
        """``(1/n) sum_k v_k v_k^T``."""
        return self.vectors.T @ self.vectors / self.n

    def tightness_residual(self) -> float:
        """Frobenius distance of the frame operator from ``I/d``."""
        return float(np.linalg.norm(self.frame_operator() - np.eye(self.d) / self.d))

    def adjacent_inner_products(self) -> np.ndarray:
        v = self.vectors
        return np.einsum("ij,ij->i", v[:-1], v[1:])


def _planar(multiple: np.ndarray, n: int) -> np.ndarray:
    w = math.pi / n
    return np.stack([np.cos(multiple * w), np.sin(multiple * w)], axis=-1)


def harmonic_frame_2d(n: int) -> Frame:
    """The planar harmonic frame ``a_{k;n}``, ``k = 1..n``."""
    if n < 3:
        raise InvalidInputError(f"harmonic frames need n >= 3, got {n}")
    return Frame(_planar(np.arange(1, n + 1), n), "harmonic-2d")


def general_frame(d: int, n: int) -> Frame:
    """``d``-dimensional harmonic frame with ``n >= d`` vectors."""
    if d < 2 or n < d:
        raise InvalidInputError(f"general frames need n >= d >= 2, got d={d}, n={n}")
    k = np.arange(n)
    if d % 2 == 0:
        blocks = [_planar(m * k, n) for m in range(1, d, 2)]
        kind = "general-even-d"
    else:
        blocks = [np.full((n, 1), 1.0 / math.sqrt(2.0))]
        blocks += [_planar(m * k, n) for m in range(2, d, 2)]
        kind = "general-odd-d"
    return Frame(math.sqrt(2.0 / d) * np.concatenate(blocks, axis=1), kind)


def frame_to_tuple(frame: Frame) -> MatrixTuple:
    """Rank-one projectors ``v_k v_k^T`` in frame order."""
    v = frame.vectors
    return MatrixTuple(np.einsum("ki,kj->kij", v, v))


def adjacent_inner_product(d: int, n: int) -> float:
    """Closed form of ``f_i^T f_{i+1}`` for :func:`general_frame`."""
    w = math.pi / n
    if d % 2 == 0:
        return (2.0 / d) * math.cos((d / 2 - 1) * w) * math.sin((d / 2 + 1) * w) / math.sin(w) - (
            2.0 / d
        ) * math.cos(w)
    return (2.0 / d) * math.cos((d - 1) / 2 * w) * math.sin((d + 1) / 2 * w) / math.sin(w) - 1.0 / d


def adjacent_inner_product_asymptotic(d: int, n: int) -> float:
    """Large-``n`` approximation ``1 - pi^2 (d^2 - 1) / (6 n^2)``."""
    return 1.0 - math.pi**2 * (d * d - 1) / (6.0 * n * n)
