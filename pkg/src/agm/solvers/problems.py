"""One-dimensional least-squares toy problems.

Mean problem: minimise ``sum_i (x - y_i)^2 / 2`` with ``n`` steps of size
``1/t`` from ``x_0 = 0``; the result is the mean of the sampled values.
Weighted problem: minimise ``sum_i beta_i (x - y)^2 / 2`` with constant
step ``gamma``; the error after ``n`` steps is ``|y| prod_t (1 - gamma beta_{i_t})``.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from ..linalg import InvalidInputError
from .sampling import SamplerConfig, sample_indices

__all__ = [
    "ScalarResult",
    "harmonic_mean_iterate",
    "scalar_mean_problem",
    "scalar_mean_errors",
    "scalar_weighted_problem",
    "weighted_error_without_replacement",
    "weighted_expected_error_with_replacement",
    "weighted_errors",
]


class ScalarResult(NamedTuple):
    x: float
    error: float
    indices: np.ndarray


def _values(y: Sequence[float]) -> np.ndarray:
    v = np.asarray(y, dtype=float).ravel()
    if v.size == 0:
        raise InvalidInputError("need at least one value")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("values must be finite")
    return v


def harmonic_mean_iterate(samples: np.ndarray) -> np.ndarray:
    """Run ``x_t = x_{t-1} - (1/t)(x_{t-1} - y_t)`` along the last axis."""
    x = np.zeros(samples.shape[:-1])
    for t in range(samples.shape[-1]):
        x = x - (1.0 / (t + 1)) * (x - samples[..., t])
    return x


def scalar_mean_problem(y: Sequence[float], scheme: str = "wo", seed: int = 0,
                        trial: int = 0) -> ScalarResult:
    """Final iterate and ``|x_n - mean(y)|`` for one sampling trial."""
    v = _values(y)
    idx = sample_indices(SamplerConfig(scheme, seed), v.size, v.size, range(trial, trial + 1))[0]
    x = float(harmonic_mean_iterate(v[idx]))
    return ScalarResult(x, abs(x - float(v.mean())), idx)


def scalar_mean_errors(y: Sequence[float], scheme: str, trials: int, seed: int = 0) -> np.ndarray:
    """Signed errors ``x_n - mean(y)`` for trials ``0..trials-1``."""
    v = _values(y)
    idx = sample_indices(SamplerConfig(scheme, seed), v.size, v.size, trials)
    return harmonic_mean_iterate(v[idx]) - v.mean()


def _check_weighted(betas: Sequence[float], gamma: float) -> np.ndarray:
    b = _values(betas)
    if np.any(b <= 0):
        raise InvalidInputError("weights beta_i must be positive")
    if not 0 < gamma < 1.0 / b.max():
        raise InvalidInputError(f"step must satisfy 0 < gamma < 1/max(beta) = {1.0 / b.max():.6g}")
    return b


def weighted_error_without_replacement(betas: Sequence[float], y: float, gamma: float) -> float:
    """``|y| prod_i (1 - gamma beta_i)``: any ordering gives this error."""
    b = _check_weighted(betas, gamma)
    return abs(y) * float(np.prod(1.0 - gamma * b))


def weighted_expected_error_with_replacement(betas: Sequence[float], y: float, gamma: float) -> float:
    """``|y| (1 - gamma mean(beta))^n``; factors are i.i.d. and positive."""
    b = _check_weighted(betas, gamma)
    return abs(y) * (1.0 - gamma * float(b.mean())) ** b.size


def weighted_errors(betas: Sequence[float], y: float, gamma: float, scheme: str, trials: int,
                    seed: int = 0) -> np.ndarray:
    """Simulated ``|x_n - y|`` for trials ``0..trials-1``."""
    b = _check_weighted(betas, gamma)
    idx = sample_indices(SamplerConfig(scheme, seed), b.size, b.size, trials)
    x = np.zeros(idx.shape[0])
    for t in range(b.size):
        x = x - gamma * b[idx[:, t]] * (x - y)
    return np.abs(x - y)


def scalar_weighted_problem(betas: Sequence[float], y: float, gamma: float, scheme: str = "wo",
                            seed: int = 0, trial: int = 0) -> float:
    """``|x_n - y|`` for one trial of ``n`` constant-step iterations."""
    b = _check_weighted(betas, gamma)
    idx = sample_indices(SamplerConfig(scheme, seed), b.size, b.size, range(trial, trial + 1))[0]
    x = 0.0
    for i in idx:
        x = x - gamma * b[i] * (x - y)
    if not math.isfinite(x):
        raise InvalidInputError("iteration diverged")
    return abs(x - y)
