"""Row-selection schemes for incremental methods.

Trial ``t`` of a sampler reads sample ``t`` of a :func:`agm._rng.uniform_block`
stream, so index sequences for any subset of trials can be generated in one
vectorised call and agree bitwise with a trial-by-trial loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .. import _rng
from ..linalg import InvalidInputError

__all__ = ["SCHEMES", "WR", "WO", "SamplerConfig", "sample_indices"]

Scheme = Literal[
    "with-replacement-uniform",
    "without-replacement-permutation",
    "row-norm-weighted",
    "deterministic-cycle",
]

WR = "with-replacement-uniform"
WO = "without-replacement-permutation"
SCHEMES: tuple[str, ...] = (WR, WO, "row-norm-weighted", "deterministic-cycle")

ALIASES = {"wr": WR, "wo": WO, "with-replacement": WR, "without-replacement": WO,
           "weighted": "row-norm-weighted", "cycle": "deterministic-cycle"}

_SUB_SAMPLER = 41


@dataclass(frozen=True)
class SamplerConfig:
    """Which row to use at each step.

    ``row-norm-weighted`` draws with replacement with probability
    proportional to ``||row||^weight_power``; ``without-replacement-permutation``
    draws a fresh random permutation every epoch.
    """

    scheme: str = WO
    seed: int = 0
    weight_power: int = 2

    def __post_init__(self):
        object.__setattr__(self, "scheme", ALIASES.get(self.scheme, self.scheme))
        if self.scheme not in SCHEMES:
            raise InvalidInputError(f"unknown sampling scheme {self.scheme!r}")
        if self.weight_power not in (1, 2):
            raise InvalidInputError("weight_power must be 1 or 2")
        _rng.check_seed(self.seed)


def _trial_range(trials) -> tuple[int, int]:
    if isinstance(trials, range):
        if trials.step != 1:
            raise InvalidInputError("trial ranges must be contiguous")
        return trials.start, len(trials)
    return 0, int(trials)


def sample_indices(
    config: SamplerConfig, n: int, k: int, trials=1, row_norms: Sequence[float] | None = None
) -> np.ndarray:
    """``(trials, k)`` array of 0-based row indices.

    ``trials`` is a count (trials ``0..trials-1``) or a contiguous ``range``.
    """
    if n < 1 or k < 0:
        raise InvalidInputError("need n >= 1 and k >= 0")
    start, count = _trial_range(trials)
    if k == 0:
        return np.zeros((count, 0), dtype=np.intp)
    scheme = config.scheme
    if scheme == "deterministic-cycle":
        return np.broadcast_to(np.arange(k) % n, (count, k)).copy()
    if scheme == WO:
        epochs = -(-k // n)
        u = _rng.uniform_block(config.seed, start, count, epochs * n, sub=_SUB_SAMPLER)
        perms = np.argsort(u.reshape(count, epochs, n), axis=2, kind="stable")
        return perms.reshape(count, epochs * n)[:, :k]
    u = _rng.uniform_block(config.seed, start, count, k, sub=_SUB_SAMPLER)
    if scheme == WR:
        return np.minimum((u * n).astype(np.intp), n - 1)
    if row_norms is None:
        raise InvalidInputError("row-norm-weighted sampling needs row norms")
    w = np.asarray(row_norms, dtype=float) ** config.weight_power
    if w.shape != (n,) or np.any(w < 0) or not w.sum() > 0:
        raise InvalidInputError("row norms must be n nonnegative values, not all zero")
    cdf = np.cumsum(w)
    idx = np.searchsorted(cdf, u * cdf[-1], side="right")
    return np.minimum(idx, n - 1).astype(np.intp)
