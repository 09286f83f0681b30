"""Random PSD ensembles ``A = Z Z^T`` and their moment identities.

``Z`` is ``d x r`` with i.i.d. symmetric entries of variance ``sigma^2`` and
fourth moment ``xi4``.  Closed forms covered here:

* ``E[A] = r sigma^2 I``
* ``E[A^2] = zeta I`` with ``zeta = r (r + d - 2) sigma^4 + r xi4``
  (for Gaussian entries ``r (r + d + 1)``, the Wishart second moment)
* second moments of pairs of entries of ``A`` by index pattern
* two lower bounds on Gaussian moment sums, evaluated in log space.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np
from scipy.special import ndtri

from . import _rng
from .expectations import MatrixTuple
from .inequalities import InequalityVerdict, make_verdict
from .linalg import InvalidInputError, spectral_norm

__all__ = [
    "EntryDistribution",
    "EnsembleSpec",
    "sample_entries",
    "sample_tuples",
    "sample_tuple",
    "zeta",
    "FOURTH_MOMENT_PATTERNS",
    "classify_pattern",
    "fourth_moment_entry",
    "MomentEstimate",
    "mc_mean_moment",
    "mc_square_moment",
    "mc_entry_pair_moment",
    "mc_quadratic_moment",
    "ensemble_bias_check",
    "WishartBounds",
    "wishart_gap_bounds",
    "wishart_intermediate_log",
    "wishart_grid_check",
    "jensen_moment_check",
]

Kind = Literal["gaussian", "rademacher", "uniform-symmetric"]

_SUB_ENSEMBLE = 31
_SUB_JENSEN = 32
_HALF_ULP = 2.0**-54
_CHUNK = 10_000


@dataclass(frozen=True)
class EntryDistribution:
    """Symmetric entry law with standard deviation ``sigma``."""

    kind: Kind = "gaussian"
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "rademacher", "uniform-symmetric"):
            raise InvalidInputError(f"unknown distribution {self.kind!r}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise InvalidInputError(f"sigma must be positive, got {self.sigma}")

    @property
    def xi4(self) -> float:
        """Fourth moment ``E[entry^4]``."""
        s4 = self.sigma**4
        return {"gaussian": 3.0 * s4, "rademacher": s4, "uniform-symmetric": 1.8 * s4}[self.kind]

    def from_uniform(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms on [0, 1) to entries by inverse CDF."""
        if self.kind == "gaussian":
            return self.sigma * ndtri(u + _HALF_ULP)
        if self.kind == "rademacher":
            return np.where(u < 0.5, -self.sigma, self.sigma)
        return self.sigma * math.sqrt(3.0) * (2.0 * u - 1.0)


@dataclass(frozen=True)
class EnsembleSpec:
    d: int
    r: int
    n: int
    dist: EntryDistribution = EntryDistribution()
    seed: int = 0
    trial: int = 0

    def __post_init__(self):
        if min(self.d, self.r, self.n) < 1:
            raise InvalidInputError("d, r and n must be >= 1")
        _rng.check_seed(self.seed)


def sample_entries(dist: EntryDistribution, seed: int, start: int, count: int, width: int,
                   trial: int = 0, sub: int = _SUB_JENSEN) -> np.ndarray:
    """``(count, width)`` entries; row ``j`` is draw ``start + j``."""
    return dist.from_uniform(_rng.uniform_block(seed, start, count, width, trial=trial, sub=sub))


def sample_tuples(spec: EnsembleSpec, draws: int, start: int = 0) -> np.ndarray:
    """Stack of ``draws`` tuples, shape ``(draws, n, d, d)``.

    Draw ``s`` depends only on ``(seed, trial, s)``.
    """
    n, d, r = spec.n, spec.d, spec.r
    z = sample_entries(spec.dist, spec.seed, start, draws, n * d * r, spec.trial, _SUB_ENSEMBLE)
    z = z.reshape(draws, n, d, r)
    return z @ np.swapaxes(z, -1, -2)


def sample_tuple(spec: EnsembleSpec) -> MatrixTuple:
    """Draw 0 of the ensemble as a certified tuple."""
    return MatrixTuple(sample_tuples(spec, 1)[0])


def zeta(spec: EnsembleSpec) -> float:
    """``E[A^2] = zeta I`` with ``zeta = r(r + d - 2) sigma^4 + r xi4``.

    The diagonal of ``A^2`` is ``A_ii^2 + sum_{j != i} A_ij^2``; the first
    term contributes ``r(r-1) sigma^4 + r xi4`` and each of the ``d - 1``
    others ``r sigma^4``.
    """
    s4 = spec.dist.sigma**4
    return spec.r * (spec.r + spec.d - 2) * s4 + spec.r * spec.dist.xi4


FOURTH_MOMENT_PATTERNS = (
    "same-pair-diagonal",
    "same-pair-offdiagonal",
    "distinct-diagonal",
    "mismatched",
)


def classify_pattern(i1: int, j1: int, i2: int, j2: int) -> str:
    """Pattern of ``E[A_{i1 j1} A_{i2 j2}]`` for a symmetric ``A``."""
    p, q = {i1, j1}, {i2, j2}
    if p == q:
        return "same-pair-diagonal" if i1 == j1 else "same-pair-offdiagonal"
    if i1 == j1 and i2 == j2:
        return "distinct-diagonal"
    return "mismatched"


def fourth_moment_entry(spec: EnsembleSpec, pattern) -> float:
    """``E[A_{i1 j1} A_{i2 j2}]`` from a pattern name or an index 4-tuple.

    * same-pair-diagonal (``A_ii^2``): ``r(r-1) sigma^4 + r xi4``
    * same-pair-offdiagonal (``A_ij^2``, ``i != j``): ``r sigma^4``
    * distinct-diagonal (``A_ii A_jj``, ``i != j``): ``r^2 sigma^4``
    * mismatched: ``0`` (some entry of ``Z`` appears an odd number of times)
    """
    if not isinstance(pattern, str):
        idx = tuple(int(i) for i in pattern)
        if len(idx) != 4 or min(idx) < 0 or max(idx) >= spec.d:
            raise InvalidInputError(f"need four indices in 0..{spec.d - 1}, got {pattern}")
        pattern = classify_pattern(*idx)
    s4, r = spec.dist.sigma**4, spec.r
    values = {
        "same-pair-diagonal": r * (r - 1) * s4 + r * spec.dist.xi4,
        "same-pair-offdiagonal": r * s4,
        "distinct-diagonal": r * r * s4,
        "mismatched": 0.0,
    }
    if pattern not in values:
        raise InvalidInputError(f"unknown pattern {pattern!r}")
    return float(values[pattern])


class MomentEstimate(NamedTuple):
    mean: np.ndarray
    stderr: np.ndarray
    samples: int


def _mc(spec: EnsembleSpec, draws: int, fn) -> MomentEstimate:
    # fn maps a (m, n, d, d) stack to per-sample values (m * n_values, ...)
    s1 = s2 = None
    total = 0
    for start in range(0, draws, _CHUNK):
        vals = fn(sample_tuples(spec, min(_CHUNK, draws - start), start))
        s1 = vals.sum(axis=0) if s1 is None else s1 + vals.sum(axis=0)
        s2 = (vals**2).sum(axis=0) if s2 is None else s2 + (vals**2).sum(axis=0)
        total += vals.shape[0]
    mean = s1 / total
    var = np.maximum(s2 / total - mean**2, 0.0) * total / max(total - 1, 1)
    return MomentEstimate(mean, np.sqrt(var / total), total)


def mc_mean_moment(spec: EnsembleSpec, draws: int) -> MomentEstimate:
    """Entrywise Monte Carlo estimate of ``E[A]`` (every ``A_i`` pooled)."""
    return _mc(spec, draws, lambda a: a.reshape(-1, spec.d, spec.d))


def mc_square_moment(spec: EnsembleSpec, draws: int) -> MomentEstimate:
    """Entrywise Monte Carlo estimate of ``E[A^2]``."""
    return _mc(spec, draws, lambda a: (a @ a).reshape(-1, spec.d, spec.d))


def mc_entry_pair_moment(spec: EnsembleSpec, indices, draws: int) -> MomentEstimate:
    """Monte Carlo estimate of ``E[A_{i1 j1} A_{i2 j2}]``."""
    i1, j1, i2, j2 = indices
    return _mc(spec, draws, lambda a: (a[..., i1, j1] * a[..., i2, j2]).reshape(-1))


def mc_quadratic_moment(spec: EnsembleSpec, k: int, draws: int) -> MomentEstimate:
    """Ensemble average of the exact without-replacement quadratic form.

    Each draw contributes its average of ``P P^T`` over all ordered
    distinct ``k``-tuples; the closed form is ``zeta^k I``.
    """
    if not 1 <= k <= spec.n:
        raise InvalidInputError(f"need 1 <= k <= n (k={k}, n={spec.n})")
    idx = np.asarray(list(itertools.permutations(range(spec.n), k)), dtype=np.intp)

    def fn(a):
        out = np.zeros((a.shape[0], spec.d, spec.d))
        for row in idx:
            p = a[:, row[0]]
            for i in row[1:]:
                p = a[:, i] @ p
            out += p @ np.swapaxes(p, -1, -2)
        return out / len(idx)

    return _mc(spec, draws, fn)


def ensemble_bias_check(spec: EnsembleSpec, k: int, draws: int) -> InequalityVerdict:
    """``||E[wo product]|| = (r sigma^2)^k <= E||M_A^k||`` over the ensemble.

    Distinct indices give independent factors, so the without-replacement
    mean is exactly ``(r sigma^2)^k I``; the right side is estimated.
    """
    if not 1 <= k <= spec.n:
        raise InvalidInputError(f"need 1 <= k <= n (k={k}, n={spec.n})")

    def fn(a):
        return np.atleast_1d(spectral_norm(np.linalg.matrix_power(a.mean(axis=1), k)))

    est = _mc(spec, draws, fn)
    lhs = (spec.r * spec.dist.sigma**2) ** k
    rhs = float(est.mean)
    # the Monte Carlo side is the rhs; widen by its error as for a stochastic lhs
    return make_verdict("ensemble-bias", lhs, rhs, f"k={k}, draws={draws}", float(est.stderr))


class WishartBounds(NamedTuple):
    """Two Gaussian moment lower bounds.

    Values are floats, or ``None`` when outside double range; the natural
    logs are always populated.
    """

    ratio_lower_bound: float | None
    diag_moment_lower_bound: float | None
    log_ratio: float
    log_diag: float


def _exp_or_none(x: float) -> float | None:
    return math.exp(x) if x < 709.0 else None


def wishart_gap_bounds(k: int, r: int, d: int, sigma: float = 1.0) -> WishartBounds:
    """Lower bounds on the with/without-replacement moment ratio and on the
    self-loop part of the ``2k``-th diagonal moment.

    ``ratio = r exp(1/(4k(k+1))) (16k / (e^2 r (r+d+1)))^k`` and
    ``diag = r 2^(-2k) (4k)!/(2k)! sigma^(4k)``.
    """
    if min(k, r, d) < 1 or not sigma > 0:
        raise InvalidInputError("need k, r, d >= 1 and sigma > 0")
    log_ratio = (math.log(r) + 1.0 / (4 * k * (k + 1))
                 + k * (math.log(16 * k) - 2.0 - math.log(r * (r + d + 1))))
    log_diag = (math.log(r) - 2 * k * math.log(2.0) + math.lgamma(4 * k + 1)
                - math.lgamma(2 * k + 1) + 4 * k * math.log(sigma))
    return WishartBounds(_exp_or_none(log_ratio), _exp_or_none(log_diag), log_ratio, log_diag)


def wishart_intermediate_log(k: int, r: int, d: int) -> float:
    """``log( r (4k)!/(2k)! (4k r (r+d+1))^(-k) )``."""
    return (math.log(r) + math.lgamma(4 * k + 1) - math.lgamma(2 * k + 1)
            - k * math.log(4 * k * r * (r + d + 1)))


def wishart_grid_check(max_k: int = 10, max_r: int = 10, max_d: int = 10) -> list[tuple[int, int, int]]:
    """Grid points where the intermediate bound falls below ``ratio`` (expected: none)."""
    bad = []
    for k, r, d in itertools.product(range(1, max_k + 1), range(1, max_r + 1), range(1, max_d + 1)):
        if wishart_intermediate_log(k, r, d) < wishart_gap_bounds(k, r, d).log_ratio - 1e-12:
            bad.append((k, r, d))
    return bad


def jensen_moment_check(dist: EntryDistribution, p: int, samples: int = 100_000,
                        seed: int = 0) -> InequalityVerdict:
    """``E[w^2]^p <= E[w^(2p)]`` for one entry ``w``, by Monte Carlo.

    Both sides use the same draws, so ``p = 0, 1`` give exact equality.
    The verdict's ``stderr`` is that of the ``E[w^(2p)]`` estimate.
    """
    if int(p) != p or p < 0:
        raise InvalidInputError(f"p must be a nonnegative integer, got {p}")
    p = int(p)
    w = sample_entries(dist, seed, 0, samples, 1)[:, 0]
    w2 = w * w
    high = w2**p
    se = float(high.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return make_verdict("jensen-moment", float(w2.mean() ** p), float(high.mean()),
                        f"p={p}, {dist.kind}", se)
