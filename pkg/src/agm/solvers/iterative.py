"""Least-mean-squares incremental gradient and Kaczmarz iterations.

Both run many trials at once: trial ``t`` uses sampler sample ``t`` and
noise sample ``t``, so a trial's trace does not depend on which other
trials run alongside it.  ``errors[t, j]`` is ``||x_j - x_star||`` with
``j = 0`` the starting point.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Literal, NamedTuple, Sequence

import numpy as np
from scipy.special import ndtri

from .. import _rng
from ..expectations import ENUMERATION_CAP, EnumerationCapError
from ..frames import general_frame, harmonic_frame_2d
from ..linalg import InvalidInputError
from .sampling import WO, WR, SamplerConfig, sample_indices

__all__ = [
    "DIVERGENCE_THRESHOLD",
    "ROW_KINDS",
    "LeastSquaresInstance",
    "make_rows",
    "make_instance",
    "SolverRun",
    "default_gamma",
    "run_igm",
    "run_kaczmarz",
    "kaczmarz_product_form",
    "RiskTerms",
    "igm_risk",
    "MomentMatrices",
    "moment_matrices",
]

DIVERGENCE_THRESHOLD = 1e12
ROW_KINDS = ("harmonic", "general-frame", "haar", "gaussian")

_SUB_NOISE = 51
_SUB_ROWS = 52
_SUB_XSTAR = 53
_HALF_ULP = 2.0**-54

StepRule = Literal["constant", "harmonic", "kaczmarz-exact"]


def _gaussian_block(seed: int, start: int, count: int, width: int, sub: int) -> np.ndarray:
    return ndtri(_rng.uniform_block(seed, start, count, width, sub=sub) + _HALF_ULP)


@dataclass(frozen=True)
class LeastSquaresInstance:
    """``y = Phi x_star + offset + rho * omega`` with ``omega`` standard
    normal, regenerated per trial from ``(noise_seed, trial)``.

    ``offset`` is a fixed residual (zero unless the targets were given
    explicitly, see :meth:`from_targets`).
    """

    Phi: np.ndarray
    x_star: np.ndarray
    rho: float = 0.0
    noise_seed: int = 0
    offset: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        phi = np.asarray(self.Phi, dtype=float)
        xs = np.asarray(self.x_star, dtype=float).ravel()
        if phi.ndim != 2 or min(phi.shape) < 1:
            raise InvalidInputError(f"Phi must be an n x d matrix, got shape {phi.shape}")
        if xs.shape != (phi.shape[1],):
            raise InvalidInputError("x_star length must equal the number of columns of Phi")
        if not np.all(np.isfinite(phi)) or not np.all(np.isfinite(xs)):
            raise InvalidInputError("instance has non-finite entries")
        if not (self.rho >= 0 and math.isfinite(self.rho)):
            raise InvalidInputError("rho must be a nonnegative number")
        _rng.check_seed(self.noise_seed)
        object.__setattr__(self, "Phi", phi)
        object.__setattr__(self, "x_star", xs)

    @classmethod
    def from_targets(cls, Phi, y) -> "LeastSquaresInstance":
        """Noise-free instance with the given targets; ``x_star`` is the
        least-squares solution."""
        phi = np.asarray(Phi, dtype=float)
        yv = np.asarray(y, dtype=float).ravel()
        x_star = np.linalg.lstsq(phi, yv, rcond=None)[0]
        return cls(phi, x_star, 0.0, 0, yv - phi @ x_star)

    @property
    def n(self) -> int:
        return self.Phi.shape[0]

    @property
    def d(self) -> int:
        return self.Phi.shape[1]

    def targets(self, trials=1) -> np.ndarray:
        """``(trials, n)`` targets; ``trials`` is a count or contiguous range."""
        start, count = (trials.start, len(trials)) if isinstance(trials, range) else (0, int(trials))
        base = self.Phi @ self.x_star
        if self.offset is not None:
            base = base + self.offset
        y = np.broadcast_to(base, (count, self.n)).copy()
        if self.rho > 0:
            y += self.rho * _gaussian_block(self.noise_seed, start, count, self.n, _SUB_NOISE)
        return y


def make_rows(kind: str, n: int, d: int, seed: int = 0) -> np.ndarray:
    """``n x d`` design matrix.

    ``harmonic`` is the planar harmonic frame for ``d = 2`` and the general
    ``d``-dimensional frame otherwise; ``haar`` rows are normalised standard
    Gaussian vectors.
    """
    if kind == "harmonic":
        frame = harmonic_frame_2d(n) if d == 2 else general_frame(d, n)
        return frame.vectors.copy()
    if kind == "general-frame":
        return general_frame(d, n).vectors.copy()
    if kind in ("haar", "gaussian"):
        g = _gaussian_block(seed, 0, n, d, _SUB_ROWS)
        return g / np.linalg.norm(g, axis=1, keepdims=True) if kind == "haar" else g
    raise InvalidInputError(f"unknown row kind {kind!r}; choose from {ROW_KINDS}")


def make_instance(rows: np.ndarray, rho: float = 0.0, seed: int = 0,
                  x_star: Sequence[float] | None = None) -> LeastSquaresInstance:
    """Instance with a random unit ``x_star`` (from ``seed``) unless given."""
    rows = np.asarray(rows, dtype=float)
    if x_star is None:
        g = _gaussian_block(seed, 0, 1, rows.shape[1], _SUB_XSTAR)[0]
        x_star = g / np.linalg.norm(g)
    return LeastSquaresInstance(rows, np.asarray(x_star, dtype=float), rho, seed)


@dataclass
class SolverRun:
    method: str
    scheme: str
    step_rule: str
    gamma: float | None
    iterations: int
    trials: range
    errors: np.ndarray
    final_iterates: np.ndarray
    diverged: dict[int, int] = field(default_factory=dict)
    skipped_zero_rows: int = 0

    @property
    def final_errors(self) -> np.ndarray:
        return self.errors[:, -1]

    def long_rows(self):
        """``(iter, trial, scheme, error)`` tuples, iteration-major."""
        for j in range(self.errors.shape[1]):
            for row, t in enumerate(self.trials):
                yield j, t, self.scheme, float(self.errors[row, j])

    def summary_rows(self):
        """``(iter, scheme, median, mean, stderr)`` over finite trials."""
        for j in range(self.errors.shape[1]):
            v = self.errors[:, j]
            v = v[np.isfinite(v)]
            se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
            yield j, self.scheme, float(np.median(v)), float(v.mean()), se


def default_gamma(Phi: np.ndarray) -> float:
    """``0.5 / max_i ||a_i||^2``."""
    m = float(np.max(np.einsum("ij,ij->i", Phi, Phi)))
    if m <= 0:
        raise InvalidInputError("all rows are zero")
    return 0.5 / m


def _as_trials(trials) -> range:
    return trials if isinstance(trials, range) else range(int(trials))


def _start(instance: LeastSquaresInstance, x0, count: int) -> np.ndarray:
    x = np.zeros(instance.d) if x0 is None else np.asarray(x0, dtype=float).ravel()
    if x.shape != (instance.d,):
        raise InvalidInputError("x0 has the wrong length")
    return np.broadcast_to(x, (count, instance.d)).copy()


def _iterate(instance, sampler, k, trials, x0, update) -> tuple[np.ndarray, np.ndarray, dict]:
    trials = _as_trials(trials)
    phi = instance.Phi
    idx = sample_indices(sampler, instance.n, k, trials, np.linalg.norm(phi, axis=1))
    y = instance.targets(trials)
    x = _start(instance, x0, len(trials))
    rows = np.arange(len(trials))
    errors = np.empty((len(trials), k + 1))
    errors[:, 0] = np.linalg.norm(x - instance.x_star, axis=1)
    alive = np.ones(len(trials), dtype=bool)
    diverged: dict[int, int] = {}
    for t in range(k):
        i = idx[:, t]
        x = update(t, x, phi[i], y[rows, i])
        err = np.linalg.norm(x - instance.x_star, axis=1)
        bad = alive & ~(err <= DIVERGENCE_THRESHOLD)
        if bad.any():
            for r in np.nonzero(bad)[0]:
                diverged[trials[r]] = t + 1
                warnings.warn(f"trial {trials[r]} diverged at iteration {t + 1} "
                              f"(error {err[r]:.3g}); trial aborted", RuntimeWarning, stacklevel=3)
            alive &= ~bad
        err[~alive] = np.nan
        x[~alive] = np.nan
        errors[:, t + 1] = err
    return errors, x, diverged


def run_igm(
    instance: LeastSquaresInstance,
    sampler: SamplerConfig,
    k: int,
    trials=1,
    step_rule: StepRule = "constant",
    gamma: float | None = None,
    x0=None,
    enforce_stability: bool = True,
) -> SolverRun:
    """LMS: ``x_t = x_{t-1} - gamma_t a (a^T x_{t-1} - y)`` for ``k`` steps.

    ``constant`` uses ``gamma`` (default :func:`default_gamma`), which must
    be below ``1/max ||a_i||^2`` unless ``enforce_stability`` is off;
    ``harmonic`` uses ``gamma_t = 1/t``.
    """
    if step_rule == "constant":
        g = default_gamma(instance.Phi) if gamma is None else float(gamma)
        bound = 1.0 / float(np.max(np.einsum("ij,ij->i", instance.Phi, instance.Phi)))
        if not g > 0:
            raise InvalidInputError("step size must be positive")
        if enforce_stability and g >= bound:
            raise InvalidInputError(f"constant step {g:.6g} must be below 1/max||a_i||^2 = {bound:.6g}")
        steps = lambda t: g  # noqa: E731
    elif step_rule == "harmonic":
        g = None
        steps = lambda t: 1.0 / (t + 1)  # noqa: E731
    else:
        raise InvalidInputError(f"unknown IGM step rule {step_rule!r}")

    def update(t, x, a, y):
        resid = np.einsum("ij,ij->i", a, x) - y
        return x - (steps(t) * a) * resid[:, None]

    errors, x, div = _iterate(instance, sampler, k, trials, x0, update)
    return SolverRun("igm", sampler.scheme, step_rule, g, k, _as_trials(trials), errors, x, div)


def run_kaczmarz(
    instance: LeastSquaresInstance, sampler: SamplerConfig, k: int, trials=1, x0=None
) -> SolverRun:
    """``x_{t} = x_{t-1} + (y_i - phi_i^T x_{t-1}) / ||phi_i||^2 phi_i``.

    Zero rows have no projection; such steps leave the iterate unchanged
    and raise a warning.
    """
    norms2 = np.einsum("ij,ij->i", instance.Phi, instance.Phi)
    zero = norms2 == 0
    skipped = 0

    def update(t, x, a, y):
        nonlocal skipped
        n2 = np.einsum("ij,ij->i", a, a)
        ok = n2 > 0
        skipped += int(np.count_nonzero(~ok))
        scale = np.divide(y - np.einsum("ij,ij->i", a, x), n2, out=np.zeros_like(n2), where=ok)
        return x + scale[:, None] * a

    errors, x, div = _iterate(instance, sampler, k, trials, x0, update)
    if zero.any() and skipped:
        warnings.warn(f"skipped {skipped} steps on zero rows (projection undefined)",
                      RuntimeWarning, stacklevel=2)
    return SolverRun("kaczmarz", sampler.scheme, "kaczmarz-exact", 1.0, k, _as_trials(trials),
                     errors, x, div, skipped)


def kaczmarz_product_form(Phi, order: Sequence[int], e0) -> np.ndarray:
    """``prod_j (I - phi phi^T / ||phi||^2) e0`` over 0-based ``order``,
    first index applied first (explicit matrices, an oracle for the
    iteration)."""
    phi = np.asarray(Phi, dtype=float)
    d = phi.shape[1]
    p = np.eye(d)
    for i in order:
        f = phi[i]
        p = (np.eye(d) - np.outer(f, f) / (f @ f)) @ p
    return p @ np.asarray(e0, dtype=float)


class RiskTerms(NamedTuple):
    """Exact expected squared error after ``k`` LMS steps from ``x0``.

    ``variance_independent`` treats every step's noise as fresh (the
    expansion that sums ``||prod_{j > l} (I - gamma a a^T) a_l||^2``);
    ``variance_fixed`` keeps each row's noise fixed for the run, so repeated
    rows add coherently.  They coincide without replacement.
    """

    bias: float
    variance_independent: float
    variance_fixed: float

    @property
    def total_independent(self) -> float:
        return self.bias + self.variance_independent

    @property
    def total_fixed(self) -> float:
        return self.bias + self.variance_fixed


def igm_risk(instance: LeastSquaresInstance, gamma: float, k: int, scheme: str = WO,
             x0=None) -> RiskTerms:
    """Enumerate every index sequence of the scheme (uniform weights)."""
    scheme = SamplerConfig(scheme).scheme
    n, d = instance.n, instance.d
    if scheme == WO:
        if k > n:
            raise InvalidInputError("without-replacement risk needs k <= n")
        seqs = itertools.permutations(range(n), k)
        count = math.perm(n, k)
    elif scheme == WR:
        seqs = itertools.product(range(n), repeat=k)
        count = n**k
    else:
        raise InvalidInputError("risk enumeration supports the uniform schemes only")
    if count > ENUMERATION_CAP:
        raise EnumerationCapError(f"{count} sequences exceed the enumeration cap")
    a = instance.Phi
    e0 = (np.zeros(d) if x0 is None else np.asarray(x0, dtype=float)) - instance.x_star
    m = np.eye(d)[None] - gamma * np.einsum("ij,ik->ijk", a, a)
    bias = var_ind = var_fix = 0.0
    for seq in seqs:
        e = e0
        for i in seq:
            e = m[i] @ e
        bias += float(e @ e)
        suffix = np.eye(d)
        acc = np.zeros((n, d))
        for i in reversed(seq):
            v = suffix @ a[i]
            var_ind += float(v @ v)
            acc[i] += v
            suffix = suffix @ m[i]
        var_fix += float(np.sum(acc * acc))
    scale = instance.rho**2 * gamma**2
    return RiskTerms(bias / count, scale * var_ind / count, scale * var_fix / count)


class MomentMatrices(NamedTuple):
    Lambda: np.ndarray | None
    Delta: np.ndarray | None
    Lambda_n: np.ndarray | None
    Delta_n: np.ndarray | None


def moment_matrices(rows=None, distribution: str | None = None, d: int | None = None) -> MomentMatrices:
    """Empirical ``Lambda_n = mean a a^T``, ``Delta_n = mean ||a||^2 a a^T``
    and, for ``distribution="gaussian"``, the population values ``I`` and
    ``(d + 2) I``."""
    lam_n = delta_n = lam = delta = None
    if rows is not None:
        a = np.asarray(rows, dtype=float)
        if a.ndim != 2:
            raise InvalidInputError("rows must be an n x d array")
        outer = np.einsum("ij,ik->ijk", a, a)
        lam_n = outer.mean(axis=0)
        delta_n = (np.einsum("ij,ij->i", a, a)[:, None, None] * outer).mean(axis=0)
        d = a.shape[1] if d is None else d
    if distribution is not None:
        if distribution != "gaussian":
            raise InvalidInputError(f"no analytic moments for {distribution!r}")
        if d is None:
            raise InvalidInputError("analytic moments need the dimension d")
        lam, delta = np.eye(d), (d + 2) * np.eye(d)
    return MomentMatrices(lam, delta, lam_n, delta_n)
