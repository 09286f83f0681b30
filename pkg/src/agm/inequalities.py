"""Checkers for the matrix arithmetic-geometric mean inequalities.

Each checker returns an :class:`InequalityVerdict` for a claim of the form
``lhs <= rhs``.  Conjectured inequalities are reported, never asserted.
Proven bounds (the worst-case ``d^k`` factor and the two-matrix cases) are
expected to hold on every input.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from . import _rng
from .expectations import (
    DEFAULT_SAMPLES,
    ExpectationSpec,
    MatrixTuple,
    arithmetic_mean,
    deterministic_product,
    expect,
    ordered_products,
    products_for_indices,
    _sample_indices,
)
from .linalg import (
    InvalidInputError, PsdCheck, PsdMatrix, SymmetricMatrix, eigvalsh, is_psd, spectral_norm,
)

__all__ = [
    "CHECK_TOL",
    "MC_BAND",
    "InequalityVerdict",
    "NcsosWitness",
    "make_verdict",
    "check_bias_conjecture",
    "check_variance_conjecture",
    "check_strong_conjecture",
    "check_worst_case_bound",
    "check_bhatia",
    "ncsos_coefficients",
    "ncsos_witness_check",
    "psd_order_check",
    "symmetrized_order_check",
    "CONJECTURES",
    "run_checks",
    "random_psd_tuple",
    "SweepReport",
    "conjecture_sweep",
]

CHECK_TOL = 1e-9
MC_BAND = 4.0

Status = Literal["holds", "inconclusive", "violated"]
Method = Literal["exact", "monte-carlo"]

_SUB_SWEEP = 21


@dataclass(frozen=True)
class InequalityVerdict:
    """Outcome of a ``lhs <= rhs`` check.

    ``holds`` is ``lhs <= rhs + tol * max(1, |rhs|)`` (plus ``MC_BAND``
    standard errors for Monte Carlo estimates).  A pass that needed that
    slack is labelled ``inconclusive`` rather than ``holds``.
    """

    name: str
    lhs: float
    rhs: float
    holds: bool
    margin: float
    status: Status
    notes: str = ""
    stderr: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def make_verdict(
    name: str, lhs: float, rhs: float, notes: str = "", stderr: float = 0.0, tol: float = CHECK_TOL
) -> InequalityVerdict:
    lhs, rhs = float(lhs), float(rhs)
    slack = tol * max(1.0, abs(rhs)) + MC_BAND * stderr
    if lhs <= rhs:
        status: Status = "holds"
    elif lhs <= rhs + slack:
        status = "inconclusive"
    else:
        status = "violated"
    return InequalityVerdict(name, lhs, rhs, status != "violated", rhs - lhs, status, notes, stderr)


def _as_tuple(t) -> MatrixTuple:
    return t if isinstance(t, MatrixTuple) else MatrixTuple(t)


def _check_k(t: MatrixTuple, k: int) -> None:
    if not 1 <= k <= t.n:
        raise InvalidInputError(f"need 1 <= k <= n (k={k}, n={t.n})")


def _mean_power_norm(t: MatrixTuple, k: int) -> float:
    return spectral_norm(np.linalg.matrix_power(arithmetic_mean(t), k))


def check_bias_conjecture(
    t, k: int, method: Method = "exact", samples: int = DEFAULT_SAMPLES, seed: int = 0
) -> InequalityVerdict:
    """``||E_wo[prod A]|| <= ||E_wr[prod A]|| = ||M_A^k||``."""
    t = _as_tuple(t)
    _check_k(t, k)
    wo = expect(t, ExpectationSpec(k, "plain", "without-replacement", method, samples, seed))
    return make_verdict("bias", wo.norm, _mean_power_norm(t, k), f"k={k}, {wo.method_used}",
                        wo.stderr_norm)


def check_variance_conjecture(
    t, k: int, method: Method = "exact", samples: int = DEFAULT_SAMPLES, seed: int = 0
) -> InequalityVerdict:
    """Same comparison for the symmetric quadratic form ``P P^T``."""
    t = _as_tuple(t)
    _check_k(t, k)
    wo = expect(t, ExpectationSpec(k, "quadratic", "without-replacement", method, samples, seed))
    wr = expect(t, ExpectationSpec(k, "quadratic", "with-replacement", "exact"))
    return make_verdict("variance", wo.norm, wr.norm, f"k={k}, {wo.method_used}", wo.stderr_norm)


def check_strong_conjecture(
    t, k: int, method: Method = "exact", samples: int = DEFAULT_SAMPLES, seed: int = 0
) -> InequalityVerdict:
    """``E_wo[||prod A||^2] <= ||M_A||^(2k)``.

    For ``k < n`` this fails whenever the ``A_i`` differ (at ``k = 1`` it
    is Jensen's inequality reversed); the full-length case ``k = n`` is
    the one that generalises the two-matrix bound.
    """
    t = _as_tuple(t)
    _check_k(t, k)
    rhs = spectral_norm(arithmetic_mean(t)) ** (2 * k)
    if method == "exact":
        total, count = 0.0, 0
        for p in ordered_products(t, k):
            total += float(np.sum(np.atleast_1d(spectral_norm(p)) ** 2))
            count += p.shape[0]
        return make_verdict("strong", total / count, rhs, f"k={k}, exact")
    spec = ExpectationSpec(k, "plain", "without-replacement", "monte-carlo", samples, seed)
    sq = np.empty(samples)
    for start in range(0, samples, 20_000):
        cnt = min(20_000, samples - start)
        p = products_for_indices(t.stack, _sample_indices(t, spec, start, cnt))
        sq[start:start + cnt] = np.atleast_1d(spectral_norm(p)) ** 2
    se = float(sq.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return make_verdict("strong", float(sq.mean()), rhs, f"k={k}, monte-carlo", se)


def check_worst_case_bound(t, k: int | None = None, order: Sequence[int] | None = None) -> InequalityVerdict:
    """``||E_wo[prod A]|| <= d^k ||M_A^k||``; with ``order``, the product
    of the first ``k`` listed matrices (1-based) replaces the expectation."""
    t = _as_tuple(t)
    if k is None:
        if order is None:
            raise InvalidInputError("give k, order, or both")
        k = len(order)
    if order is None:
        _check_k(t, k)
        lhs = expect(t, ExpectationSpec(k)).norm
        notes = f"k={k}, E_wo"
    else:
        if len(order) < k:
            raise InvalidInputError(f"order has {len(order)} entries, need at least k={k}")
        lhs = spectral_norm(deterministic_product(t, list(order)[:k]))
        notes = f"k={k}, deterministic order"
    return make_verdict("worst-case", lhs, t.d**k * _mean_power_norm(t, k), notes)


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a if isinstance(a, SymmetricMatrix) else PsdMatrix(a), dtype=float)
    b = np.asarray(b if isinstance(b, SymmetricMatrix) else PsdMatrix(b), dtype=float)
    if a.shape != b.shape:
        raise InvalidInputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def check_bhatia(a, b) -> InequalityVerdict:
    """``||AB|| <= ||(A + B)/2||^2`` for PSD ``A, B``."""
    a, b = _pair(a, b)
    return make_verdict("bhatia", spectral_norm(a @ b), spectral_norm(0.5 * (a + b)) ** 2)


def ncsos_coefficients() -> np.ndarray:
    """Gram matrix of the Hermitian-squares certificate, indexed by words
    ``(1,1), (1,2), (2,1), (2,2)``."""
    return np.full((4, 4), -1.0 / 16.0) + np.eye(4) / 4.0


@dataclass(frozen=True)
class NcsosWitness:
    q_eigenvalues: np.ndarray
    identity_residual: float
    difference_min_eig: float
    passed: bool = field(default=False)

    def __bool__(self) -> bool:
        return self.passed


def ncsos_witness_check(a, b, tol: float = 1e-10) -> NcsosWitness:
    """Verify ``X_R - X_L = sum_{p,q} Q(p,q) A_p(2) A_p(1) A_q(1) A_q(2)``.

    ``X_L = ((A+B)/2)^4`` and ``X_R = (A^4 + A B^2 A + B A^2 B + B^4)/4``.
    The certificate passes when ``Q`` is PSD, the identity holds entrywise
    and the difference is itself PSD.
    """
    a, b = _pair(a, b)
    mats = (a, b)
    words = [(0, 0), (0, 1), (1, 0), (1, 1)]
    q = ncsos_coefficients()
    q_eigs = eigvalsh(q)
    half = 0.5 * (a + b)
    x_l = np.linalg.matrix_power(half, 4)
    x_r = 0.25 * (np.linalg.matrix_power(a, 4) + a @ b @ b @ a + b @ a @ a @ b
                  + np.linalg.matrix_power(b, 4))
    expansion = np.zeros_like(a)
    for i, p in enumerate(words):
        left = mats[p[1]] @ mats[p[0]]
        for j, w in enumerate(words):
            expansion += q[i, j] * (left @ mats[w[0]] @ mats[w[1]])
    diff = x_r - x_l
    scale = max(1.0, float(np.max(np.abs(x_r))))
    residual = float(np.max(np.abs(diff - expansion)))
    psd = is_psd(0.5 * (diff + diff.T))
    ok = bool(q_eigs[0] >= -1e-15 and residual <= tol * scale and psd.holds)
    return NcsosWitness(q_eigs, residual, psd.min_eig, ok)


def psd_order_check(lhs, rhs) -> PsdCheck:
    """``lhs <= rhs`` in the semidefinite order, i.e. ``rhs - lhs`` PSD."""
    lo = np.asarray(lhs, dtype=float)
    hi = np.asarray(rhs, dtype=float)
    if lo.shape != hi.shape:
        raise InvalidInputError(f"dimension mismatch: {lo.shape} vs {hi.shape}")
    diff = SymmetricMatrix(hi - lo)
    return is_psd(diff.entries)


def symmetrized_order_check(t, k: int | None = None) -> PsdCheck:
    """Is the k-fold symmetrised product below ``M_A^k`` in PSD order?

    ``k`` defaults to ``n`` (the full symmetrised geometric mean).
    """
    t = _as_tuple(t)
    k = t.n if k is None else k
    _check_k(t, k)
    m_g = expect(t, ExpectationSpec(k)).mean_matrix
    return psd_order_check(m_g, np.linalg.matrix_power(arithmetic_mean(t), k))


CONJECTURES = {
    "bias": check_bias_conjecture,
    "variance": check_variance_conjecture,
    "strong": check_strong_conjecture,
}


def run_checks(
    t, k: int, names: Iterable[str], method: Method = "exact", samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> dict[str, InequalityVerdict]:
    """Conjecture checkers by name (see :data:`CONJECTURES`)."""
    return {name: CONJECTURES[name](t, k, method, samples, seed) for name in names}


def random_psd_tuple(rng: np.random.Generator, n: int, d: int) -> MatrixTuple:
    """Random PSD tuple mixing full-rank and low-rank Gram matrices.

    Each ``A_i = c Z Z^T`` with ``Z`` of shape ``(d, r)``, ``r`` uniform on
    ``1..d+1`` and a log-normal scale ``c``; rank-one members make the
    tuple strongly noncommutative.
    """
    mats = []
    for _ in range(n):
        r = int(rng.integers(1, d + 2))
        z = rng.standard_normal((d, r))
        mats.append(math.exp(rng.normal(0.0, 0.5)) * (z @ z.T))
    return MatrixTuple(mats)


@dataclass
class SweepReport:
    tuples: int
    checks: int
    counts: dict[str, dict[str, int]]
    violations: list[dict]
    ledger_path: str | None = None

    @property
    def violation_count(self) -> int:
        return len(self.violations)

    def to_dict(self) -> dict:
        return {
            "tuples": self.tuples,
            "checks": self.checks,
            "counts": self.counts,
            "violations": self.violation_count,
            "ledger": self.ledger_path,
        }


def conjecture_sweep(
    count: int,
    max_n: int,
    max_d: int,
    seed: int,
    names: Sequence[str] = ("bias", "variance", "strong"),
    k: int | None = None,
    fixed_shape: bool = False,
    ledger_path=None,
) -> SweepReport:
    """Check the conjectures on ``count`` seeded random tuples.

    Tuple ``i`` comes from its own stream ``(seed, trial=i)``, so any
    single tuple can be regenerated.  With ``fixed_shape`` every tuple has
    ``n = max_n`` and ``d = max_d``; otherwise both are drawn uniformly
    from ``1..max``.  ``k`` defaults to a uniform draw on ``1..n``.
    Violations beyond tolerance are appended to ``ledger_path`` as JSON
    lines holding the full tuple.
    """
    from .io import append_jsonl, tuple_to_dict

    counts = {name: {"holds": 0, "inconclusive": 0, "violated": 0} for name in names}
    violations: list[dict] = []
    for i in range(count):
        rng = _rng.trial_generator(seed, trial=i, sub=_SUB_SWEEP)
        n = max_n if fixed_shape else int(rng.integers(1, max_n + 1))
        d = max_d if fixed_shape else int(rng.integers(1, max_d + 1))
        t = random_psd_tuple(rng, n, d)
        kk = min(k, n) if k is not None else int(rng.integers(1, n + 1))
        for name, v in run_checks(t, kk, names).items():
            counts[name][v.status] += 1
            if not v.holds:
                violations.append({
                    "inequality": name, "k": kk, "seed": seed, "index": i,
                    "verdict": v.to_dict(), "tuple": tuple_to_dict(t),
                })
    if ledger_path is not None and violations:
        append_jsonl(ledger_path, violations)
    return SweepReport(count, count * len(names), counts, violations,
                       None if ledger_path is None else str(ledger_path))
