"""With- and without-replacement expectations of matrix products.

Products follow the build order used throughout the package: for an index
sequence ``(i_1, ..., i_k)`` the product is ``A_{i_k} ... A_{i_2} A_{i_1}``,
i.e. the first index is applied first and every later factor multiplies
from the left.  The symmetric quadratic form of a sequence is
``P P^T = A_{i_k} ... A_{i_1} A_{i_1} ... A_{i_k}``.  Both expectations
average over every ordered index tuple, so reversing the convention would
not change any expectation; it only matters for
:func:`deterministic_product`.

Exact without-replacement values enumerate all ``n!/(n-k)!`` ordered tuples
of distinct indices (refused above :data:`ENUMERATION_CAP`).  Exact
with-replacement values use closed forms: ``(M_A)^k`` for plain products and
the recursion ``M_1 = mean(A_i^2)``, ``M_{t+1} = mean(A_i M_t A_i)`` for the
quadratic form.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Literal, Sequence

import numpy as np

from . import _rng
from .linalg import PSD_TOL, InvalidInputError, PsdMatrix, _asymmetry, jacobi_eigh, spectral_norm

__all__ = [
    "ENUMERATION_CAP",
    "DEFAULT_SAMPLES",
    "EnumerationCapError",
    "InvalidSpecError",
    "MatrixTuple",
    "ExpectationSpec",
    "ExpectationReport",
    "arithmetic_mean",
    "ordered_tuple_count",
    "ordered_index_tuples",
    "products_for_indices",
    "ordered_products",
    "expect_product",
    "expect_quadratic",
    "expect",
    "deterministic_product",
]

ENUMERATION_CAP = 10**6
DEFAULT_SAMPLES = 100_000

_CHUNK = 20_000
_SUB_EXPECTATION = 11

Scheme = Literal["with-replacement", "without-replacement"]
Form = Literal["plain", "quadratic"]
Method = Literal["exact", "monte-carlo"]


class InvalidSpecError(ValueError):
    """An expectation request that is inconsistent with its tuple."""


class EnumerationCapError(InvalidSpecError):
    """Exact enumeration would exceed :data:`ENUMERATION_CAP` tuples."""


class MatrixTuple:
    """Ordered collection ``(A_1, ..., A_n)`` of PSD matrices of one size.

    Construction symmetrises and certifies every matrix in one batched
    eigenvalue pass.  The stacked entries are available read-only as
    :attr:`stack` with shape ``(n, d, d)``.
    """

    __slots__ = ("_stack", "_min_eigs")

    def __init__(self, matrices):
        if isinstance(matrices, MatrixTuple):
            self._stack, self._min_eigs = matrices._stack, matrices._min_eigs
            return
        mats = [np.asarray(m, dtype=float) for m in matrices]
        if len({m.shape for m in mats}) > 1:
            raise InvalidInputError("all matrices in a tuple must share one dimension")
        stack = np.asarray(mats, dtype=float)
        if stack.ndim != 3 or stack.shape[0] < 1:
            raise InvalidInputError("a matrix tuple needs n >= 1 square matrices of equal size")
        if stack.shape[1] != stack.shape[2] or stack.shape[1] < 1:
            raise InvalidInputError(f"matrices must be square, got shape {stack.shape[1:]}")
        if not np.all(np.isfinite(stack)):
            raise InvalidInputError("matrix tuple has non-finite entries")
        for i, m in enumerate(stack):
            _asymmetry(m, label=f"matrix {i + 1}")
        stack = 0.5 * (stack + np.swapaxes(stack, 1, 2))
        w = jacobi_eigh(stack)
        scale = np.maximum(1.0, np.max(np.abs(w), axis=1))
        bad = np.nonzero(w[:, 0] < -PSD_TOL * scale)[0]
        if bad.size:
            i = int(bad[0])
            raise InvalidInputError(
                f"matrix {i + 1} is not positive semidefinite (min eigenvalue {w[i, 0]:.3g})"
            )
        stack.setflags(write=False)
        self._stack = stack
        self._min_eigs = w[:, 0]

    @property
    def stack(self) -> np.ndarray:
        return self._stack

    @property
    def n(self) -> int:
        return self._stack.shape[0]

    @property
    def d(self) -> int:
        return self._stack.shape[1]

    @property
    def items(self) -> tuple[PsdMatrix, ...]:
        return tuple(
            PsdMatrix._certified(self._stack[i], self._min_eigs[i]) for i in range(self.n)
        )

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i) -> np.ndarray:
        return self._stack[i]

    def __repr__(self) -> str:
        return f"MatrixTuple(n={self.n}, d={self.d})"


def _as_tuple(t) -> MatrixTuple:
    return t if isinstance(t, MatrixTuple) else MatrixTuple(t)


@dataclass(frozen=True)
class ExpectationSpec:
    """What to average and how.

    ``seed`` and ``trial`` address the Monte Carlo stream: sample ``s``
    depends only on ``(seed, trial, s)``.
    """

    k: int
    form: Form = "plain"
    scheme: Scheme = "without-replacement"
    method: Method = "exact"
    samples: int = DEFAULT_SAMPLES
    seed: int = 0
    trial: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise InvalidSpecError(f"product length k must be >= 1, got {self.k}")
        if self.form not in ("plain", "quadratic"):
            raise InvalidSpecError(f"unknown form {self.form!r}")
        if self.scheme not in ("with-replacement", "without-replacement"):
            raise InvalidSpecError(f"unknown scheme {self.scheme!r}")
        if self.method not in ("exact", "monte-carlo"):
            raise InvalidSpecError(f"unknown method {self.method!r}")
        if self.method == "monte-carlo" and self.samples < 1:
            raise InvalidSpecError("monte-carlo needs samples >= 1")
        _rng.check_seed(self.seed)

    def validate_for(self, t: MatrixTuple) -> None:
        if self.scheme == "without-replacement" and self.k > t.n:
            raise InvalidSpecError(
                f"without-replacement products need k <= n (k={self.k}, n={t.n})"
            )
        if (
            self.method == "exact"
            and self.scheme == "without-replacement"
            and ordered_tuple_count(t.n, self.k) > ENUMERATION_CAP
        ):
            raise EnumerationCapError(
                f"{ordered_tuple_count(t.n, self.k)} ordered tuples exceed the enumeration cap "
                f"of {ENUMERATION_CAP}; use monte-carlo"
            )


@dataclass(frozen=True)
class ExpectationReport:
    mean_matrix: np.ndarray
    norm: float
    method_used: Method
    samples: int
    stderr_norm: float = 0.0
    spec: ExpectationSpec | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "norm": self.norm,
            "method": self.method_used,
            "samples": self.samples,
            "stderr_norm": self.stderr_norm,
            "matrix": self.mean_matrix.tolist(),
        }


def arithmetic_mean(t) -> np.ndarray:
    """``M_A = (1/n) sum A_i``."""
    return _as_tuple(t).stack.mean(axis=0)


def ordered_tuple_count(n: int, k: int) -> int:
    """Number of ordered k-tuples of distinct indices, ``n!/(n-k)!``."""
    return math.perm(n, k)


def ordered_index_tuples(n: int, k: int, chunk: int = _CHUNK) -> Iterator[np.ndarray]:
    """Chunks (``(m, k)`` int arrays) of all ordered distinct index tuples."""
    it = itertools.permutations(range(n), k)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.asarray(block, dtype=np.intp).reshape(len(block), k)


def products_for_indices(stack: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """``A_{i_k} ... A_{i_1}`` for every row ``(i_1, ..., i_k)`` of ``idx``."""
    p = stack[idx[:, 0]]
    for j in range(1, idx.shape[1]):
        p = stack[idx[:, j]] @ p
    return p


def ordered_products(t, k: int, cap: int = ENUMERATION_CAP) -> Iterator[np.ndarray]:
    """Chunks of the products over all ordered distinct k-tuples."""
    t = _as_tuple(t)
    if not 1 <= k <= t.n:
        raise InvalidSpecError(f"need 1 <= k <= n (k={k}, n={t.n})")
    if ordered_tuple_count(t.n, k) > cap:
        raise EnumerationCapError(
            f"{ordered_tuple_count(t.n, k)} ordered tuples exceed the enumeration cap of {cap}"
        )
    for idx in ordered_index_tuples(t.n, k):
        yield products_for_indices(t.stack, idx)


def _exact_without_replacement(t: MatrixTuple, k: int, quadratic: bool) -> np.ndarray:
    total = np.zeros((t.d, t.d))
    for p in ordered_products(t, k):
        if quadratic:
            total += np.einsum("bij,bkj->ik", p, p)
        else:
            total += p.sum(axis=0)
    return total / ordered_tuple_count(t.n, k)


def _exact_with_replacement(t: MatrixTuple, k: int, quadratic: bool) -> np.ndarray:
    a = t.stack
    if not quadratic:
        return np.linalg.matrix_power(a.mean(axis=0), k)
    m = np.einsum("bij,bjk->ik", a, a) / t.n
    for _ in range(k - 1):
        m = np.einsum("bij,jk,bkl->il", a, m, a) / t.n
    return m


def _sample_indices(t: MatrixTuple, spec: ExpectationSpec, start: int, count: int) -> np.ndarray:
    n, k = t.n, spec.k
    if spec.scheme == "with-replacement":
        u = _rng.uniform_block(spec.seed, start, count, k, trial=spec.trial, sub=_SUB_EXPECTATION)
        return np.minimum((u * n).astype(np.intp), n - 1)
    u = _rng.uniform_block(spec.seed, start, count, n, trial=spec.trial, sub=_SUB_EXPECTATION)
    return np.argsort(u, axis=1, kind="stable")[:, :k]


def _monte_carlo(t: MatrixTuple, spec: ExpectationSpec, quadratic: bool):
    total = np.zeros((t.d, t.d))
    norms = np.empty(spec.samples)
    for start in range(0, spec.samples, _CHUNK):
        count = min(_CHUNK, spec.samples - start)
        p = products_for_indices(t.stack, _sample_indices(t, spec, start, count))
        pn = np.atleast_1d(spectral_norm(p))
        if quadratic:
            total += np.einsum("bij,bkj->ik", p, p)
            norms[start:start + count] = pn**2
        else:
            total += p.sum(axis=0)
            norms[start:start + count] = pn
    mean = total / spec.samples
    stderr = float(norms.std(ddof=1) / math.sqrt(spec.samples)) if spec.samples > 1 else 0.0
    return mean, stderr


def expect(t, spec: ExpectationSpec) -> ExpectationReport:
    """Evaluate the expectation described by ``spec`` on tuple ``t``."""
    t = _as_tuple(t)
    spec.validate_for(t)
    quadratic = spec.form == "quadratic"
    if spec.method == "exact":
        if spec.scheme == "without-replacement":
            mean = _exact_without_replacement(t, spec.k, quadratic)
        else:
            mean = _exact_with_replacement(t, spec.k, quadratic)
        if quadratic:
            mean = 0.5 * (mean + mean.T)
        return ExpectationReport(mean, spectral_norm(mean), "exact", 0, 0.0, spec)
    mean, stderr = _monte_carlo(t, spec, quadratic)
    if quadratic:
        mean = 0.5 * (mean + mean.T)
    return ExpectationReport(mean, spectral_norm(mean), "monte-carlo", spec.samples, stderr, spec)


def expect_product(t, spec: ExpectationSpec) -> ExpectationReport:
    """Expectation of the plain k-fold product ``A_{i_k} ... A_{i_1}``."""
    if spec.form != "plain":
        raise InvalidSpecError("expect_product needs form='plain'")
    return expect(t, spec)


def expect_quadratic(t, spec: ExpectationSpec) -> ExpectationReport:
    """Expectation of ``A_{i_k} ... A_{i_1} A_{i_1} ... A_{i_k}``."""
    if spec.form != "quadratic":
        raise InvalidSpecError("expect_quadratic needs form='quadratic'")
    return expect(t, spec)


def deterministic_product(t, order: Sequence[int]) -> np.ndarray:
    """``A_{order[-1]} ... A_{order[0]}`` with 1-based indices."""
    t = _as_tuple(t)
    idx = np.asarray(order, dtype=np.intp)
    if idx.ndim != 1 or idx.size == 0:
        raise InvalidInputError("order must be a non-empty index sequence")
    if np.any(idx < 1) or np.any(idx > t.n):
        raise InvalidInputError(f"order entries must lie in 1..{t.n}")
    return products_for_indices(t.stack, (idx - 1)[None, :])[0]
