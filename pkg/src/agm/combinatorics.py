"""Combinatorial identities behind the harmonic-frame mean.

The harmonic frame ``a_j = (cos(pi j/n), sin(pi j/n))`` has a
symmetrised full product ``(1/n!) sum_sigma A_sigma(n) ... A_sigma(1)``
equal to ``alpha(n) I``.  Three routes to ``alpha`` live here:

* brute force over all ``n!`` orderings (:func:`bruteforce_frame_alpha`);
* the terminating hypergeometric series, ``2^n alpha(n) = lambda(n)``
  (:func:`lambda_series`), summed in exact rational arithmetic because the
  alternating terms cancel catastrophically in floating point;
* graded subset counts ``q_{k,m}`` (:func:`frame_alpha_from_counts`).

Plus the cosine-product expansion, its permutation-averaged subset form,
the integer generating polynomial ``F_n(x, y) = prod_i (1 + w^i x + w^-i y)``
with ``w = exp(2 pi i/n)``, and Maclaurin's symmetric-mean chain.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .expectations import ExpectationSpec, expect
from .frames import frame_to_tuple, harmonic_frame_2d
from .linalg import InvalidInputError

__all__ = [
    "maclaurin_means",
    "maclaurin_chain_holds",
    "lambda_series_exact",
    "lambda_series",
    "lambda_closed_form",
    "LambdaValue",
    "lambda_value",
    "bruteforce_frame_alpha",
    "graded_counts",
    "frame_alpha_from_counts",
    "IdentityCheck",
    "cosine_product",
    "cosine_subset_sum",
    "cosine_normalisation_offset",
    "cosine_expansion_check",
    "subset_formula_check",
    "generating_polynomial",
    "PolynomialReport",
    "generating_polynomial_checks",
    "rotational_invariance_check",
]


# ---------------------------------------------------------------- Maclaurin

def maclaurin_means(xs: Sequence[float]) -> np.ndarray:
    """Normalised elementary symmetric means ``s_k = e_k / C(n, k)``, k = 1..n."""
    x = np.asarray(xs, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InvalidInputError("need a non-empty vector")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise InvalidInputError("Maclaurin means need strictly positive values")
    n = x.size
    e = np.zeros(n + 1)
    e[0] = 1.0
    for v in x:
        e[1:] = e[1:] + v * e[:-1]
    return np.array([e[k] / math.comb(n, k) for k in range(1, n + 1)])


def maclaurin_chain_holds(xs: Sequence[float], tol: float = 1e-12) -> bool:
    """``s_1 >= s_2^(1/2) >= ... >= s_n^(1/n)`` up to relative ``tol``."""
    s = maclaurin_means(xs)
    roots = s ** (1.0 / np.arange(1, s.size + 1))
    return bool(np.all(roots[1:] <= roots[:-1] * (1.0 + tol)))


# ------------------------------------------------------------------ lambda

def lambda_series_exact(n: int) -> Fraction:
    """Terminating series with ``v(0) = 1`` and

    ``v(k+1)/v(k) = (k - n/2)(k - n/2 + 1/2)(k + 1) / ((k - n + 1)(k + 1/2)(k + 1))``

    summed exactly.  A numerator factor vanishes by ``k = floor(n/2)``.
    """
    if n < 3:
        raise InvalidInputError(f"lambda series needs n >= 3, got {n}")
    half = Fraction(n, 2)
    v, total = Fraction(1), Fraction(1)
    for k in range(n + 1):
        num = (k - half) * (k - half + Fraction(1, 2)) * (k + 1)
        if num == 0:
            break
        v *= num / ((k - n + 1) * (k + Fraction(1, 2)) * (k + 1))
        total += v
    return total


def lambda_series(n: int) -> float:
    return float(lambda_series_exact(n))


def lambda_closed_form(n: int) -> Fraction:
    """``sum_m (-1)^m n/(n-m) C(n-m, m) / C(2m, m)``, an independent form."""
    return sum(
        (Fraction((-1) ** m * n, n - m) * math.comb(n - m, m) / math.comb(2 * m, m)
         for m in range(n // 2 + 1)),
        Fraction(0),
    )


@dataclass(frozen=True)
class LambdaValue:
    """``series_value = lambda(n)``; ``alpha_bruteforce`` when ``n <= 7``.

    The signed relation is ``alpha = lambda(n) 2^-n``.
    """

    n: int
    series_value: float
    alpha_bruteforce: float | None = None

    @property
    def scaled_alpha(self) -> float | None:
        return None if self.alpha_bruteforce is None else self.alpha_bruteforce * 2.0**self.n

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "series_value": self.series_value,
            "series_exact": str(lambda_series_exact(self.n)),
            "alpha_bruteforce": self.alpha_bruteforce,
            "alpha_times_2^n": self.scaled_alpha,
            "abs_difference": None if self.alpha_bruteforce is None
            else abs(abs(self.scaled_alpha) - abs(self.series_value)),
        }


BRUTEFORCE_MAX_N = 7


def bruteforce_frame_alpha(n: int, tol: float = 1e-10) -> float:
    """``alpha`` with ``(1/n!) sum_sigma A_sigma(n)...A_sigma(1) = alpha I``.

    Enumerates all ``n!`` orderings of the planar harmonic frame's rank-one
    projectors and checks the average really is a multiple of ``I``.
    """
    if not 3 <= n <= BRUTEFORCE_MAX_N:
        raise InvalidInputError(f"brute force supports 3 <= n <= {BRUTEFORCE_MAX_N}, got {n}")
    m = expect(frame_to_tuple(harmonic_frame_2d(n)), ExpectationSpec(n)).mean_matrix
    alpha = 0.5 * (m[0, 0] + m[1, 1])
    dev = max(abs(m[0, 1]), abs(m[1, 0]), abs(m[0, 0] - m[1, 1]))
    if dev > tol * max(1.0, abs(alpha)):
        raise AssertionError(f"symmetrised product is not a multiple of I (deviation {dev:.3g})")
    return float(alpha)


def lambda_value(n: int, bruteforce: bool = True) -> LambdaValue:
    alpha = bruteforce_frame_alpha(n) if bruteforce and n <= BRUTEFORCE_MAX_N else None
    return LambdaValue(n, lambda_series(n), alpha)


# ---------------------------------------------------------- graded counts

def graded_counts(n: int) -> tuple[list[list[int]], list[list[int]]]:
    """Counts of disjoint ``X, Y`` in ``Z_n`` graded by ``sum X - sum Y mod n``.

    Returns ``(q, r)`` with ``q[k][m]`` for ``|X| = |Y| = m`` and
    ``r[k][m]`` for ``|X| = m + 1, |Y| = m``.  Exact integer dynamic
    programme over the elements of ``Z_n``: each one is skipped, put in
    ``X`` or put in ``Y``.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    # state[a][b][s]: |X| = a, |Y| = b, residue s
    state = [[[0] * n for _ in range(n + 1)] for _ in range(n + 1)]
    state[0][0][0] = 1
    for i in range(n):
        new = [[row[:] for row in plane] for plane in state]
        for a in range(n + 1):
            for b in range(n + 1 - a):
                for s, c in enumerate(state[a][b]):
                    if c:
                        if a < n:
                            new[a + 1][b][(s + i) % n] += c
                        if b < n:
                            new[a][b + 1][(s - i) % n] += c
        state = new
    half = n // 2
    q = [[state[m][m][k] for m in range(half + 1)] for k in range(n)]
    r = [[state[m + 1][m][k] if 2 * m + 1 <= n else 0 for m in range((n - 1) // 2 + 1)]
         for k in range(n)]
    return q, r


def frame_alpha_from_counts(n: int) -> float:
    """``alpha(n)`` from ``2^n alpha = sum_k c_k cos(2 pi k/n)``,
    ``c_k = sum_m q_{k,m} / C(2m, m)``."""
    q, _ = graded_counts(n)
    total = 0.0
    for k in range(n):
        c_k = sum(Fraction(q[k][m], math.comb(2 * m, m)) for m in range(len(q[k])))
        total += float(c_k) * math.cos(2.0 * math.pi * k / n)
    return total / 2.0**n


# ------------------------------------------------------ cosine expansions

class IdentityCheck(NamedTuple):
    holds: bool
    lhs: float
    rhs: float

    def __bool__(self) -> bool:
        return self.holds


def cosine_product(psis: Sequence[float]) -> float:
    """``T_n = prod_{i=1}^{n-1} cos(psi_i - psi_{i+1})``."""
    p = np.asarray(psis, dtype=float)
    return float(np.prod(np.cos(p[:-1] - p[1:])))


def cosine_subset_sum(psis: Sequence[float]) -> float:
    """Unnormalised alternating sum over interior index subsets.

    ``sum_{1 < i_1 < ... < i_k < n} cos(psi_1 - 2 psi_i1 + 2 psi_i2 - ...
    + (-1)^k 2 psi_ik + (-1)^(k+1) psi_n)``
    """
    p = np.asarray(psis, dtype=float)
    n = p.size
    if n < 2:
        raise InvalidInputError("need at least two angles")
    interior = range(1, n - 1)
    total = 0.0
    for k in range(n - 1):
        for sub in itertools.combinations(interior, k):
            arg = p[0] + (-1) ** (k + 1) * p[-1]
            for j, i in enumerate(sub):
                arg += 2.0 * (-1) ** (j + 1) * p[i]
            total += math.cos(arg)
    return total


def cosine_normalisation_offset() -> int:
    """Power-of-two offset ``c`` with ``T_n = 2^-(n + c) * subset sum``.

    Calibrated on the ``n = 2`` base case at zero angles, where both sides
    are single cosines.
    """
    ratio = cosine_subset_sum([0.0, 0.0]) / cosine_product([0.0, 0.0])
    return int(round(math.log2(ratio))) - 2


def cosine_expansion_check(psis: Sequence[float], tol: float = 1e-9) -> IdentityCheck:
    """Direct ``T_n`` against the calibrated subset expansion."""
    n = len(psis)
    if n < 2:
        raise InvalidInputError("need n >= 2")
    lhs = cosine_product(psis)
    rhs = cosine_subset_sum(psis) * 2.0 ** -(n + cosine_normalisation_offset())
    return IdentityCheck(abs(lhs - rhs) <= tol, lhs, rhs)


SUBSET_MAX_N = 9


def subset_formula_check(phis: Sequence[float], tol: float = 1e-9) -> IdentityCheck:
    """Permutation average of the cosine chain against its subset form.

    ``phis[0] == phis[-1]`` is the fixed boundary angle ``v``; the
    ``m = n - 2`` interior angles are permuted.  The average of
    ``T_n(v, phi_s(2), ..., phi_s(n-1), v)`` equals

    ``2^-m sum_{X, Y} C(|X|+|Y|, |Y|)^-1 cos(...)``

    over disjoint ``X, Y`` of interior indices with ``|X| - |Y|`` in
    ``{0, 1}``: the argument is ``2(sum_X - sum_Y)`` when the sizes are
    equal and ``2v - 2 sum_X + 2 sum_Y`` otherwise.
    """
    p = np.asarray(phis, dtype=float)
    n = p.size
    if n < 2:
        raise InvalidInputError("need n >= 2")
    if p[0] != p[-1]:
        raise InvalidInputError("subset formula needs phi_1 == phi_n")
    if n > SUBSET_MAX_N:
        raise InvalidInputError(f"direct enumeration supports n <= {SUBSET_MAX_N}")
    v, inner = p[0], p[1:-1]
    m = inner.size
    perms = list(itertools.permutations(range(m)))
    lhs = sum(cosine_product(np.concatenate(([v], inner[list(s)], [v]))) for s in perms) / len(perms)

    rhs = 0.0
    for labels in itertools.product((0, 1, 2), repeat=m):  # 0 unused, 1 in X, 2 in Y
        x = [inner[i] for i in range(m) if labels[i] == 1]
        y = [inner[i] for i in range(m) if labels[i] == 2]
        diff = sum(x) - sum(y)
        if len(x) == len(y):
            arg = 2.0 * diff
        elif len(x) == len(y) + 1:
            arg = 2.0 * v - 2.0 * diff
        else:
            continue
        rhs += math.cos(arg) / math.comb(len(x) + len(y), len(y))
    rhs /= 2.0**m
    return IdentityCheck(abs(lhs - rhs) <= tol, lhs, rhs)


# ---------------------------------------------------- generating polynomial

_INT_RESIDUAL = 1e-6
_INT_CAP = 2**63


def generating_polynomial(n: int) -> np.ndarray:
    """Integer coefficients ``C[a, b]`` of ``x^a y^b`` in ``F_n(x, y)``.

    Expanded in complex arithmetic, then rounded; every coefficient must
    lie within ``1e-6`` of an integer and fit in a signed 64-bit word.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    c = np.zeros((n + 1, n + 1), dtype=complex)
    c[0, 0] = 1.0
    for i in range(1, n + 1):
        w = cmath.exp(2j * math.pi * i / n)
        new = c.copy()
        new[1:, :] += w * c[:-1, :]
        new[:, 1:] += c[:, :-1] / w
        c = new
    rounded = np.rint(c.real)
    residual = float(np.max(np.abs(c - rounded)))
    if residual > _INT_RESIDUAL:
        raise ArithmeticError(f"generating polynomial is not integral (residual {residual:.3g})")
    if np.max(np.abs(rounded)) >= _INT_CAP:
        raise OverflowError("generating polynomial coefficient exceeds 64 bits")
    return rounded.astype(np.int64)


def _lucas_coefficient(n: int, k: int) -> int:
    # n/(n-k) C(n-k, k), an integer for 0 <= k <= n/2
    return n * math.comb(n - k, k) // (n - k)


def expected_generating_polynomial(n: int) -> np.ndarray:
    """``(-1)^(n+1) (x^n + y^n) + sum_k (-1)^k n/(n-k) C(n-k, k) (xy)^k``."""
    e = np.zeros((n + 1, n + 1), dtype=np.int64)
    for k in range(n // 2 + 1):
        e[k, k] += (-1) ** k * _lucas_coefficient(n, k)
    e[n, 0] += (-1) ** (n + 1)
    e[0, n] += (-1) ** (n + 1)
    return e


@dataclass(frozen=True)
class PolynomialReport:
    n: int
    integral: bool
    identity_holds: bool
    stated_form_holds: bool
    scalar_identity_holds: bool
    scalar_max_error: float
    counts_match: bool
    xy_coefficient: int

    @property
    def passed(self) -> bool:
        return self.integral and self.identity_holds and self.scalar_identity_holds and self.counts_match

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {**self.__dict__, "passed": self.passed}


def _scalar_identity(n: int, points: int = 20) -> float:
    worst = 0.0
    for y in np.linspace(-0.24, 3.0, points):
        lhs = sum(_lucas_coefficient(n, k) * y**k for k in range(n // 2 + 1))
        s = math.sqrt(1.0 + 4.0 * y)
        rhs = ((1.0 - s) / 2.0) ** n + ((1.0 + s) / 2.0) ** n
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return worst


def generating_polynomial_checks(n: int) -> PolynomialReport:
    """Integrality and closed form of ``F_n``, plus the scalar identity.

    The ``(xy)^m`` coefficients are also read off the graded counts.

    ``stated_form_holds`` records whether ``F_n(x, -y)`` equals
    ``x^n + (-y)^n - sum_k n/(n-k) C(n-k, k) (xy)^k``; it does not (the
    constant term alone is ``+1``), and is reported, not required.
    """
    if not 3 <= n <= 10:
        raise InvalidInputError(f"generating polynomial checks support 3 <= n <= 10, got {n}")
    c = generating_polynomial(n)
    identity = bool(np.array_equal(c, expected_generating_polynomial(n)))

    # F_n(x, -y) against the alternative closed form
    signs = (-1) ** np.arange(n + 1)
    flipped = c * signs[None, :]
    stated = np.zeros_like(c)
    stated[n, 0] += 1
    stated[0, n] += (-1) ** n
    for k in range(n // 2 + 1):
        stated[k, k] -= _lucas_coefficient(n, k)
    stated_ok = bool(np.array_equal(flipped, stated))

    err = _scalar_identity(n)
    q, _ = graded_counts(n)
    w = np.exp(2j * np.pi * np.arange(n) / n)
    counts_ok = all(
        abs(sum(q[k][m] * w[k] for k in range(n)) - c[m, m]) < 1e-9 for m in range(n // 2 + 1)
    )
    return PolynomialReport(n, True, identity, stated_ok, err <= 1e-9, err, counts_ok,
                            int(flipped[1, 1]))


def rotational_invariance_check(n: int) -> bool:
    """Every ``r_{., m}`` column is constant in the residue ``k``."""
    if not 1 <= n <= 10:
        raise InvalidInputError(f"rotational invariance check supports n <= 10, got {n}")
    _, r = graded_counts(n)
    return all(len({r[k][m] for k in range(n)}) == 1 for m in range(len(r[0])))
