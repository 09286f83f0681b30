"""The thirteen acceptance criteria as callable checks.

Every criterion takes a seed and a tolerance mapping (see
:data:`DEFAULT_TOLERANCES`; overriding an entry is how a negative control
is run) and returns a :class:`CriterionResult`.  Wall-clock budgets are part
of each criterion.
"""

from __future__ import annotations

import itertools
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from . import _rng
from .combinatorics import (
    bruteforce_frame_alpha,
    cosine_expansion_check,
    generating_polynomial_checks,
    lambda_series,
    rotational_invariance_check,
    subset_formula_check,
)
from .expectations import ExpectationSpec, MatrixTuple, arithmetic_mean, deterministic_product, expect
from .frames import frame_to_tuple, general_frame, harmonic_frame_2d
from .inequalities import (
    check_bhatia,
    check_bias_conjecture,
    check_variance_conjecture,
    conjecture_sweep,
    ncsos_witness_check,
    psd_order_check,
    random_psd_tuple,
)
from .linalg import spectral_norm
from .randmat import (
    EnsembleSpec,
    EntryDistribution,
    fourth_moment_entry,
    jensen_moment_check,
    mc_entry_pair_moment,
    mc_mean_moment,
    mc_square_moment,
    wishart_gap_bounds,
    wishart_grid_check,
    zeta,
)
from .solvers.epoch_comparison import run_epoch_comparison
from .solvers.problems import (
    scalar_mean_errors,
    weighted_error_without_replacement,
    weighted_expected_error_with_replacement,
)

__all__ = ["DEFAULT_TOLERANCES", "CriterionResult", "CRITERIA", "run_criterion", "run_all",
           "format_result", "band_ok"]

DEFAULT_TOLERANCES: dict[str, float] = {
    "c1_harmonic_tol": 1e-10,
    "c1_general_tol": 1e-9,
    "c2_tol": 1e-10,
    "c3_match_tol": 1e-9,
    "c3_alpha3_tol": 1e-12,
    "c3_offdiag_tol": 1e-12,
    "c4_bound": 1.0,
    "c4_tail": 0.1,
    "c5_pairs": 1000,
    "c5_tol": 1e-9,
    "c6_mg_tol": 1e-12,
    "c6_norm_tol": 1e-2,
    "c7_samples": 100_000,
    "c7_band": 4.0,
    "c8_tol": 1e-12,
    "c9_tuples": 10_000,
    "c10_tol": 1e-9,
    "c11_trials": 100,
    "c12_trials": 100_000,
    "c12_band": 4.0,
    "c12_exact_tol": 1e-12,
    "c13_diag_tol": 1e-12,
}

_SUB_ACCEPT = 61


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "seconds": round(self.seconds, 3), "budget_seconds": self.budget,
                "details": self.details}


def band_ok(estimate, expected, stderr, band: float, floor: float = 1e-12) -> bool:
    """``|estimate - expected| <= band * stderr`` entrywise, with an absolute
    ``floor * max(1, |expected|)`` for estimates of zero variance."""
    est, exp_, se = (np.asarray(v, dtype=float) for v in (estimate, expected, stderr))
    return bool(np.all(np.abs(est - exp_) <= band * se + floor * np.maximum(1.0, np.abs(exp_))))


# 1 ------------------------------------------------------------------------

def c1_tight_frames(seed: int, tol: Mapping) -> dict:
    worst_h = max(
        float(np.linalg.norm(harmonic_frame_2d(n).frame_operator() - 0.5 * np.eye(2)))
        for n in range(3, 65)
    )
    worst_g = max(general_frame(d, n).tightness_residual() for d in (3, 4, 5) for n in range(d, 65))
    return {"ok": worst_h <= tol["c1_harmonic_tol"] and worst_g <= tol["c1_general_tol"],
            "max_harmonic_residual": worst_h, "max_general_residual": worst_g}


# 2 ------------------------------------------------------------------------

def c2_deterministic_violation(seed: int, tol: Mapping) -> dict:
    worst_norm = worst_ratio = 0.0
    all_above_one = True
    for n in range(3, 33):
        t = frame_to_tuple(harmonic_frame_2d(n))
        prod_norm = spectral_norm(deterministic_product(t, range(1, n + 1)))
        target = math.cos(math.pi / n) ** (n - 1)
        ratio = prod_norm / spectral_norm(np.linalg.matrix_power(arithmetic_mean(t), n))
        ratio_target = 2.0**n * target
        worst_norm = max(worst_norm, abs(prod_norm - target))
        worst_ratio = max(worst_ratio, abs(ratio - ratio_target) / ratio_target)
        all_above_one &= ratio > 1.0
    return {"ok": worst_norm <= tol["c2_tol"] and worst_ratio <= tol["c2_tol"] and all_above_one,
            "max_norm_error": worst_norm, "max_ratio_rel_error": worst_ratio}


# 3 ------------------------------------------------------------------------

def c3_alpha_crosscheck(seed: int, tol: Mapping) -> dict:
    rows = {}
    ok = True
    for n in range(3, 8):
        alpha = bruteforce_frame_alpha(n, tol=tol["c3_offdiag_tol"])
        lam = lambda_series(n)
        m = expect(frame_to_tuple(harmonic_frame_2d(n)), ExpectationSpec(n)).mean_matrix
        offdiag = max(abs(m[0, 1]), abs(m[1, 0]))
        match = abs(abs(alpha) * 2.0**n - abs(lam))
        ok &= match <= tol["c3_match_tol"] and offdiag <= tol["c3_offdiag_tol"]
        ok &= abs(alpha) <= 2.0**-n
        rows[n] = {"alpha": alpha, "lambda": lam, "abs_match_error": match, "offdiag": offdiag}
    ok &= abs(rows[3]["alpha"] + 1.0 / 16.0) <= tol["c3_alpha3_tol"]
    return {"ok": bool(ok), "per_n": rows}


# 4 ------------------------------------------------------------------------

def c4_lambda_decay(seed: int, tol: Mapping) -> dict:
    values = [abs(lambda_series(n)) for n in range(3, 201)]
    tail = abs(lambda_series(200))
    return {"ok": max(values) <= tol["c4_bound"] and tail <= tol["c4_tail"],
            "max_abs_lambda": max(values), "abs_lambda_200": tail}


# 5 ------------------------------------------------------------------------

def c5_two_matrix_suite(seed: int, tol: Mapping) -> dict:
    failures = {"bhatia": 0, "bias": 0, "variance": 0, "ncsos": 0}
    pairs = int(tol["c5_pairs"])
    for i in range(pairs):
        rng = _rng.trial_generator(seed, trial=i, sub=_SUB_ACCEPT)
        d = int(rng.integers(1, 7))
        k = min(int(rng.integers(1, 5)), 2)  # without replacement k <= n = 2
        t = random_psd_tuple(rng, 2, d)
        a, b = t.stack
        checks = {
            "bhatia": check_bhatia(a, b),
            "bias": check_bias_conjecture(t, k),
            "variance": check_variance_conjecture(t, k),
        }
        for name, v in checks.items():
            if v.lhs > v.rhs + tol["c5_tol"] * max(1.0, abs(v.rhs)):
                failures[name] += 1
        if not ncsos_witness_check(a, b):
            failures["ncsos"] += 1
    return {"ok": not any(failures.values()), "pairs": pairs, "failures": failures}


# 6 ------------------------------------------------------------------------

TRIPLE = [[[7.0, 0.0], [0.0, 0.0]], [[1.0, 1.0], [1.0, 1.0]], [[1.0, 1.0], [1.0, 1.0]]]


def c6_three_matrix_counterexample(seed: int, tol: Mapping) -> dict:
    t = MatrixTuple(TRIPLE)
    m_g = expect(t, ExpectationSpec(3)).mean_matrix
    m_a3 = np.linalg.matrix_power(arithmetic_mean(t), 3)
    order = psd_order_check(m_g, m_a3)
    expected_mg = np.array([[35.0 / 3.0, 7.0], [7.0, 7.0 / 3.0]])
    # reference norms from the closed-form 2x2 matrices
    ref_mg = float(np.max(np.abs(np.linalg.eigvalsh(expected_mg))))
    ref_a3 = float(np.max(np.abs(np.linalg.eigvalsh(np.array([[809.0, 214.0], [214.0, 60.0]]) / 27.0))))
    n_g, n_a = spectral_norm(m_g), spectral_norm(m_a3)
    ok = (not order.holds and order.min_eig < 0
          and float(np.max(np.abs(m_g - expected_mg))) <= tol["c6_mg_tol"]
          and abs(n_g - ref_mg) <= tol["c6_norm_tol"] and abs(n_a - ref_a3) <= tol["c6_norm_tol"]
          and n_g <= n_a)
    return {"ok": bool(ok), "psd_order_holds": order.holds, "witness_eigenvalue": order.min_eig,
            "norm_M_G": n_g, "norm_M_A_cubed": n_a}


# 7 ------------------------------------------------------------------------

def c7_random_matrix_moments(seed: int, tol: Mapping) -> dict:
    samples, band = int(tol["c7_samples"]), tol["c7_band"]
    failures = []
    for kind in ("gaussian", "rademacher", "uniform-symmetric"):
        dist = EntryDistribution(kind)
        for r, d in itertools.product((1, 2, 3), repeat=2):
            spec = EnsembleSpec(d, r, 1, dist, seed)
            m1 = mc_mean_moment(spec, samples)
            m2 = mc_square_moment(spec, samples)
            if not band_ok(m1.mean, r * dist.sigma**2 * np.eye(d), m1.stderr, band):
                failures.append(f"E[A] {kind} r={r} d={d}")
            if not band_ok(m2.mean, zeta(spec) * np.eye(d), m2.stderr, band):
                failures.append(f"E[A^2] {kind} r={r} d={d}")
            patterns = [(0, 0, 0, 0)]
            if d >= 2:
                patterns += [(0, 1, 0, 1), (0, 0, 1, 1), (0, 0, 0, 1)]
            if d >= 3:
                patterns += [(0, 1, 0, 2)]
            for pat in patterns:
                est = mc_entry_pair_moment(spec, pat, samples)
                if not band_ok(est.mean, fourth_moment_entry(spec, pat), est.stderr, band):
                    failures.append(f"pattern {pat} {kind} r={r} d={d}")
    jensen = jensen_moment_check(EntryDistribution("gaussian"), 2, samples, seed)
    strict = jensen.lhs < jensen.rhs - band * jensen.stderr
    return {"ok": not failures and strict, "failures": failures,
            "jensen_p2": {"lhs": jensen.lhs, "rhs": jensen.rhs, "stderr": jensen.stderr}}


# 8 ------------------------------------------------------------------------

def c8_quadratic_recursion(seed: int, tol: Mapping) -> dict:
    worst = 0.0
    for i in range(20):
        t = random_psd_tuple(_rng.trial_generator(seed, trial=i, sub=_SUB_ACCEPT + 1), 3, 2)
        rec = expect(t, ExpectationSpec(3, "quadratic", "with-replacement")).mean_matrix
        total = np.zeros((2, 2))
        for seq in itertools.product(range(3), repeat=3):
            p = np.eye(2)
            for j in seq:
                p = t.stack[j] @ p
            total += p @ p.T
        brute = total / 27.0
        worst = max(worst, float(np.max(np.abs(rec - brute))) / max(1.0, spectral_norm(brute)))
    return {"ok": worst <= tol["c8_tol"], "max_rel_error": worst}


# 9 ------------------------------------------------------------------------

def c9_conjecture_sweep(seed: int, tol: Mapping, ledger_path=None) -> dict:
    tmp = None
    if ledger_path is None:
        tmp = tempfile.TemporaryDirectory()
        ledger_path = Path(tmp.name) / "violations.jsonl"
    ledger_path = Path(ledger_path)
    before = ledger_path.read_text().count("\n") if ledger_path.exists() else 0
    report = conjecture_sweep(int(tol["c9_tuples"]), 5, 4, seed, ledger_path=ledger_path)
    after = ledger_path.read_text().count("\n") if ledger_path.exists() else 0
    serialized = after - before == report.violation_count
    out = {"ok": serialized, "counts": report.counts, "violations": report.violation_count,
           "ledger": str(ledger_path) if tmp is None else None, "finding": report.violation_count > 0}
    if tmp is not None:
        tmp.cleanup()
    return out


# 10 -----------------------------------------------------------------------

def c10_combinatorial_identities(seed: int, tol: Mapping) -> dict:
    rng = _rng.trial_generator(seed, sub=_SUB_ACCEPT + 2)
    cos_ok = all(
        cosine_expansion_check(rng.uniform(0, 2 * math.pi, int(rng.integers(2, 11))), tol["c10_tol"]).holds
        for _ in range(100)
    )
    subset_ok = True
    for n in range(2, 8):
        for _ in range(3):
            phis = rng.uniform(0, 2 * math.pi, n)
            phis[-1] = phis[0]
            subset_ok &= subset_formula_check(phis, tol["c10_tol"]).holds
    reports = [generating_polynomial_checks(n) for n in range(3, 11)]
    poly_ok = all(r.identity_holds and r.integral and r.counts_match for r in reports)
    scalar = max(r.scalar_max_error for r in reports)
    rot_ok = all(rotational_invariance_check(n) for n in range(1, 11))
    return {"ok": bool(cos_ok and subset_ok and poly_ok and scalar <= tol["c10_tol"] and rot_ok),
            "cosine": cos_ok, "subset": bool(subset_ok), "polynomial": poly_ok,
            "scalar_max_error": scalar, "rotational_invariance": rot_ok}


# 11 -----------------------------------------------------------------------

def c11_epoch_comparison(seed: int, tol: Mapping) -> dict:
    results = run_epoch_comparison(trials=int(tol["c11_trials"]), seed=seed)
    panels = [r.to_dict() for r in results]
    return {"ok": all(p["wo_not_worse"] for p in panels), "panels": panels}


# 12 -----------------------------------------------------------------------

def c12_scalar_examples(seed: int, tol: Mapping) -> dict:
    rng = _rng.trial_generator(seed, sub=_SUB_ACCEPT + 3)
    worst_wo = 0.0
    for _ in range(20):
        y = rng.normal(0.0, 3.0, int(rng.integers(1, 30)))
        err = scalar_mean_errors(y, "wo", 50, seed)
        worst_wo = max(worst_wo, float(np.max(np.abs(err))) / max(1.0, float(np.max(np.abs(y)))))
    y = rng.normal(0.0, 1.0, 8)
    trials = int(tol["c12_trials"])
    sq = scalar_mean_errors(y, "wr", trials, seed) ** 2
    mse, se = float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(trials))
    target = float(y.var()) / y.size
    mse_ok = abs(mse - target) <= tol["c12_band"] * se
    weighted_ok = True
    for _ in range(100):
        betas = rng.uniform(0.1, 5.0, int(rng.integers(1, 10)))
        gamma = rng.uniform(0.01, 0.99) / betas.max()
        yv = rng.normal()
        weighted_ok &= (weighted_error_without_replacement(betas, yv, gamma)
                        <= weighted_expected_error_with_replacement(betas, yv, gamma) * (1 + 1e-12))
    return {"ok": bool(worst_wo <= tol["c12_exact_tol"] and mse_ok and weighted_ok),
            "max_wo_error": worst_wo, "wr_mse": mse, "wr_mse_target": target, "wr_mse_stderr": se,
            "weighted_wo_le_wr": bool(weighted_ok)}


# 13 -----------------------------------------------------------------------

def c13_wishart_formulas(seed: int, tol: Mapping) -> dict:
    b = wishart_gap_bounds(1, 1, 1, 1.0)
    bad = wishart_grid_check(10, 10, 10)
    finite = all(
        math.isfinite(wishart_gap_bounds(k, r, d).log_ratio)
        for k, r, d in itertools.product(range(1, 11), repeat=3)
    )
    ok = abs(b.diag_moment_lower_bound - 3.0) <= tol["c13_diag_tol"] and not bad and finite
    return {"ok": ok, "diag_bound_111": b.diag_moment_lower_bound, "ratio_bound_111": b.ratio_lower_bound,
            "grid_failures": bad}


CRITERIA: dict[int, tuple[str, float, Callable]] = {
    1: ("tight-frame identities", 5.0, c1_tight_frames),
    2: ("deterministic ordering violation", 1.0, c2_deterministic_violation),
    3: ("harmonic-frame alpha brute force vs series", 30.0, c3_alpha_crosscheck),
    4: ("lambda series decay", 1.0, c4_lambda_decay),
    5: ("two-matrix inequality suite", 30.0, c5_two_matrix_suite),
    6: ("three-matrix PSD-order counterexample", 1.0, c6_three_matrix_counterexample),
    7: ("random-matrix moments", 60.0, c7_random_matrix_moments),
    8: ("with-replacement quadratic recursion", 1.0, c8_quadratic_recursion),
    9: ("conjecture sweep with violation ledger", 600.0, c9_conjecture_sweep),
    10: ("trigonometric and generating-function identities", 60.0, c10_combinatorial_identities),
    11: ("solver epoch comparison", 60.0, c11_epoch_comparison),
    12: ("scalar toy problems", 30.0, c12_scalar_examples),
    13: ("Gaussian moment bound formulas", 1.0, c13_wishart_formulas),
}


def run_criterion(number: int, seed: int = 0, tolerances: Mapping | None = None,
                  **kwargs) -> CriterionResult:
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    title, budget, fn = CRITERIA[number]
    t0 = time.perf_counter()
    details = fn(seed, tol, **kwargs)
    seconds = time.perf_counter() - t0
    ok = bool(details.pop("ok")) and seconds <= budget
    return CriterionResult(number, title, ok, seconds, budget, details)


def run_all(seed: int = 0, tolerances: Mapping | None = None, ledger_path=None,
            skip: set[int] = frozenset()) -> list[CriterionResult]:
    out = []
    for number in CRITERIA:
        if number in skip:
            continue
        extra = {"ledger_path": ledger_path} if number == 9 else {}
        out.append(run_criterion(number, seed, tolerances, **extra))
    return out


def format_result(r: CriterionResult) -> str:
    return f"[{'PASS' if r.passed else 'FAIL'}] criterion {r.number:2d}: {r.title} ({r.seconds:.2f} s)"
