import math

import numpy as np
import pytest

from agm.linalg import InvalidInputError, is_psd
from agm.randmat import (
    EnsembleSpec,
    EntryDistribution,
    classify_pattern,
    ensemble_bias_check,
    fourth_moment_entry,
    jensen_moment_check,
    mc_entry_pair_moment,
    mc_mean_moment,
    mc_quadratic_moment,
    mc_square_moment,
    sample_tuple,
    sample_tuples,
    wishart_gap_bounds,
    wishart_grid_check,
    wishart_intermediate_log,
    zeta,
)

DISTS = ["gaussian", "rademacher", "uniform-symmetric"]


def within(est, expected, band=4.0, floor=1e-12):
    err = np.abs(np.asarray(est.mean) - expected)
    return bool(np.all(err <= band * np.asarray(est.stderr) + floor * np.maximum(1, np.abs(expected))))


@pytest.mark.parametrize("kind", DISTS)
def test_entry_distribution_moments(kind):
    dist = EntryDistribution(kind, 1.5)
    u = np.random.default_rng(0).random(400_000)
    w = dist.from_uniform(u)
    assert abs(w.mean()) < 4 * w.std() / math.sqrt(w.size)
    assert w.var() == pytest.approx(1.5**2, rel=0.01)
    assert dist.xi4 >= dist.sigma**4
    w4 = w**4
    assert abs(w4.mean() - dist.xi4) <= 4 * w4.std() / math.sqrt(w.size) + 1e-9


def test_entry_distribution_validation():
    assert EntryDistribution().xi4 == 3.0
    assert EntryDistribution("rademacher").xi4 == 1.0
    with pytest.raises(InvalidInputError):
        EntryDistribution("cauchy")
    with pytest.raises(InvalidInputError):
        EntryDistribution(sigma=0.0)
    with pytest.raises(InvalidInputError):
        EnsembleSpec(0, 1, 1)


def test_sample_tuple_psd_and_deterministic():
    spec = EnsembleSpec(3, 2, 4, seed=8)
    t = sample_tuple(spec)
    assert all(is_psd(m).holds for m in t.stack)
    assert np.array_equal(t.stack, sample_tuple(spec).stack)
    a = sample_tuples(spec, 30)
    assert np.array_equal(a[10:20], sample_tuples(spec, 10, start=10))


def test_mean_moment():
    spec = EnsembleSpec(2, 3, 1, EntryDistribution("gaussian", 0.7), seed=1)
    assert within(mc_mean_moment(spec, 100_000), 3 * 0.49 * np.eye(2))


def test_gaussian_square_moment_is_wishart_value():
    spec = EnsembleSpec(2, 3, 1, seed=2)
    z = zeta(spec)
    assert z == pytest.approx(3 * (3 + 2 + 1))
    assert within(mc_square_moment(spec, 100_000), z * np.eye(2))


def test_zeta_examples():
    assert zeta(EnsembleSpec(1, 1, 1)) == pytest.approx(3.0)
    assert zeta(EnsembleSpec(3, 2, 1, EntryDistribution("rademacher"))) == pytest.approx(8.0)


def test_zeta_rademacher_monte_carlo_adjudicates():
    # r(r+d-2) + r xi4 = 8; the variant r(r+d-1) + r xi4 = 10 is excluded
    spec = EnsembleSpec(3, 2, 1, EntryDistribution("rademacher"), seed=3)
    est = mc_square_moment(spec, 50_000)
    diag = np.diag(est.mean)
    assert np.allclose(diag, 8.0, atol=4 * np.diag(est.stderr).max() + 1e-12)
    assert np.all(np.abs(diag - 10.0) > 4 * np.diag(est.stderr).max())


@pytest.mark.parametrize("kind", DISTS)
def test_zeta_consistency(kind):
    spec = EnsembleSpec(3, 2, 1, EntryDistribution(kind, 1.3), seed=4)
    est = mc_square_moment(spec, 100_000)
    dev = np.linalg.norm(est.mean - zeta(spec) * np.eye(3))
    assert dev <= 4 * np.linalg.norm(est.stderr) + 1e-9


def test_pattern_classification():
    assert classify_pattern(0, 0, 0, 0) == "same-pair-diagonal"
    assert classify_pattern(0, 1, 1, 0) == "same-pair-offdiagonal"
    assert classify_pattern(0, 0, 1, 1) == "distinct-diagonal"
    assert classify_pattern(0, 1, 0, 2) == "mismatched"


def test_fourth_moment_examples():
    g = EnsembleSpec(3, 2, 1, seed=5)
    rad = EnsembleSpec(3, 2, 1, EntryDistribution("rademacher"), seed=5)
    assert fourth_moment_entry(g, "mismatched") == 0.0
    assert fourth_moment_entry(g, "same-pair-diagonal") == pytest.approx(8.0)
    assert fourth_moment_entry(rad, "same-pair-offdiagonal") == pytest.approx(2.0)
    assert within(mc_entry_pair_moment(g, (1, 1, 1, 1), 100_000), 8.0)
    assert within(mc_entry_pair_moment(rad, (0, 2, 2, 0), 100_000), 2.0)
    with pytest.raises(InvalidInputError):
        fourth_moment_entry(g, "unknown")
    with pytest.raises(InvalidInputError):
        fourth_moment_entry(g, (0, 0, 0, 3))


@pytest.mark.parametrize("kind", DISTS)
@pytest.mark.parametrize("idx", [(0, 0, 0, 0), (0, 1, 0, 1), (0, 1, 1, 0), (0, 0, 1, 1), (0, 1, 1, 2), (0, 0, 0, 1)])
def test_fourth_moment_patterns_by_monte_carlo(kind, idx):
    spec = EnsembleSpec(3, 2, 1, EntryDistribution(kind), seed=6)
    assert within(mc_entry_pair_moment(spec, idx, 60_000), fourth_moment_entry(spec, idx))


@pytest.mark.parametrize("kind", ["gaussian", "rademacher"])
def test_quadratic_ensemble_is_zeta_power(kind):
    spec = EnsembleSpec(2, 2, 3, EntryDistribution(kind), seed=7)
    assert within(mc_quadratic_moment(spec, 3, 20_000), zeta(spec) ** 3 * np.eye(2))


@pytest.mark.parametrize("kind", ["gaussian", "rademacher"])
@pytest.mark.parametrize("d,r", [(1, 1), (2, 3), (3, 2), (3, 3)])
def test_ensemble_bias_side(kind, d, r):
    v = ensemble_bias_check(EnsembleSpec(d, r, 3, EntryDistribution(kind), seed=9), 3, 4000)
    assert v.holds


def test_jensen_eigenvalue_bounds():
    # for standard gaussian a: E[a a^T] = I and E[|a|^2 a a^T] = (d+2) I
    rng = np.random.default_rng(11)
    d, n, draws = 3, 5, 1000
    big = rng.standard_normal((1_000_000, d))
    delta = np.einsum("s,si,sj->ij", np.sum(big**2, axis=1), big, big) / big.shape[0]
    assert np.allclose(delta, (d + 2) * np.eye(d), atol=0.05)
    lam_min, del_max = np.empty(draws), np.empty(draws)
    for s in range(draws):
        a = rng.standard_normal((n, d))
        lam_min[s] = np.linalg.eigvalsh(a.T @ a / n)[0]
        w = np.sum(a**2, axis=1)
        del_max[s] = np.linalg.eigvalsh((a.T * w) @ a / n)[-1]
    se = lambda x: x.std(ddof=1) / math.sqrt(draws)
    assert lam_min.mean() <= 1.0 + 4 * se(lam_min)
    assert del_max.mean() >= (d + 2) - 4 * se(del_max)


def test_wishart_bound_examples():
    b = wishart_gap_bounds(1, 1, 1)
    assert b.diag_moment_lower_bound == pytest.approx(3.0, rel=1e-12)
    assert b.ratio_lower_bound == pytest.approx(math.exp(1 / 8) * 16 / (math.e**2 * 3), rel=1e-12)
    assert b.ratio_lower_bound == pytest.approx(0.817, abs=1e-3)


def test_wishart_bounds_log_space():
    b = wishart_gap_bounds(200, 1, 1)
    assert b.diag_moment_lower_bound is None and math.isfinite(b.log_diag)
    assert b.log_diag == pytest.approx(
        -400 * math.log(2) + math.lgamma(801) - math.lgamma(401), rel=1e-12)


def test_wishart_grid():
    assert wishart_grid_check() == []
    assert wishart_intermediate_log(1, 1, 1) == pytest.approx(math.log(12 / 12), abs=1e-12)


def test_jensen_moment_check():
    g = EntryDistribution()
    v = jensen_moment_check(g, 1, 10_000)
    assert v.lhs == pytest.approx(v.rhs, rel=1e-12) and v.holds
    v = jensen_moment_check(g, 0, 100)
    assert v.lhs == 1.0 and v.rhs == 1.0
    v = jensen_moment_check(g, 2, 200_000, seed=1)
    assert v.status == "holds"
    assert abs(v.rhs - 3.0) <= 4 * v.stderr
    with pytest.raises(InvalidInputError):
        jensen_moment_check(g, -1)
