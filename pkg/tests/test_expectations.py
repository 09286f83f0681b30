import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agm.expectations import (
    ENUMERATION_CAP,
    EnumerationCapError,
    ExpectationSpec,
    InvalidSpecError,
    MatrixTuple,
    arithmetic_mean,
    deterministic_product,
    expect,
    expect_product,
    expect_quadratic,
    ordered_tuple_count,
)
from agm.frames import frame_to_tuple, harmonic_frame_2d
from agm.inequalities import random_psd_tuple
from agm.linalg import InvalidInputError, is_psd, spectral_norm


def brute_force(stack, k, scheme, quadratic):
    # literal loop over all index tuples, product A_{i_k} ... A_{i_1}
    n, d = stack.shape[:2]
    it = itertools.permutations(range(n), k) if scheme == "wo" else itertools.product(range(n), repeat=k)
    total, count = np.zeros((d, d)), 0
    for idx in it:
        p = np.eye(d)
        for i in idx:
            p = stack[i] @ p
        total += p @ p.T if quadratic else p
        count += 1
    return total / count


def test_two_matrix_plain_wo(psd_pair):
    a, b = psd_pair
    r = expect_product(MatrixTuple([a, b]), ExpectationSpec(2))
    assert np.allclose(r.mean_matrix, 0.5 * (a @ b + b @ a), atol=1e-12)
    assert r.stderr_norm == 0.0 and r.method_used == "exact"


@pytest.mark.parametrize("scheme", ["with-replacement", "without-replacement"])
def test_k1_is_mean(rng, scheme):
    t = random_psd_tuple(rng, 4, 3)
    r = expect_product(t, ExpectationSpec(1, scheme=scheme))
    assert np.allclose(r.mean_matrix, arithmetic_mean(t), atol=1e-14)


def test_harmonic_three_k3():
    t = frame_to_tuple(harmonic_frame_2d(3))
    r = expect_product(t, ExpectationSpec(3))
    assert np.allclose(r.mean_matrix, -np.eye(2) / 16, atol=1e-14)
    assert r.norm == pytest.approx(1 / 16, abs=1e-14)


def test_two_matrix_quadratic_wo(psd_pair):
    a, b = psd_pair
    r = expect_quadratic(MatrixTuple([a, b]), ExpectationSpec(2, "quadratic"))
    assert np.allclose(r.mean_matrix, 0.5 * a @ b @ b @ a + 0.5 * b @ a @ a @ b, atol=1e-10)


@pytest.mark.parametrize("scheme", ["with-replacement", "without-replacement"])
def test_single_matrix_quadratic(rng, scheme):
    a = random_psd_tuple(rng, 1, 3)
    r = expect_quadratic(a, ExpectationSpec(1, "quadratic", scheme))
    assert np.allclose(r.mean_matrix, a[0] @ a[0], atol=1e-12)


def test_wr_quadratic_recursion_vs_27_tuples(rng):
    t = random_psd_tuple(rng, 3, 2)
    r = expect_quadratic(t, ExpectationSpec(3, "quadratic", "with-replacement"))
    assert np.allclose(r.mean_matrix, brute_force(t.stack, 3, "wr", True), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("n,k", [(n, k) for n in range(1, 5) for k in range(1, 5)])
@pytest.mark.parametrize("quadratic", [False, True])
def test_exact_against_literal_enumeration(n, k, quadratic):
    t = random_psd_tuple(np.random.default_rng(100 * n + k), n, 3)
    form = "quadratic" if quadratic else "plain"
    wr = expect(t, ExpectationSpec(k, form, "with-replacement"))
    ref = brute_force(t.stack, k, "wr", quadratic)
    assert np.allclose(wr.mean_matrix, ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())
    if k <= n:
        wo = expect(t, ExpectationSpec(k, form, "without-replacement"))
        ref = brute_force(t.stack, k, "wo", quadratic)
        assert np.allclose(wo.mean_matrix, ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())


@pytest.mark.parametrize("scheme", ["with-replacement", "without-replacement"])
@pytest.mark.parametrize("form", ["plain", "quadratic"])
def test_monte_carlo_within_band(rng, scheme, form):
    t = random_psd_tuple(rng, 4, 3)
    exact = expect(t, ExpectationSpec(3, form, scheme))
    mc = expect(t, ExpectationSpec(3, form, scheme, "monte-carlo", samples=40_000, seed=5))
    assert mc.method_used == "monte-carlo" and mc.samples == 40_000
    assert mc.stderr_norm > 0
    assert abs(mc.norm - exact.norm) <= 4 * mc.stderr_norm


def test_monte_carlo_deterministic(rng):
    t = random_psd_tuple(rng, 5, 2)
    spec = ExpectationSpec(3, method="monte-carlo", samples=1000, seed=9)
    assert np.array_equal(expect(t, spec).mean_matrix, expect(t, spec).mean_matrix)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32))
def test_quadratic_output_is_psd(n, k, seed):
    t = random_psd_tuple(np.random.default_rng(seed), n, 3)
    for scheme in ("with-replacement", "without-replacement"):
        if scheme == "without-replacement" and k > n:
            continue
        r = expect_quadratic(t, ExpectationSpec(k, "quadratic", scheme))
        assert is_psd(r.mean_matrix, tol=1e-9).holds
        assert np.array_equal(r.mean_matrix, r.mean_matrix.T)


def test_invalid_specs(rng):
    t = random_psd_tuple(rng, 3, 2)
    with pytest.raises(InvalidSpecError):
        expect(t, ExpectationSpec(4))
    with pytest.raises(InvalidSpecError):
        ExpectationSpec(0)
    with pytest.raises(InvalidSpecError):
        ExpectationSpec(1, method="monte-carlo", samples=0)
    with pytest.raises(InvalidSpecError):
        expect_product(t, ExpectationSpec(1, "quadratic"))


def test_enumeration_cap():
    t = MatrixTuple([np.eye(2)] * 12)
    assert ordered_tuple_count(12, 10) > ENUMERATION_CAP
    with pytest.raises(EnumerationCapError, match="monte-carlo"):
        expect(t, ExpectationSpec(10))
    r = expect(t, ExpectationSpec(10, method="monte-carlo", samples=100))
    assert r.norm == pytest.approx(1.0)


def test_triple_mean_power():
    a1 = np.array([[7.0, 0.0], [0.0, 0.0]])
    a2 = np.ones((2, 2))
    t = MatrixTuple([a1, a2, a2])
    r = expect(t, ExpectationSpec(3, scheme="with-replacement"))
    assert np.allclose(r.mean_matrix, np.array([[809, 214], [214, 60]]) / 27, atol=1e-12)


def test_deterministic_product_examples(rng):
    t = frame_to_tuple(harmonic_frame_2d(3))
    assert spectral_norm(deterministic_product(t, [1, 2, 3])) == pytest.approx(0.25, abs=1e-14)
    u = random_psd_tuple(rng, 3, 3)
    assert np.array_equal(deterministic_product(u, [2]), u[1])
    assert np.allclose(deterministic_product(u, [1, 2]), u[1] @ u[0])
    ident = MatrixTuple([np.eye(3)] * 4)
    assert np.array_equal(deterministic_product(ident, [4, 1, 3, 2]), np.eye(3))
    with pytest.raises(InvalidInputError):
        deterministic_product(u, [0, 1])
    with pytest.raises(InvalidInputError):
        deterministic_product(u, [4])


def test_tuple_validation():
    with pytest.raises(InvalidInputError):
        MatrixTuple([np.diag([1.0, -1.0])])
    with pytest.raises(InvalidInputError):
        MatrixTuple([np.eye(2), np.eye(3)])
    with pytest.raises(InvalidInputError):
        MatrixTuple([])
    t = MatrixTuple([np.eye(2), 2 * np.eye(2)])
    assert (t.n, t.d) == (2, 2)
    assert [m.certified_min_eig for m in t.items] == pytest.approx([1.0, 2.0])
