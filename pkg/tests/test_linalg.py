import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from agm.linalg import (
    InvalidInputError,
    PsdMatrix,
    SymmetricMatrix,
    eigvalsh,
    is_psd,
    jacobi_eigh,
    min_max_eigenvalues,
    spectral_norm,
)

from conftest import random_psd

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def power_iteration_norm(m, iters=5000):
    # independent oracle: sqrt of the top eigenvalue of M^T M
    g = m.T @ m
    v = np.ones(g.shape[0]) / np.sqrt(g.shape[0])
    for _ in range(iters):
        w = g @ v
        v = w / np.linalg.norm(w)
    return float(np.sqrt(v @ g @ v))


def test_spectral_norm_identity_and_diag():
    assert spectral_norm(np.eye(3)) == pytest.approx(1.0, abs=1e-15)
    assert spectral_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0, abs=1e-15)


def test_spectral_norm_power_iteration_oracle(rng):
    m = rng.standard_normal((5, 5))
    assert spectral_norm(m) == pytest.approx(power_iteration_norm(m), rel=1e-10)


def test_spectral_norm_rectangular(rng):
    m = rng.standard_normal((4, 7))
    assert spectral_norm(m) == pytest.approx(np.linalg.norm(m, 2), rel=1e-10)


def test_spectral_norm_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        spectral_norm(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_min_max_examples():
    assert min_max_eigenvalues(np.diag([2.0, -1.0])) == pytest.approx((-1.0, 2.0))
    assert min_max_eigenvalues(np.eye(4)) == pytest.approx((1.0, 1.0))
    assert min_max_eigenvalues(np.array([[0.0, 1.0], [1.0, 0.0]])) == pytest.approx((-1.0, 1.0))


def test_is_psd_examples(rng):
    check = is_psd(np.zeros((3, 3)))
    assert check.holds and check.min_eig == 0.0
    check = is_psd(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert not check.holds and check.min_eig == pytest.approx(-1.0, abs=1e-12)
    a, b = (rng.standard_normal((4, 4)) for _ in range(2))
    a, b = a + a.T, b + b.T
    h = 0.5 * a - 0.5 * b
    assert is_psd(h @ h).holds


def test_jacobi_matches_numpy_batched(rng):
    m = rng.standard_normal((50, 6, 6))
    m = m + np.swapaxes(m, 1, 2)
    w = jacobi_eigh(m)
    assert np.allclose(w, np.linalg.eigvalsh(m), atol=1e-10)


def test_jacobi_vectors_reconstruct(rng):
    m = random_psd(rng, 5)
    w, v = jacobi_eigh(m, vectors=True)
    assert np.allclose(v @ np.diag(w) @ v.T, m, atol=1e-10)
    assert np.allclose(v.T @ v, np.eye(5), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(arrays(float, (4, 3), elements=finite))
def test_gram_norm_is_norm_squared(x):
    nx = spectral_norm(x)
    assert spectral_norm(x.T @ x) == pytest.approx(nx**2, rel=1e-10, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(arrays(float, (3, 3), elements=finite), arrays(float, (3, 3), elements=finite))
def test_norm_submultiplicative_and_triangle(a, b):
    slack = 1e-9 * (1 + spectral_norm(a) * spectral_norm(b))
    assert spectral_norm(a @ b) <= spectral_norm(a) * spectral_norm(b) + slack
    assert spectral_norm(a + b) <= spectral_norm(a) + spectral_norm(b) + 1e-9 * (1 + spectral_norm(a) + spectral_norm(b))


@settings(max_examples=60, deadline=None)
@given(arrays(float, (4, 4), elements=finite))
def test_symmetric_norm_is_max_abs_eig(a):
    s = 0.5 * (a + a.T)
    lo, hi = min_max_eigenvalues(s)
    assert spectral_norm(s) == pytest.approx(max(abs(lo), abs(hi)), rel=1e-10, abs=1e-12)


def test_symmetric_matrix_symmetrises_and_rejects():
    m = np.array([[1.0, 2.0], [2.0 + 1e-12, 1.0]])
    s = SymmetricMatrix(m)
    assert np.array_equal(s.entries, s.entries.T)
    assert s.dim == 2
    with pytest.raises(InvalidInputError):
        SymmetricMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(InvalidInputError):
        SymmetricMatrix(np.ones((2, 3)))


def test_psd_matrix_certificate(rng):
    m = random_psd(rng, 4)
    p = PsdMatrix(m)
    assert p.certified_min_eig == pytest.approx(eigvalsh(m)[0], abs=1e-10)
    with pytest.raises(InvalidInputError):
        PsdMatrix(np.diag([1.0, -1.0]))
    assert PsdMatrix(np.diag([1.0, -1e-14])).certified_min_eig < 0


@settings(max_examples=60, deadline=None)
@given(arrays(float, (4, 3), elements=finite))
def test_trace_brackets_norm_for_psd(z):
    m = z @ z.T
    nm, tr = spectral_norm(m), float(np.trace(m))
    assert nm <= tr * (1 + 1e-10) + 1e-12
    assert tr <= 4 * nm * (1 + 1e-10) + 1e-12
