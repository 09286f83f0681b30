import math

import numpy as np
import pytest

from agm.expectations import deterministic_product
from agm.frames import (
    adjacent_inner_product,
    adjacent_inner_product_asymptotic,
    frame_to_tuple,
    general_frame,
    harmonic_frame_2d,
)
from agm.linalg import InvalidInputError, spectral_norm


def test_harmonic_first_vector():
    f = harmonic_frame_2d(3)
    assert f.vectors[0] == pytest.approx([0.5, math.sqrt(3) / 2], abs=1e-15)
    assert f.kind == "harmonic-2d"


@pytest.mark.parametrize("n", [3, 4, 7, 16, 101])
def test_harmonic_invariants(n):
    f = harmonic_frame_2d(n)
    assert np.allclose(f.adjacent_inner_products(), math.cos(math.pi / n), atol=1e-14)
    assert np.allclose(frame_to_tuple(f).stack.mean(axis=0), 0.5 * np.eye(2), atol=1e-14)
    assert np.allclose(np.linalg.norm(f.vectors, axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("d,n", [(2, 2), (3, 3), (4, 9), (5, 17), (6, 40), (7, 7)])
def test_general_frame_tight(d, n):
    f = general_frame(d, n)
    assert np.allclose(np.linalg.norm(f.vectors, axis=1), 1.0, atol=1e-12)
    assert np.linalg.norm(f.frame_operator() - np.eye(d) / d) <= 1e-10
    assert f.kind == ("general-even-d" if d % 2 == 0 else "general-odd-d")


@pytest.mark.parametrize("d,n", [(4, 64), (3, 50), (6, 200)])
def test_adjacent_closed_form(d, n):
    f = general_frame(d, n)
    assert np.allclose(f.adjacent_inner_products(), adjacent_inner_product(d, n), atol=1e-10)


def test_adjacent_asymptotic():
    f = general_frame(4, 1000)
    assert abs(f.adjacent_inner_products()[0] - adjacent_inner_product_asymptotic(4, 1000)) <= 1e-6


def test_invalid_sizes():
    with pytest.raises(InvalidInputError):
        harmonic_frame_2d(2)
    with pytest.raises(InvalidInputError):
        general_frame(4, 3)
    with pytest.raises(InvalidInputError):
        general_frame(1, 5)


def test_frame_to_tuple_projectors():
    t = frame_to_tuple(general_frame(3, 8))
    assert np.allclose(np.trace(t.stack, axis1=1, axis2=2), 1.0, atol=1e-12)
    assert np.allclose(t.stack @ t.stack, t.stack, atol=1e-12)


def test_three_vector_product_norm():
    t = frame_to_tuple(harmonic_frame_2d(3))
    assert spectral_norm(deterministic_product(t, [1, 2, 3])) == pytest.approx(0.25, abs=1e-14)


@pytest.mark.parametrize("n", [4, 8, 13])
def test_ordered_product_is_cosine_power(n):
    t = frame_to_tuple(harmonic_frame_2d(n))
    got = spectral_norm(deterministic_product(t, range(1, n + 1)))
    assert got == pytest.approx(math.cos(math.pi / n) ** (n - 1), rel=1e-12)
