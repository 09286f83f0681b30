import numpy as np
import pytest

from agm import _rng


def test_uniform_block_chunk_invariance():
    full = _rng.uniform_block(7, 0, 100, 5, trial=3, sub=11)
    parts = np.concatenate([_rng.uniform_block(7, s, 10, 5, trial=3, sub=11) for s in range(0, 100, 10)])
    assert np.array_equal(full, parts)


def test_uniform_block_offset_matches_slice():
    full = _rng.uniform_block(1, 0, 50, 7)
    assert np.array_equal(full[17:29], _rng.uniform_block(1, 17, 12, 7))


def test_streams_are_distinct():
    a = _rng.uniform_block(0, 0, 4, 4, trial=0, sub=1)
    b = _rng.uniform_block(0, 0, 4, 4, trial=1, sub=1)
    c = _rng.uniform_block(0, 0, 4, 4, trial=0, sub=2)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_trial_generator_deterministic():
    x = _rng.trial_generator(42, 5, 3).standard_normal(8)
    y = _rng.trial_generator(42, 5, 3).standard_normal(8)
    assert np.array_equal(x, y)


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_seed_range(seed):
    with pytest.raises(ValueError):
        _rng.check_seed(seed)


def test_uniform_range():
    u = _rng.uniform_block(3, 0, 1000, 9)
    assert u.min() >= 0.0 and u.max() < 1.0
