"""Counter-based random streams.

Every random quantity in the package is drawn from a Philox4x64-10 stream
keyed by the master seed.  A stream is addressed by ``(trial, sub)`` through
the high counter words, so distinct trials and purposes never overlap and a
trial can be regenerated without replaying any other trial.

Per-sample Monte Carlo draws use :func:`uniform_block`: sample ``s`` of a
trial owns a fixed-width slice of that trial's stream, so any contiguous
range of samples can be produced independently and yields bitwise the same
numbers as a single sequential pass.
"""

from __future__ import annotations

import numpy as np

__all__ = ["trial_generator", "uniform_block", "check_seed"]

_MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= _MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def _key(seed: int) -> np.ndarray:
    return np.random.SeedSequence(check_seed(seed)).generate_state(2, np.uint64)


def _bit_generator(seed: int, trial: int, sub: int) -> np.random.Philox:
    counter = np.array([0, 0, sub, trial], dtype=np.uint64)
    return np.random.Philox(key=_key(seed), counter=counter)


def trial_generator(seed: int, trial: int = 0, sub: int = 0) -> np.random.Generator:
    """Generator for one ``(trial, sub)`` stream of ``seed``."""
    return np.random.Generator(_bit_generator(seed, trial, sub))


def uniform_block(
    seed: int, start: int, count: int, width: int, trial: int = 0, sub: int = 0
) -> np.ndarray:
    """Uniforms on [0, 1) for samples ``start .. start+count-1``.

    Returns an array of shape ``(count, width)``; row ``j`` depends only on
    ``(seed, trial, sub, start + j)``.
    """
    if width < 1 or count < 0 or start < 0:
        raise ValueError("uniform_block needs width >= 1, count >= 0, start >= 0")
    padded = -(-width // 4) * 4  # Philox emits four words per counter step
    bg = _bit_generator(seed, trial, sub)
    bg.advance(start * padded // 4)
    return np.random.Generator(bg).random((count, padded))[:, :width]
