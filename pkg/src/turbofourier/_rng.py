"""Seedable, splittable random streams.

Every stochastic routine in this package draws from a stream derived as

    substream(seed, *path)

where ``path`` is a tuple of non-negative integers identifying the consumer
(e.g. ``(seed, step, 2)`` for the noise batch of a training step, or
``(seed, depth, bucket_pattern)`` for one bucket-weight estimate).  Streams
with distinct paths are statistically independent and the derivation does not
depend on the order in which streams are created, so parallel and serial
schedules produce bitwise-identical results.
"""

from __future__ import annotations

import numpy as np

_WORD = 0xFFFFFFFF


def _to_words(value: int) -> list[int]:
    """Split an arbitrary-size non-negative int into uint32 words (little-endian)."""
    if value < 0:
        raise ValueError("stream path elements must be non-negative")
    if value == 0:
        return [0]
    words = []
    while value:
        words.append(value & _WORD)
        value >>= 32
    return words


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return the generator for stream ``(seed, *path)``.

    Path elements may be arbitrarily large (bucket patterns over 100
    coordinates are bigger than 2**64); each is split into uint32 words and
    the word count is appended so that distinct paths can never collide.
    """
    entropy: list[int] = []
    for item in (seed, *path):
        words = _to_words(int(item))
        entropy.extend(words)
        entropy.append(len(words))
    return np.random.default_rng(np.random.SeedSequence(entropy))


def float_key(x: float) -> int:
    """Stable integer key for a float (its IEEE-754 bit pattern)."""
    return int(np.float64(x).view(np.uint64))
