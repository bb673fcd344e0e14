"""Counter-based random number generation.

Every random quantity in this package is a pure function of a 64-bit seed, a
stream tag, and a draw counter.  Nothing depends on call order, so results
are reproducible under any parallel schedule, and pruning one part of a
simulation never perturbs the randomness seen by another part.

The core primitive is the splitmix64 finalizer; a keyed stream is the
sequence ``mix64(key + counter * GOLDEN)``.  Draws that need more than one
word (rejection samplers) expand a private per-counter subsequence.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15  # splitmix64 increment
SUBSTREAM = 0xC2B2AE3D27D4EB4F  # odd constant for nested draws
_KEY_SALT = 0x5851F42D4C957F2D

# One tag per purpose so distinct streams never share a counter space.
TAG_SAMPLE = 1
TAG_TREE_STRENGTH = 2
TAG_TREE_COST = 3
TAG_TREE_PICK = 4
TAG_SPLIT_STRENGTH = 5
TAG_SPLIT_COST = 6
TAG_SPLIT_RESAMPLE = 7


def mix64(z: int) -> int:
    """splitmix64 finalizer: a full-avalanche bijection on 64-bit words."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def stream_key(seed: int, tag: int) -> int:
    """Key of the named stream `tag` under the run seed."""
    return mix64((seed * GOLDEN + tag * SUBSTREAM + _KEY_SALT) & MASK64)


def derive_seed(seed: int, index: int) -> int:
    """Child seed for repetition `index`, used to fan out independent reps."""
    return mix64((seed * GOLDEN + (index + 1) * SUBSTREAM) & MASK64)


def raw64(key: int, counter: int) -> int:
    return mix64((key + counter * GOLDEN) & MASK64)


def raw64_sub(key: int, counter: int, attempt: int) -> int:
    """Word `attempt` of the private sequence attached to one draw counter."""
    return mix64((raw64(key, counter) + (attempt + 1) * SUBSTREAM) & MASK64)


def to_uniform(word: int) -> float:
    """Map a 64-bit word to (0, 1); the half-ulp offset keeps 0 unreachable."""
    return ((word >> 11) + 0.5) * 2.0**-53


class RandomStream:
    """Single-owner draw counter over one keyed stream.

    Distinct streams may run concurrently; a single stream must not be
    shared.  The value of draw i depends only on (seed, tag, i).
    """

    def __init__(self, seed: int, tag: int = TAG_SAMPLE):
        self.key = stream_key(seed, tag)
        self._counter = 0

    def take(self, count: int = 1) -> np.ndarray:
        """Reserve `count` consecutive draw counters."""
        start = self._counter
        self._counter += count
        return np.arange(start, start + count, dtype=np.uint64)

    def uniform(self) -> float:
        return to_uniform(raw64(self.key, int(self.take(1)[0])))
