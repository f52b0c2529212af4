"""Counter-based random streams.

Every random draw in this package is keyed by an integer path under a single
root seed: stream = KeyedStream(seed).child(trial).child(STEPS, k).  Child
streams are statistically independent and order-independent, so a draw for
iteration k does not depend on whether iterations before it consumed
randomness.  This is what makes per-trial parallelism and replay of a single
step draw possible.
"""
from __future__ import annotations

import numpy as np

# Namespace constants for the first key below a trial index.  Fixed small
# integers, never reordered (reordering would silently change every stream).
UTILITY = 0
INITIAL_POINT = 1
STEPS = 2
CONSTRAINTS = 3
BARRIER_WEIGHT = 4


class KeyedStream:
    """A point in the seed tree.  Immutable; children extend the key path."""

    __slots__ = ("key",)

    def __init__(self, *key: int):
        if not key:
            raise ValueError("KeyedStream needs at least a root seed")
        for part in key:
            if not isinstance(part, (int, np.integer)):
                raise TypeError(f"stream key parts must be integers, got {part!r}")
            if part < 0:
                raise ValueError(f"stream key parts must be non-negative, got {part}")
        self.key = tuple(int(part) for part in key)

    def child(self, *key: int) -> "KeyedStream":
        return KeyedStream(*self.key, *key)

    def generator(self) -> np.random.Generator:
        """A fresh numpy Generator seeded purely by this stream's key path."""
        return np.random.default_rng(np.random.SeedSequence(self.key))

    def __repr__(self):
        return f"KeyedStream{self.key}"

    def __eq__(self, other):
        return isinstance(other, KeyedStream) and self.key == other.key

    def __hash__(self):
        return hash(self.key)
