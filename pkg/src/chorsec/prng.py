"""splitmix64: the seeded stream behind schedulers, store generation and externs."""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def below(self, n: int) -> int:
        return self.next() % n


def derive_seed(base: int, index: int) -> int:
    """The ``index``-th output of a splitmix64 stream seeded with ``base``."""
    return mix64((base + (index + 1) * GOLDEN) & MASK64)


def hash64(data: bytes, seed: int) -> int:
    h = mix64((seed + GOLDEN) & MASK64)
    for b in data:
        h = mix64(((h ^ b) + GOLDEN) & MASK64)
    return h
