"""Frozen, platform-independent pseudo-random generator.

SplitMix64 (Steele, Lea & Flood 2014): state advances by the constant
0x9E3779B97F4A7C15 modulo 2**64 and each output is the state passed through
the finalizer ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
z *= 0x94D049BB133111EB; z ^= z >> 31``. Bounded integers use rejection
sampling on the top bits, so every draw is a pure function of the seed.

Golden fixtures depend on this stream; do not change it.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

T = TypeVar("T")

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, *path: int) -> int:
    """Seed for a sub-stream, e.g. ``derive_seed(seed, trial)``."""
    z = seed & _MASK
    for k in path:
        z = mix64(z ^ mix64((k + 1) * _GAMMA))
    return z


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        return mix64(self.state)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError("n must be positive")
        bits = max(1, (n - 1).bit_length())
        while True:
            r = self.next_u64() >> (64 - bits) if bits <= 64 else self._wide(bits)
            if r < n:
                return r

    def _wide(self, bits: int) -> int:
        r = 0
        for _ in range((bits + 63) // 64):
            r = (r << 64) | self.next_u64()
        return r >> (-bits % 64)

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in ``[lo, hi]``."""
        return lo + self.below(hi - lo + 1)

    def choice(self, seq: Sequence[T]) -> T:
        return seq[self.below(len(seq))]

    def sample(self, seq: Sequence[T], k: int) -> list[T]:
        """``k`` distinct elements in draw order (partial Fisher-Yates)."""
        pool = list(seq)
        if not 0 <= k <= len(pool):
            raise ValueError("sample size out of range")
        for i in range(k):
            j = i + self.below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def shuffle(self, seq: Sequence[T]) -> list[T]:
        return self.sample(seq, len(seq))
