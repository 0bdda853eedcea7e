"""Deterministic random generation with explicit seed-splitting.

A small SplitMix64 generator is used instead of the stdlib Mersenne
Twister so that certificate sampling is reproducible bit-for-bit across
Python versions and so that independent sampling streams can be derived
from (seed, label) pairs regardless of evaluation order or parallel
scheduling.
"""

from __future__ import annotations

import hashlib

from ._rat import rat

_MASK = (1 << 64) - 1


class DetRNG:
    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def _next(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("randint requires n >= 1")
        # rejection sampling on the top multiple of n
        limit = (_MASK + 1) - ((_MASK + 1) % n)
        while True:
            x = self._next()
            if x < limit:
                return x % n

    def rational(self, max_den: int = 1 << 16):
        """Uniform-ish exact rational in [0,1] with denominator <= max_den."""
        q = 1 + self.randint(max_den)
        p = self.randint(q + 1)
        return rat(p, q)

    def rational_in(self, lo, hi, max_den: int = 1 << 16):
        lo, hi = rat(lo), rat(hi)
        return lo + (hi - lo) * self.rational(max_den)

    def choice(self, seq):
        return seq[self.randint(len(seq))]

    def split(self, label: str) -> "DetRNG":
        h = hashlib.sha256(f"{self._state}:{label}".encode()).digest()
        return DetRNG(int.from_bytes(h[:8], "big"))
