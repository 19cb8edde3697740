"""SplitMix64 pseudo-random generator.

Used wherever a construction is randomized, so that a given seed yields the
same graph in any language that implements the same 64-bit recurrence:

    state <- state + 0x9E3779B97F4A7C15          (mod 2**64)
    z     <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 (mod 2**64)
    z     <- (z ^ (z >> 27)) * 0x94D049BB133111EB (mod 2**64)
    out   <- z ^ (z >> 31)

``below(n)`` is ``next() % n`` and ``uniform()`` is ``(next() >> 11) / 2**53``.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next() % n

    def uniform(self) -> float:
        return (self.next() >> 11) * (1.0 / (1 << 53))
