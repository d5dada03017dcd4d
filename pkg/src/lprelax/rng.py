"""Deterministic, cross-platform random number generation.

All stochastic code in this package draws from splitmix64, implemented here
with plain Python integer arithmetic so that streams are bit-identical on
every platform and Python build. Trial-level parallelism derives one
independent seed per trial index from a single master seed, which makes
Monte-Carlo aggregates reproducible regardless of worker count or execution
order.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_TWO53_INV = 2.0**-53


def _mix64(z: int) -> int:
    """splitmix64 finalizer: a bijective avalanche on 64-bit words."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Per-trial seed for trial ``index`` under ``master_seed``.

    Distinct indices map to distinct seeds (the finalizer is bijective and
    the pre-mix inputs are distinct for index >= 0).
    """
    if index < 0:
        raise ValueError("trial index must be nonnegative")
    pre = ((master_seed & _MASK64) + ((index + 1) * _GOLDEN)) & _MASK64
    return _mix64(pre ^ (pre >> 32))


class SplitMix64:
    """splitmix64 stream generator."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        return _mix64(self.state)

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _TWO53_INV

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection; no modulo bias."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = ((1 << 64) // n) * n
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def choice(self, seq):
        return seq[self.next_below(len(seq))]

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.next_float()
