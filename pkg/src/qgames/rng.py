"""Seedable, splittable counter-based random number generator.

The generator is SplitMix64, pinned by algorithm so that ports in other
languages reproduce the exact streams:

* state update:   state = (state + 0x9E3779B97F4A7C15) mod 2^64
* output mix:     z = state
                  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  (mod 2^64)
                  z = (z ^ (z >> 27)) * 0x94D049BB133111EB  (mod 2^64)
                  z = z ^ (z >> 31)
* double in [0,1): (z >> 11) * 2^-53
* bit:             z >> 63
* index in [0,n):  floor(u * n) with u the double above, clamped to n-1

Stream derivation is order-free: stream k of master seed s is seeded with the
k-th output of a SplitMix64 started at s, i.e. mix(s + (k+1)*GOLDEN). Adding
streams therefore never perturbs existing ones.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Deterministic 64-bit generator with the documented algorithm."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN) & MASK64
        return _mix(self._state)

    def next_float(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def next_bit(self) -> int:
        return self.next_u64() >> 63

    def choice_index(self, n: int) -> int:
        """Uniform index in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        i = int(self.next_float() * n)
        return n - 1 if i >= n else i

    def categorical(self, probs) -> int:
        """Sample an index from a probability vector (cumulative walk)."""
        u = self.next_float()
        acc = 0.0
        last = 0
        for i, p in enumerate(probs):
            acc += p
            last = i
            if u < acc:
                return i
        return last


def derive_stream(master_seed: int, stream_id: int) -> SplitMix64:
    """Independent child generator for (master_seed, stream_id)."""
    if stream_id < 0:
        raise ValueError("stream_id must be nonnegative")
    child_seed = _mix((master_seed + (stream_id + 1) * GOLDEN) & MASK64)
    return SplitMix64(child_seed)
