"""Counter-based 64-bit random generator (SplitMix64).

All randomness in the library flows through this generator so that results
are bit-reproducible from a single integer seed, independent of platform or
worker scheduling.  The mixing constants are the published SplitMix64 ones:

    GAMMA = 0x9E3779B97F4A7C15   (state increment, golden-ratio odd constant)
    M1    = 0xBF58476D1CE4E5B9
    M2    = 0x94D049BB133111EB

One draw advances the counter by GAMMA and finalizes it with two
multiply-xorshift rounds.  Derived streams (per-path seeds) are produced by
`derive_seed`, the same finalizer applied to master + (index+1)*GAMMA.
"""

from __future__ import annotations

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
M1 = 0xBF58476D1CE4E5B9
M2 = 0x94D049BB133111EB

_INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit value."""
    z &= MASK
    z = ((z ^ (z >> 30)) * M1) & MASK
    z = ((z ^ (z >> 27)) * M2) & MASK
    return z ^ (z >> 31)


def derive_seed(master_seed: int, stream_index: int) -> int:
    """Seed for the stream_index-th independent stream of a master seed."""
    return mix64((master_seed + (stream_index + 1) * GAMMA) & MASK)


class SplitMix64:
    """Sequential SplitMix64 stream; the counter is the whole state."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK

    def next64(self) -> int:
        self.state = (self.state + GAMMA) & MASK
        return mix64(self.state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next64() >> 11) * _INV_2_53

    def randbelow(self, n: int) -> int:
        """Unbiased uniform integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("randbelow requires n >= 1")
        threshold = MASK + 1 - ((MASK + 1) % n)
        while True:
            x = self.next64()
            if x < threshold:
                return x % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates from the top index down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        out = list(range(n))
        self.shuffle(out)
        return out

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), order random."""
        out = list(range(n))
        self.shuffle(out)
        return out[:k]

    def choice(self, items):
        return items[self.randbelow(len(items))]

    def spawn(self, stream_index: int) -> "SplitMix64":
        return SplitMix64(derive_seed(self.state, stream_index))
