"""splitmix64 — the single RNG used everywhere reproducibility matters.

The generator state advances by a fixed odd constant (the "gamma") per draw
and the output is a bijective mix of the state.  Because the state after k
draws is just ``seed + (k+1) * GAMMA``, any draw of a stream can be computed
independently of the others ("random access").  The render kernels exploit
this: every potential random number of a pixel has a fixed draw index, so
skipping draws (occluded light, missed ray) never shifts later ones.

All arithmetic is modulo 2**64.  Floats are the top 53 bits scaled to [0, 1).
"""

from __future__ import annotations

GAMMA = 0x9E3779B97F4A7C15
_MASK = 0xFFFFFFFFFFFFFFFF
_INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def draw_at(seed: int, index: int) -> int:
    """The index-th u64 of the stream seeded with ``seed`` (0-based)."""
    return mix64((seed + (index + 1) * GAMMA) & _MASK)


def float_at(seed: int, index: int) -> float:
    """The index-th float in [0, 1) of the stream seeded with ``seed``."""
    return (draw_at(seed, index) >> 11) * _INV_2_53


class SplitMix64:
    """Sequential view of a splitmix64 stream."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & _MASK
        return mix64(self.state)

    def next_float(self) -> float:
        """Uniform in [0, 1)."""
        return (self.next_u64() >> 11) * _INV_2_53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + self.next_float() * (hi - lo)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) via modulo (bias acceptable, documented)."""
        return self.next_u64() % n
