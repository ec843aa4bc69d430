"""Deterministic random-number machinery shared by the engine and the sweeps.

Everything random in this package flows through SplitMix64: a tiny,
well-documented 64-bit generator that produces the same stream on every
platform and Python version. Bounded integer draws use top-bits rejection
sampling, so agent selection is exactly uniform (no modulo bias).

Seeds for independent streams (per sweep cell, per replication, and the
separate scenario-generation vs. dynamics streams of a single run) are
derived by folding integer components through the SplitMix64 finalizer,
never by incrementing a base seed.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# Stream labels for domain separation: a run's initialization draws and its
# update-order draws must come from unrelated streams even for equal seeds.
SCENARIO_STREAM = 1
DYNAMICS_STREAM = 2


def mix64(z: int) -> int:
    """SplitMix64 finalizer: invertible 64-bit avalanche mix."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(*components: int) -> int:
    """Fold integer components into one 64-bit seed.

    Order-sensitive: derive_seed(1, 2) != derive_seed(2, 1). Negative
    components are folded by their two's-complement 64-bit image.
    """
    h = 0
    for c in components:
        h = mix64((h + _GOLDEN_GAMMA + (c & MASK64)) & MASK64)
    return h


class SplitMix64:
    """Sequential SplitMix64 stream.

    State advances by the golden-ratio gamma; each output is the finalizer
    of the new state.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_uint64(self) -> int:
        self._state = (self._state + _GOLDEN_GAMMA) & MASK64
        return mix64(self._state)

    def random(self) -> float:
        """Float in [0, 1) built from the top 53 bits of one draw."""
        return (self.next_uint64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        """Float in [lo, hi); degenerates to lo when hi == lo."""
        return lo + (hi - lo) * self.random()

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection on the top bits."""
        if n <= 0:
            raise ValueError("randrange() requires n >= 1")
        k = (n - 1).bit_length()
        while True:
            r = self.next_uint64() >> (64 - k)
            if r < n:
                return r

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        return lo + self.randrange(hi - lo + 1)
