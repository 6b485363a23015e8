"""Deterministic pseudo-random streams (SplitMix64).

Every random draw in this package comes from one pinned algorithm so that
identical seeds reproduce identical runs across platforms, interpreter
versions and numpy versions:

    state_{k+1} = (state_k + 0x9E3779B97F4A7C15) mod 2^64
    output_k    = mix(state_{k+1})

where ``mix`` is the SplitMix64 finalizer

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

(all arithmetic mod 2^64).  Floats are the usual 53-bit uniforms
``(output >> 11) * 2^-53`` in [0, 1); bounded integers are
``floor(u * bound)`` (bias <= 2^-53, irrelevant at the bounds used here).

Independent sub-streams are derived by hashing keys into the seed:

    derive(seed, k1, k2, ...) starts from mix(seed) and folds in each key
    as  s <- mix(s XOR mix(k + 0x9E3779B97F4A7C15)).

The fold is injective in each key position, so streams for distinct
(island, role) pairs under one seed never coincide.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_U_GAMMA = np.uint64(_GAMMA)
_U_MIX1 = np.uint64(_MIX1)
_U_MIX2 = np.uint64(_MIX2)


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 multiplication wraps mod 2^64, which is exactly what we need
    z = (z ^ (z >> np.uint64(30))) * _U_MIX1
    z = (z ^ (z >> np.uint64(27))) * _U_MIX2
    return z ^ (z >> np.uint64(31))


class RngStream:
    """Sequential SplitMix64 stream with vectorized block draws.

    ``next_block(k)`` yields exactly the same values as k calls of
    ``next_u64()``, so scalar and bulk consumers can share a stream.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53-bit resolution."""
        return (self.next_u64() >> 11) * 1.1102230246251565e-16  # 2**-53

    def randint(self, bound: int) -> int:
        """Uniform integer in [0, bound)."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        return int(self.random() * bound)

    def next_block(self, count: int) -> np.ndarray:
        """The next `count` raw uint64 outputs, as one vectorized draw."""
        steps = np.arange(1, count + 1, dtype=np.uint64)
        states = np.uint64(self._state) + _U_GAMMA * steps
        self._state = (self._state + _GAMMA * count) & _MASK64
        return _mix64_array(states)

    def random_block(self, count: int) -> np.ndarray:
        """`count` uniform floats in [0, 1)."""
        return (self.next_block(count) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def randint_block(self, count: int, bound: int) -> np.ndarray:
        """`count` uniform integers in [0, bound)."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        return (self.random_block(count) * bound).astype(np.int64)


def derive_stream(seed: int, *keys: int) -> RngStream:
    """Derive an independent stream from a master seed and integer keys."""
    s = mix64(seed)
    for k in keys:
        s = mix64(s ^ mix64(k + _GAMMA))
    return RngStream(s)
