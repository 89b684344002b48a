"""Portable deterministic randomness for data splits.

Split shuffles must be reproducible from a plain integer seed regardless of
language or library version, so this module pins two well-known 64-bit
algorithms instead of deferring to a library generator:

* FNV-1a (64-bit) hashes a seed + stratum key string into a stream state.
* splitmix64 generates the stream driving a Fisher-Yates shuffle.

The exact derivation is documented in docs/FORMATS.md; changing any constant
here silently changes every split file, so don't.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

_SM64_GAMMA = 0x9E3779B97F4A7C15
_SM64_MULT1 = 0xBF58476D1CE4E5B9
_SM64_MULT2 = 0x94D049BB133111EB


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


class SplitMix64:
    """splitmix64 stream (Steele, Lea & Flood's SplittableRandom finalizer)."""

    def __init__(self, state: int) -> None:
        self._state = state & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _SM64_GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _SM64_MULT1) & _MASK64
        z = ((z ^ (z >> 27)) * _SM64_MULT2) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def randbelow(self, n: int) -> int:
        """Uniform-ish draw in [0, n) via modulo (bias < 2**-50 for n < 2**14)."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle, high index down to 1."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]


def stream_for(seed: int, key: str) -> SplitMix64:
    """Derive the shuffle stream for one (seed, stratum key) pair.

    State = FNV-1a 64 of the UTF-8 bytes of ``"{seed}|{key}"``.
    """
    return SplitMix64(fnv1a64(f"{seed}|{key}".encode("utf-8")))
