"""Portable deterministic randomness for question sampling.

Question generation must produce identical output across platforms and
reimplementations, so this module fixes every detail of the generator:

* Stream: SplitMix64 (Steele, Lea & Flood's 64-bit mixer) with the golden
  gamma 0x9E3779B97F4A7C15.
* Seeding: the stream state starts at mix64(mix64(seed) XOR key), where
  ``key`` is the image id for integer ids, or the FNV-1a 64-bit hash of the
  UTF-8 id for string ids.
* Bounded integers: rejection sampling on the top of the 64-bit range, so
  draws are exactly uniform with no modulo bias.
* Sampling without replacement: a partial Fisher-Yates shuffle over the
  candidate list in its given order, taking the first k slots.

Any implementation following this recipe draws the same questions.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(x: int) -> int:
    """SplitMix64 finalizer: a bijective avalanche over 64-bit integers."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def stream_key(value: int | str) -> int:
    """Map an image id to the 64-bit key mixed into the seed."""
    if isinstance(value, int):
        return value & _MASK64
    return fnv1a64(str(value).encode("utf-8"))


class SplitMix64:
    """The SplitMix64 sequence: state += gamma; output = mix64(state)."""

    def __init__(self, seed: int, key: int | str = 0):
        self.state = mix64(mix64(seed) ^ stream_key(key))

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        return mix64(self.state)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection; no modulo bias."""
        if n <= 0:
            raise ValueError(f"bound must be positive, got {n}")
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def sample(self, items: list, k: int) -> list:
        """k items without replacement via partial Fisher-Yates."""
        if k < 0 or k > len(items):
            raise ValueError(f"cannot sample {k} of {len(items)} items")
        pool = list(items)
        for i in range(k):
            j = i + self.below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
