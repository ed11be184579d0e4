"""
Seeded, addressable source of the i.i.d. +-1 coin matrix X_m(k).

Entry ``(m, k)`` is a pure function of ``(seed, m, k)``: every row ``m`` is
an independent Philox4x64 stream keyed by ``(seed, m)``, and bit ``k - 1``
of that stream decides the sign. Nothing is stored, so rows can be read at
arbitrary, data-dependent depths.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["CoinMatrix", "coin", "coins", "derive_seed", "parse_seed"]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(z):
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def parse_seed(text):
    """Parse a seed given as decimal or ``0x``-prefixed hex."""
    text = str(text).strip().lower()
    value = int(text, 16) if text.startswith("0x") else int(text)
    if not 0 <= value <= _MASK64:
        raise ValueError(f"seed {text!r} does not fit in 64 unsigned bits")
    return value


def derive_seed(seed, replication):
    """Seed of replication number ``replication`` under a master ``seed``.

    ``seed + golden * (replication + 1)`` is injective in the replication
    index modulo 2**64 and splitmix64 is a bijection, so distinct
    replications never share a seed.
    """
    return _splitmix64((int(seed) + _GOLDEN * (int(replication) + 1)) & _MASK64)


@dataclass(frozen=True)
class CoinMatrix:
    """Logical infinite matrix of fair signs, rows ``m >= 0``, columns ``k >= 1``."""

    seed: int

    def __post_init__(self):
        if not 0 <= int(self.seed) <= _MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def row(self, m, start, count):
        """Signs ``X_m(start), ..., X_m(start + count - 1)`` as an int8 array."""
        if start < 1:
            raise ValueError("coin indices start at 1")
        if count <= 0:
            return np.empty(0, dtype=np.int8)
        first_bit = start - 1
        last_bit = first_bit + count - 1
        w0, w1 = first_bit // 64, last_bit // 64
        block0 = w0 // 4
        nwords = (w1 - 4 * block0) + 1
        key = np.array([int(self.seed), int(m)], dtype=np.uint64)
        gen = np.random.Philox(key=key, counter=np.array([block0, 0, 0, 0], dtype=np.uint64))
        words = gen.random_raw(nwords).astype("<u8")
        bits = np.unpackbits(words.view(np.uint8), bitorder="little")
        offset = first_bit - 64 * 4 * block0
        bits = bits[offset:offset + count]
        return (2 * bits.astype(np.int8) - 1).astype(np.int8)


def coin(matrix, m, k):
    """Single entry ``X_m(k)`` of the coin matrix."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return int(matrix.row(m, k, 1)[0])


def coins(matrix, m, n):
    """First ``n`` entries of row ``m``."""
    return matrix.row(m, 1, n)
