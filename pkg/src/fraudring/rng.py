"""Deterministic random number generation.

Every seeded component in the package draws from the same SplitMix64-based
generator so that graphs, features, label masks, weight initialisation and
tie-breaks reproduce bit-for-bit across platforms. The stream is counter
based: output i is mix64(seed + (i+1) * GOLDEN), which lets scalar and
vectorised draws share one code path.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_TWO53_INV = 2.0 ** -53


def mix64(x: int) -> int:
    """SplitMix64 finaliser on a 64-bit integer."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, stream: int) -> int:
    """Derive an independent child seed for a named sub-stream."""
    return mix64((seed ^ mix64(stream)) + _GOLDEN)


class Rng:
    """SplitMix64 stream with scalar and vectorised draws."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def _raw(self, n: int) -> np.ndarray:
        """Next n raw 64-bit outputs as a uint64 array."""
        if n <= 0:
            return np.empty(0, dtype=np.uint64)
        idx = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self._state) + idx * np.uint64(_GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
            z = z ^ (z >> np.uint64(31))
        self._state = (self._state + n * _GOLDEN) & _MASK64
        return z

    def next_u64(self) -> int:
        return int(self._raw(1)[0])

    def uniform(self, n: int | None = None):
        """Uniform doubles in [0, 1): scalar when n is None, else shape (n,)."""
        if n is None:
            return float(self._raw(1)[0] >> np.uint64(11)) * _TWO53_INV
        return (self._raw(n) >> np.uint64(11)).astype(np.float64) * _TWO53_INV

    def normal(self, n: int | None = None):
        """Standard normals via Box-Muller; scalar when n is None."""
        if n is None:
            return float(self.normal(1)[0])
        if n <= 0:
            return np.empty(0, dtype=np.float64)
        pairs = (n + 1) // 2
        raw = self._raw(2 * pairs)
        # u1 in (0, 1] keeps the log finite; u2 in [0, 1).
        u1 = ((raw[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO53_INV
        u2 = (raw[1::2] >> np.uint64(11)).astype(np.float64) * _TWO53_INV
        r = np.sqrt(-2.0 * np.log(u1))
        theta = (2.0 * math.pi) * u2
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]

    def below(self, bound: int) -> int:
        """Integer in [0, bound) via floor(u * bound); bias is below 2^-53 * bound."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return min(int(self.uniform() * bound), bound - 1)

    def choice(self, seq):
        if len(seq) == 0:
            raise ValueError("cannot choose from an empty sequence")
        return seq[self.below(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> np.ndarray:
        order = list(range(n))
        self.shuffle(order)
        return np.asarray(order, dtype=np.int64)

    def sample(self, population: int, k: int) -> list[int]:
        """k distinct indices from range(population), by partial Fisher-Yates."""
        if k > population:
            raise ValueError(f"cannot sample {k} from population of {population}")
        pool = list(range(population))
        for i in range(k):
            j = i + self.below(population - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def split(self) -> "Rng":
        """Child generator whose stream is independent of further draws here."""
        return Rng(self.next_u64())
