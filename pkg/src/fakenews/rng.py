"""Pinned pseudo-random source used by every seeded step in the toolkit.

All randomness (split shuffles, SGD example order, bootstrap draws, feature
subsets, weight init, dropout masks) is derived from the raw 64-bit output of
PCG64 (O'Neill's PCG XSL-RR 128/64) seeded through numpy's ``SeedSequence``.
Numpy guarantees that both the raw bit-generator stream and ``SeedSequence``
are stable across versions and platforms; the higher-level ``Generator``
distribution methods are *not*, so they are never used here. Every conversion
from raw words to floats or bounded integers is defined below.
"""

import numpy as np

_TWO_NEG_53 = 2.0 ** -53


class Rng:
    """Seedable 64-bit generator with explicitly defined derived draws.

    Parameters
    ----------
    seed : int
        Non-negative integer seed.
    """

    def __init__(self, seed):
        seed = int(seed)
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = seed
        self._bits = np.random.PCG64(seed)

    def raw(self, n):
        """``n`` raw uint64 words."""
        return self._bits.random_raw(int(n)).astype(np.uint64, copy=False)

    def random(self, n):
        """``n`` doubles uniform on [0, 1): top 53 bits of each word times 2**-53."""
        return (self.raw(n) >> np.uint64(11)).astype(np.float64) * _TWO_NEG_53

    def below(self, bound):
        """One integer uniform on [0, bound) by 128-bit multiply-shift."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        word = int(self._bits.random_raw())
        return (word * int(bound)) >> 64

    def integers(self, bound, n):
        """``n`` integers on [0, bound) as ``floor(random() * bound)``."""
        idx = np.floor(self.random(n) * bound).astype(np.int64)
        # guard the measure-zero rounding case random()*bound == bound
        np.minimum(idx, bound - 1, out=idx)
        return idx

    def permutation(self, n):
        """Fisher-Yates shuffle of ``range(n)``.

        Walks i = n-1 .. 1 and swaps position i with j = below(i + 1).
        """
        perm = list(range(n))
        if n < 2:
            return np.asarray(perm, dtype=np.int64)
        words = self.raw(n - 1).tolist()
        for k, i in enumerate(range(n - 1, 0, -1)):
            j = (words[k] * (i + 1)) >> 64
            perm[i], perm[j] = perm[j], perm[i]
        return np.asarray(perm, dtype=np.int64)

    def partial_shuffle(self, pool, k):
        """Move a uniform random ``k``-subset of ``pool`` to its front, in place.

        Uses the first ``k`` steps of a forward Fisher-Yates pass, so ``pool``
        remains a permutation of its original contents and can be reused.
        Returns a view of the first ``k`` entries.
        """
        n = len(pool)
        k = min(int(k), n)
        words = self.raw(k).tolist()
        for i in range(k):
            j = i + ((words[i] * (n - i)) >> 64)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
