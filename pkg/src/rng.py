"""Seeded random streams shared by every stochastic operation."""

from typing import List, Optional, Union

import numpy as np


class Rng:
    """Deterministic random stream.

    The generator is NumPy's PCG64 bit generator seeded directly with the
    64-bit seed. PCG64 output is identical across platforms, so equal seeds
    give equal streams. Sub-streams for corpus items and pair views are built
    with ``numpy.random.SeedSequence([seed, *keys])``.
    """

    ALGORITHM = "PCG64"
    SEED_MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        """Initialize the stream.

        Args:
            seed: Any integer; it is reduced modulo 2**64.
        """
        self.seed = int(seed) & self.SEED_MASK
        self._generator = np.random.Generator(np.random.PCG64(self.seed))

    def derive(self, *keys: int) -> "Rng":
        """Return an independent stream identified by ``(seed, *keys)``.

        Derivation depends only on the seed and the keys, never on how much
        of this stream has already been consumed.
        """
        sequence = np.random.SeedSequence([self.seed, *[int(k) & self.SEED_MASK for k in keys]])
        state = sequence.generate_state(1, dtype=np.uint64)
        return Rng(int(state[0]))

    def integer(self, low: int, high: int) -> int:
        """Draw an integer uniformly from the closed interval [low, high]."""
        if low > high:
            raise ValueError(f"Empty integer range [{low}, {high}]")
        return int(self._generator.integers(low, high, endpoint=True))

    def uniform(
        self, low: float, high: float, size: Optional[int] = None
    ) -> Union[float, np.ndarray]:
        """Draw reals uniformly from the half-open interval [low, high)."""
        if size is None:
            return float(self._generator.uniform(low, high))
        return self._generator.uniform(low, high, size=size)

    def random(self) -> float:
        """Draw a real uniformly from [0, 1)."""
        return float(self._generator.random())

    def permutation(self, n: int) -> List[int]:
        """Return a uniformly random permutation of 0..n-1 (Fisher-Yates)."""
        values = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.integer(0, i)
            values[i], values[j] = values[j], values[i]
        return values

    def permutations(self, count: int, length: int) -> np.ndarray:
        """Return ``count`` independent random permutations as rows."""
        rows = np.tile(np.arange(length, dtype=np.int64), (count, 1))
        return self._generator.permuted(rows, axis=1)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, algorithm={self.ALGORITHM})"
