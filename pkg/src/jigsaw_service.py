"""Permutation sets and tile emission for the jigsaw pretext task."""

import itertools
import math
from functools import lru_cache
from typing import List, Optional

import numpy as np

from src.grid import GridOps
from src.log import get_logger
from src.models import GridPermutation, ImageBuffer, JigsawSample, PermutationSet
from src.rng import Rng

logger = get_logger(__name__)


@lru_cache(maxsize=2)
def all_permutations(length: int) -> np.ndarray:
    """Every permutation of 0..length-1 in lexicographic order, one per row."""
    table = np.array(list(itertools.permutations(range(length))), dtype=np.uint8)
    table.setflags(write=False)
    return table


class PermutationSetBuilder:
    """Greedy max-min Hamming construction of a permutation set.

    Each step adds the candidate whose minimum Hamming distance to the chosen
    set is largest; ties go to the largest total distance (equivalently the
    mean), then to the earliest candidate.
    """

    TILE_COUNT = 9
    DEFAULT_POOL = 10000
    MAX_POOL_REDRAWS = 100

    class SetSizeError(ValueError):
        """Raised when the requested set size is impossible."""

        pass

    def __init__(self, length: int = TILE_COUNT):
        self.length = length
        self.max_count = math.factorial(length)

    def generate(
        self, count: int, candidate_pool: int = DEFAULT_POOL, rng: Optional[Rng] = None
    ) -> PermutationSet:
        """Build a set of ``count`` permutations.

        Args:
            count: Target set size, at least 2
            candidate_pool: Random candidates drawn per step; 0 scans all
                permutations exhaustively
            rng: Random stream; the first permutation is drawn from it

        Raises:
            SetSizeError: If count is below 2 or above length!
        """
        if count < 2:
            raise self.SetSizeError(f"count must be at least 2, got {count}")
        if count > self.max_count:
            raise self.SetSizeError(
                f"count {count} exceeds the {self.max_count} permutations of {self.length} tiles"
            )
        if candidate_pool < 0:
            raise ValueError(f"candidate_pool must be non-negative, got {candidate_pool}")
        rng = rng or Rng(0)

        first = np.array(rng.permutation(self.length), dtype=np.uint8)
        if candidate_pool == 0:
            chosen = self._exhaustive(first, count)
        else:
            chosen = self._pooled(first, count, candidate_pool, rng)
        result = PermutationSet(tuple(tuple(int(v) for v in perm) for perm in chosen))
        logger.info(
            "permutation set: %d perms, mean hamming %.4f, min hamming %d",
            len(result),
            result.mean_hamming,
            result.min_hamming,
        )
        return result

    @staticmethod
    def _best_index(min_distance: np.ndarray, total_distance: np.ndarray, scale: int) -> int:
        # argmax returns the first maximum, so equal keys keep the earliest candidate.
        key = min_distance.astype(np.int64) * scale + total_distance
        return int(np.argmax(key))

    def _exhaustive(self, first: np.ndarray, count: int) -> List[np.ndarray]:
        candidates = all_permutations(self.length)
        min_distance = np.full(len(candidates), self.length + 1, dtype=np.int64)
        total_distance = np.zeros(len(candidates), dtype=np.int64)
        scale = self.length * count + 1
        chosen = [first]
        newest = first
        for _ in range(count - 1):
            distance = np.count_nonzero(candidates != newest, axis=1)
            np.minimum(min_distance, distance, out=min_distance)
            total_distance += distance
            # chosen rows sit at distance 0 and can only win once nothing else remains
            index = self._best_index(min_distance, total_distance, scale)
            newest = candidates[index]
            chosen.append(newest)
        return chosen

    def _pooled(
        self, first: np.ndarray, count: int, pool: int, rng: Rng
    ) -> List[np.ndarray]:
        chosen = [first]
        scale = self.length * count + 1
        for step in range(1, count):
            selected = np.array(chosen, dtype=np.uint8)
            for _ in range(self.MAX_POOL_REDRAWS):
                candidates = rng.permutations(pool, self.length).astype(np.uint8)
                distance = np.count_nonzero(
                    candidates[:, np.newaxis, :] != selected[np.newaxis, :, :], axis=2
                )
                min_distance = distance.min(axis=1)
                if np.any(min_distance > 0):
                    break
            else:
                raise self.SetSizeError(
                    f"no new permutation found at step {step} after "
                    f"{self.MAX_POOL_REDRAWS} pools of {pool}"
                )
            index = self._best_index(min_distance, distance.sum(axis=1), scale)
            chosen.append(candidates[index])
        return chosen


class JigsawPretext:
    """Emit shuffled 3 x 3 tiles labelled by their permutation index."""

    GRID = 3

    @classmethod
    def make_jigsaw_sample(
        cls, img: ImageBuffer, permutation_set: PermutationSet, rng: Rng
    ) -> JigsawSample:
        """Draw a label uniformly and shuffle the tile grid with that permutation.

        Raises:
            DivisibilityError: If the image is not divisible by 3
        """
        if permutation_set.length != cls.GRID * cls.GRID:
            raise ValueError(
                f"Permutation length {permutation_set.length} does not match a "
                f"{cls.GRID}x{cls.GRID} grid"
            )
        GridOps.partition(img, cls.GRID)
        label = rng.integer(0, len(permutation_set) - 1)
        perm = GridPermutation(n=cls.GRID, mapping=permutation_set.perms[label])
        shuffled = GridOps.apply_grid_permutation(img, perm)
        return JigsawSample(tiles=tuple(GridOps.tiles(shuffled, cls.GRID)), label=label)

    @classmethod
    def make_jigsaw_samples(
        cls, img: ImageBuffer, permutation_set: PermutationSet, count: int, rng: Rng
    ) -> List[JigsawSample]:
        """Several samples of one image, each from its own derived stream."""
        if count < 1:
            raise ValueError(f"count must be at least 1, got {count}")
        return [
            cls.make_jigsaw_sample(img, permutation_set, rng.derive(k)) for k in range(count)
        ]

    @classmethod
    def reassemble(cls, sample: JigsawSample, permutation_set: PermutationSet) -> ImageBuffer:
        """Undo the shuffle: place the tiles back and apply the inverse permutation."""
        if not 0 <= sample.label < len(permutation_set):
            raise IndexError(
                f"label {sample.label} is outside a set of {len(permutation_set)} permutations"
            )
        shuffled = GridOps.assemble([tile.data for tile in sample.tiles], cls.GRID)
        perm = GridPermutation(n=cls.GRID, mapping=permutation_set.perms[sample.label])
        return GridOps.apply_grid_permutation(shuffled, perm.inverse())
