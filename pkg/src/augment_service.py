"""Fine-grained augmentation family.

Every operation is a pure function of (image, params, rng state): the same
image, parameters and seed always give bit-identical output.
"""

from typing import List, Sequence, Tuple

import numpy as np

from src.grid import GridOps
from src.models import (
    CropCandidate,
    DclParams,
    DropoutParams,
    GammaParams,
    GridPermutation,
    ImageBuffer,
    PatchSwapParams,
    Square,
)
from src.rng import Rng


class Augmenter:
    """Gamma, coarse dropout, patch swap, random jigsaw and DCL jigsaw."""

    DROPOUT_FILL = 0.0
    MAX_SWAP_ATTEMPTS = 1000

    class PlacementError(ValueError):
        """Raised when squares cannot be placed inside the image."""

        pass

    # ------------------------------------------------------------------
    # Gamma
    # ------------------------------------------------------------------

    @staticmethod
    def gamma_transform(img: ImageBuffer, params: GammaParams, rng: Rng) -> ImageBuffer:
        """Raise every pixel to the power L / 100 for a level L drawn from the range."""
        level = rng.integer(params.level_min, params.level_max)
        if level == 100:
            return img
        return ImageBuffer(np.clip(img.data ** (level / 100.0), 0.0, 1.0))

    # ------------------------------------------------------------------
    # Coarse dropout
    # ------------------------------------------------------------------

    @classmethod
    def coarse_dropout(cls, img: ImageBuffer, params: DropoutParams, rng: Rng) -> ImageBuffer:
        """Fill ``hole_count`` random squares with black."""
        return cls.coarse_dropout_with_record(img, params, rng)[0]

    @classmethod
    def coarse_dropout_with_record(
        cls, img: ImageBuffer, params: DropoutParams, rng: Rng
    ) -> Tuple[ImageBuffer, List[Square]]:
        """Coarse dropout that also returns the squares it filled.

        Raises:
            PlacementError: If side_max exceeds the image width or height
        """
        if params.side_max > min(img.width, img.height):
            raise cls.PlacementError(
                f"side_max {params.side_max} exceeds image dimension "
                f"{min(img.width, img.height)} ({img.width}x{img.height})"
            )
        data = img.copy_data()
        squares = []
        for _ in range(params.hole_count):
            side = rng.integer(params.side_min, params.side_max)
            x = rng.integer(0, img.width - side)
            y = rng.integer(0, img.height - side)
            data[y : y + side, x : x + side] = cls.DROPOUT_FILL
            squares.append(Square(x=x, y=y, side=side))
        return ImageBuffer(data), squares

    # ------------------------------------------------------------------
    # Patch swap
    # ------------------------------------------------------------------

    @classmethod
    def patch_swap(cls, img: ImageBuffer, params: PatchSwapParams, rng: Rng) -> ImageBuffer:
        """Exchange the contents of two disjoint random squares."""
        return cls.patch_swap_with_record(img, params, rng)[0]

    @classmethod
    def patch_swap_with_record(
        cls, img: ImageBuffer, params: PatchSwapParams, rng: Rng
    ) -> Tuple[ImageBuffer, List[Square]]:
        """Patch swap that also returns the two squares it exchanged.

        The first square is drawn uniformly among the positions that leave
        room for a disjoint partner; the second is resampled until it is
        disjoint from the first, at most MAX_SWAP_ATTEMPTS times.

        Raises:
            PlacementError: If two disjoint squares cannot fit, or the
                rejection budget is exhausted
        """
        side = params.patch_side
        fits_once = side <= img.width and side <= img.height
        if not fits_once or (2 * side > img.width and 2 * side > img.height):
            raise cls.PlacementError(
                f"image too small: {img.width}x{img.height} cannot hold two disjoint "
                f"{side}x{side} patches"
            )

        first = cls._draw_first_square(img.width, img.height, side, rng)
        second = None
        for _ in range(cls.MAX_SWAP_ATTEMPTS):
            candidate = Square(
                x=rng.integer(0, img.width - side),
                y=rng.integer(0, img.height - side),
                side=side,
            )
            if not candidate.overlaps(first):
                second = candidate
                break
        if second is None:
            raise cls.PlacementError(
                f"rejection budget exhausted after {cls.MAX_SWAP_ATTEMPTS} attempts"
            )

        data = img.copy_data()
        patch_a = img.data[first.y : first.y + side, first.x : first.x + side]
        patch_b = img.data[second.y : second.y + side, second.x : second.x + side]
        data[first.y : first.y + side, first.x : first.x + side] = patch_b
        data[second.y : second.y + side, second.x : second.x + side] = patch_a
        return ImageBuffer(data), [first, second]

    @staticmethod
    def _draw_first_square(width: int, height: int, side: int, rng: Rng) -> Square:
        """Draw uniformly among top-left corners that admit a disjoint partner.

        A corner admits a partner when there is room for another square to
        its left or right (x-free) or above or below it (y-free).
        """
        xs = np.arange(width - side + 1)
        ys = np.arange(height - side + 1)
        x_free = xs[(xs >= side) | (xs + 2 * side <= width)]
        y_free = ys[(ys >= side) | (ys + 2 * side <= height)]
        x_blocked = np.setdiff1d(xs, x_free)

        # x-free corners pair with every y; x-blocked corners need a y-free row.
        count_x_free = len(x_free) * len(ys)
        total = count_x_free + len(x_blocked) * len(y_free)
        index = rng.integer(0, total - 1)
        if index < count_x_free:
            x = x_free[index // len(ys)]
            y = ys[index % len(ys)]
        else:
            index -= count_x_free
            x = x_blocked[index // len(y_free)]
            y = y_free[index % len(y_free)]
        return Square(x=int(x), y=int(y), side=side)

    # ------------------------------------------------------------------
    # Jigsaw shuffling
    # ------------------------------------------------------------------

    @staticmethod
    def random_jigsaw(
        img: ImageBuffer, n: int, rng: Rng
    ) -> Tuple[ImageBuffer, GridPermutation]:
        """Shuffle the n x n cells with a uniformly random permutation."""
        GridOps.partition(img, n)
        perm = GridPermutation(n=n, mapping=tuple(rng.permutation(n * n)))
        if perm.is_identity():
            return img, perm
        return GridOps.apply_grid_permutation(img, perm), perm

    @staticmethod
    def neighbourhood_order(n: int, k: int, rng: Rng) -> List[int]:
        """Permute 0..n-1 by sorting i + r, r ~ U(-k, k).

        Element p of the result is the original index now at position p.
        Ties keep the original order, and no index moves by 2k or more.
        """
        keys = np.arange(n, dtype=np.float64) + np.asarray(rng.uniform(-k, k, size=n))
        return [int(i) for i in np.argsort(keys, kind="stable")]

    @classmethod
    def dcl_orders(
        cls, n: int, k: int, rng: Rng
    ) -> Tuple[List[List[int]], List[List[int]]]:
        """Draw the per-row orders, then the per-column orders."""
        rows = [cls.neighbourhood_order(n, k, rng) for _ in range(n)]
        columns = [cls.neighbourhood_order(n, k, rng) for _ in range(n)]
        return rows, columns

    @staticmethod
    def compose_dcl_mapping(
        n: int, rows: Sequence[Sequence[int]], columns: Sequence[Sequence[int]]
    ) -> GridPermutation:
        """Apply the row shuffles, then the column shuffles, to the cell grid."""
        grid = np.arange(n * n).reshape(n, n)
        for j, order in enumerate(rows):
            grid[j, :] = grid[j, list(order)]
        for i, order in enumerate(columns):
            grid[:, i] = grid[list(order), i]
        return GridPermutation(n=n, mapping=tuple(int(v) for v in grid.ravel()))

    @classmethod
    def dcl_jigsaw(
        cls, img: ImageBuffer, params: DclParams, rng: Rng
    ) -> Tuple[ImageBuffer, GridPermutation]:
        """Region confusion: shuffle cells only within a local neighbourhood.

        Each row is shuffled by :meth:`neighbourhood_order`, then each column
        of the result, so every cell moves less than 2k positions along each
        axis and the composite mapping is a bijection.

        Raises:
            DivisibilityError: If the image is not divisible by params.n
        """
        GridOps.partition(img, params.n)
        rows, columns = cls.dcl_orders(params.n, params.k, rng)
        perm = cls.compose_dcl_mapping(params.n, rows, columns)
        if perm.is_identity():
            return img, perm
        return GridOps.apply_grid_permutation(img, perm), perm

    @classmethod
    def shuffle_outside_crop(
        cls, img: ImageBuffer, crop: CropCandidate, n: int, rng: Rng
    ) -> Tuple[ImageBuffer, GridPermutation]:
        """Keep the crop region in place and jigsaw-shuffle everything else."""
        if not crop.fits(img.width, img.height):
            raise cls.PlacementError(
                f"crop {crop.side}px at ({crop.x}, {crop.y}) lies outside the "
                f"{img.width}x{img.height} image"
            )
        shuffled, perm = cls.random_jigsaw(img, n, rng)
        data = shuffled.copy_data()
        window = (slice(crop.y, crop.y + crop.side), slice(crop.x, crop.x + crop.side))
        data[window] = img.data[window]
        return ImageBuffer(data), perm
