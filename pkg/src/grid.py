"""Region grid partitioning and cell permutation."""

from typing import List, Sequence

import numpy as np

from src.models import GridPermutation, ImageBuffer, RegionGrid


class GridOps:
    """Operations on the n x n cell grid of an image."""

    class DivisibilityError(ValueError):
        """Raised when an image dimension is not divisible by the grid order."""

        pass

    @classmethod
    def partition(cls, img: ImageBuffer, n: int) -> RegionGrid:
        """Split an image into n x n equal cells.

        Raises:
            DivisibilityError: If width or height is not divisible by n
        """
        if n < 1:
            raise ValueError(f"Grid order must be at least 1, got {n}")
        if img.width % n != 0:
            raise cls.DivisibilityError(
                f"width {img.width} is not divisible by grid order {n}"
            )
        if img.height % n != 0:
            raise cls.DivisibilityError(
                f"height {img.height} is not divisible by grid order {n}"
            )
        return RegionGrid(n=n, cell_width=img.width // n, cell_height=img.height // n)

    @classmethod
    def cells(cls, img: ImageBuffer, n: int) -> np.ndarray:
        """Return the cells as an array of shape (n*n, cell_h, cell_w, C)."""
        grid = cls.partition(img, n)
        blocks = img.data.reshape(n, grid.cell_height, n, grid.cell_width, img.channels)
        return blocks.transpose(0, 2, 1, 3, 4).reshape(
            n * n, grid.cell_height, grid.cell_width, img.channels
        )

    @staticmethod
    def assemble(cells: Sequence[np.ndarray], n: int) -> ImageBuffer:
        """Inverse of :meth:`cells`: place cells back in reading order."""
        stack = np.asarray(cells)
        if stack.shape[0] != n * n:
            raise ValueError(f"Expected {n * n} cells, got {stack.shape[0]}")
        _, cell_height, cell_width, channels = stack.shape
        grid = stack.reshape(n, n, cell_height, cell_width, channels).transpose(0, 2, 1, 3, 4)
        return ImageBuffer(grid.reshape(n * cell_height, n * cell_width, channels))

    @classmethod
    def apply_grid_permutation(cls, img: ImageBuffer, perm: GridPermutation) -> ImageBuffer:
        """Rearrange cells so that output cell i holds input cell perm.mapping[i].

        Raises:
            DivisibilityError: If the image is not partitionable by perm.n
        """
        cells = cls.cells(img, perm.n)
        return cls.assemble(cells[list(perm.mapping)], perm.n)

    @classmethod
    def tiles(cls, img: ImageBuffer, n: int) -> List[ImageBuffer]:
        """Return the cells as separate images in reading order."""
        return [ImageBuffer(cell) for cell in cls.cells(img, n)]

    @staticmethod
    def center_crop_to_multiple(img: ImageBuffer, n: int) -> ImageBuffer:
        """Crop the minimum border so both dimensions become multiples of n.

        The odd pixel of an uneven trim is taken from the right/bottom edge.
        """
        if n < 1:
            raise ValueError(f"Grid order must be at least 1, got {n}")
        if img.width < n or img.height < n:
            raise ValueError(
                f"Image {img.width}x{img.height} is smaller than grid order {n}"
            )
        excess_x = img.width % n
        excess_y = img.height % n
        left = excess_x // 2
        top = excess_y // 2
        width = img.width - excess_x
        height = img.height - excess_y
        return ImageBuffer(img.data[top : top + height, left : left + width])
