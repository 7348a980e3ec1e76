"""Numeric kernels of the super-resolution pretext task.

Tensors are stored as H x W x C arrays; shapes are reported as (W, H, C).
"""

from typing import Optional, Tuple

import numpy as np

from src.models import ImageBuffer, Tensor3
from src.rng import Rng


class SRKernels:
    """Bicubic downscaling, pixel shuffling and content/perceptual losses."""

    BICUBIC_A = -0.5
    DEFAULT_FACTOR = 4
    ADVERSARIAL_WEIGHT = 1e-3

    class ShapeMismatchError(ValueError):
        """Raised when two tensors that must agree in shape do not."""

        pass

    class DivisibilityError(ValueError):
        """Raised when a dimension is not divisible by the scale factor."""

        pass

    # ------------------------------------------------------------------
    # Bicubic resampling
    # ------------------------------------------------------------------

    @staticmethod
    def cubic_kernel(x: np.ndarray, a: float = BICUBIC_A) -> np.ndarray:
        """Keys cubic convolution kernel; a = -0.5 is Catmull-Rom."""
        x = np.abs(np.asarray(x, dtype=np.float64))
        near = (a + 2.0) * x**3 - (a + 3.0) * x**2 + 1.0
        far = a * x**3 - 5.0 * a * x**2 + 8.0 * a * x - 4.0 * a
        return np.where(x <= 1.0, near, np.where(x < 2.0, far, 0.0))

    @classmethod
    def cubic_weight_matrix(
        cls, in_size: int, out_size: int, a: float = BICUBIC_A
    ) -> np.ndarray:
        """Return the (out_size, in_size) matrix resampling one axis.

        Output sample o sits at input coordinate (o + 0.5) * in/out - 0.5
        (pixel centers aligned). Taps beyond the border are clamped to the
        edge sample.
        """
        scale = in_size / out_size
        centers = (np.arange(out_size) + 0.5) * scale - 0.5
        base = np.floor(centers).astype(np.int64)
        matrix = np.zeros((out_size, in_size), dtype=np.float64)
        rows = np.arange(out_size)
        for offset in (-1, 0, 1, 2):
            taps = base + offset
            weights = cls.cubic_kernel(centers - taps, a)
            np.add.at(matrix, (rows, np.clip(taps, 0, in_size - 1)), weights)
        return matrix / matrix.sum(axis=1, keepdims=True)

    @classmethod
    def resample_axes(
        cls, data: np.ndarray, out_height: int, out_width: int, a: float = BICUBIC_A
    ) -> np.ndarray:
        """Separable bicubic resampling of an H x W x C array."""
        rows = cls.cubic_weight_matrix(data.shape[0], out_height, a)
        cols = cls.cubic_weight_matrix(data.shape[1], out_width, a)
        return np.einsum("oh,hwc,pw->opc", rows, data, cols, optimize=True)

    @classmethod
    def bicubic_downscale(
        cls, img: ImageBuffer, factor: int = DEFAULT_FACTOR, a: float = BICUBIC_A
    ) -> ImageBuffer:
        """Downscale by an integer factor with a separable bicubic kernel.

        Raises:
            DivisibilityError: If width or height is not divisible by factor
        """
        if factor < 1:
            raise ValueError(f"Scale factor must be at least 1, got {factor}")
        for name, size in (("width", img.width), ("height", img.height)):
            if size % factor != 0:
                raise cls.DivisibilityError(
                    f"{name} {size} is not divisible by scale factor {factor}"
                )
        if factor == 1:
            return img
        out = cls.resample_axes(img.data, img.height // factor, img.width // factor, a)
        return ImageBuffer(np.clip(out, 0.0, 1.0))

    # ------------------------------------------------------------------
    # Pixel shuffle
    # ------------------------------------------------------------------

    @classmethod
    def pixel_shuffle(cls, t: Tensor3, r: int) -> Tensor3:
        """Rearrange (W, H, c*r^2) into (W*r, H*r, c).

        out(x*r + dx, y*r + dy, ch) = in(x, y, ch*r^2 + dy*r + dx)
        """
        if r < 1:
            raise ValueError(f"Upscale factor must be at least 1, got {r}")
        if t.channels % (r * r) != 0:
            raise cls.DivisibilityError(
                f"channel count {t.channels} is not divisible by r^2 = {r * r}"
            )
        height, width, channels = t.data.shape
        out_channels = channels // (r * r)
        shuffled = (
            t.data.reshape(height, width, out_channels, r, r)
            .transpose(0, 3, 1, 4, 2)
            .reshape(height * r, width * r, out_channels)
        )
        return Tensor3(shuffled)

    @classmethod
    def pixel_unshuffle(cls, t: Tensor3, r: int) -> Tensor3:
        """Exact inverse of :meth:`pixel_shuffle`."""
        if r < 1:
            raise ValueError(f"Upscale factor must be at least 1, got {r}")
        for name, size in (("width", t.width), ("height", t.height)):
            if size % r != 0:
                raise cls.DivisibilityError(f"{name} {size} is not divisible by r = {r}")
        height, width, channels = t.data.shape
        unshuffled = (
            t.data.reshape(height // r, r, width // r, r, channels)
            .transpose(0, 2, 4, 1, 3)
            .reshape(height // r, width // r, channels * r * r)
        )
        return Tensor3(unshuffled)

    # ------------------------------------------------------------------
    # Losses
    # ------------------------------------------------------------------

    @classmethod
    def mse_content_loss(
        cls,
        hr: Tensor3,
        sr: Tensor3,
        r: int,
        lr_width: int,
        lr_height: int,
        average_channels: bool = True,
    ) -> float:
        """Pixel-space content loss: squared error normalized by r^2 * W * H.

        With ``average_channels`` (the default) the normalizer also includes
        the channel count, so a constant residual d gives d^2 for any shape.
        Without it channel residuals are summed.

        Raises:
            ShapeMismatchError: If either tensor is not (r*W, r*H, C) or the
                channel counts differ
        """
        expected = (r * lr_width, r * lr_height)
        for name, tensor in (("hr", hr), ("sr", sr)):
            if (tensor.width, tensor.height) != expected:
                raise cls.ShapeMismatchError(
                    f"{name} is {tensor.width}x{tensor.height}, expected "
                    f"{expected[0]}x{expected[1]} for r={r} and LR {lr_width}x{lr_height}"
                )
        if hr.channels != sr.channels:
            raise cls.ShapeMismatchError(
                f"channel counts differ: hr has {hr.channels}, sr has {sr.channels}"
            )
        total = float(np.sum((hr.data - sr.data) ** 2))
        normalizer = r * r * lr_width * lr_height
        if average_channels:
            normalizer *= hr.channels
        return total / normalizer

    @classmethod
    def feature_content_loss(
        cls, phi_hr: Tensor3, phi_sr: Tensor3, average_channels: bool = False
    ) -> float:
        """Feature-space content loss: squared error divided by W * H.

        Channels are summed by default; ``average_channels`` also divides by
        the channel count.

        Raises:
            ShapeMismatchError: If the feature maps differ in shape
        """
        if phi_hr.shape != phi_sr.shape:
            raise cls.ShapeMismatchError(
                f"feature maps differ in shape: {phi_hr.shape} vs {phi_sr.shape}"
            )
        total = float(np.sum((phi_hr.data - phi_sr.data) ** 2))
        normalizer = phi_hr.width * phi_hr.height
        if average_channels:
            normalizer *= phi_hr.channels
        return total / normalizer

    @classmethod
    def perceptual_loss(cls, content: float, adversarial: float) -> float:
        """Content loss plus 1e-3 times the adversarial term."""
        return content + cls.ADVERSARIAL_WEIGHT * adversarial

    # ------------------------------------------------------------------
    # Training pairs
    # ------------------------------------------------------------------

    @staticmethod
    def random_crop(img: ImageBuffer, side: int, rng: Rng) -> ImageBuffer:
        """Cut a side x side square at a uniformly drawn position."""
        if side < 1 or side > min(img.width, img.height):
            raise ValueError(
                f"Crop side {side} does not fit a {img.width}x{img.height} image"
            )
        x = rng.integer(0, img.width - side)
        y = rng.integer(0, img.height - side)
        return ImageBuffer(img.data[y : y + side, x : x + side])

    @classmethod
    def make_sr_pair(
        cls,
        img: ImageBuffer,
        crop_side: Optional[int],
        factor: int,
        rng: Rng,
    ) -> Tuple[ImageBuffer, ImageBuffer]:
        """Build a (high-resolution, low-resolution) training pair."""
        hr = cls.random_crop(img, crop_side, rng) if crop_side else img
        return hr, cls.bicubic_downscale(hr, factor)
