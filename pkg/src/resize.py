"""Resizing applied to corpus images before any augmentation."""

import cv2
import numpy as np

from src.models import ImageBuffer
from src.sr_kernels import SRKernels


def resize(img: ImageBuffer, width: int, height: int) -> ImageBuffer:
    """Resize to width x height.

    Each axis is handled separately: shrinking uses the bicubic kernel of
    :class:`SRKernels`, enlarging uses OpenCV bilinear interpolation.
    """
    if width < 1 or height < 1:
        raise ValueError(f"Resize target must be positive, got {width}x{height}")
    data = img.data

    if height < data.shape[0]:
        rows = SRKernels.cubic_weight_matrix(data.shape[0], height)
        data = np.einsum("oh,hwc->owc", rows, data, optimize=True)
    elif height > data.shape[0]:
        data = _linear(data, data.shape[1], height)

    if width < data.shape[1]:
        cols = SRKernels.cubic_weight_matrix(data.shape[1], width)
        data = np.einsum("hwc,pw->hpc", data, cols, optimize=True)
    elif width > data.shape[1]:
        data = _linear(data, width, data.shape[0])

    if data is img.data:
        return img
    return ImageBuffer(np.clip(data, 0.0, 1.0))


def _linear(data: np.ndarray, width: int, height: int) -> np.ndarray:
    channels = data.shape[2]
    writable = np.array(data, dtype=np.float64, copy=True)
    out = cv2.resize(writable, (width, height), interpolation=cv2.INTER_LINEAR)
    return out.reshape(height, width, channels)
