"""Content-aware localization of the most detailed square region."""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from scipy import ndimage

from src.models import CropCandidate, ImageBuffer, SaliencyMaps

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])
LAPLACE_KERNEL = np.array([[0.0, -1.0, 0.0], [-1.0, 4.0, -1.0], [0.0, -1.0, 0.0]])


@dataclass(frozen=True)
class SmartCropConfig:
    """Tunable constants of the saliency and ranking steps."""

    edge_weight: float = 1.0
    saturation_weight: float = 0.3
    saturation_threshold: float = 0.1
    scales: Tuple[float, ...] = (1.0, 0.9, 0.8, 0.7, 0.6, 0.5)
    min_stride: int = 8
    stride_divisor: int = 8
    min_side: int = 64

    def __post_init__(self):
        scales = tuple(float(s) for s in self.scales)
        if not scales or any(not 0 < s <= 1 for s in scales):
            raise ValueError(f"Crop scales must lie in (0, 1], got {list(scales)}")
        if self.min_stride < 1 or self.stride_divisor < 1:
            raise ValueError("Stride settings must be at least 1")
        if self.min_side < 1:
            raise ValueError("min_side must be at least 1")
        object.__setattr__(self, "scales", scales)

    def to_dict(self) -> dict:
        """Convert the SmartCropConfig instance to a dictionary."""
        return {
            "edge_weight": self.edge_weight,
            "saturation_weight": self.saturation_weight,
            "saturation_threshold": self.saturation_threshold,
            "scales": list(self.scales),
            "min_stride": self.min_stride,
            "stride_divisor": self.stride_divisor,
            "min_side": self.min_side,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SmartCropConfig":
        """Create a SmartCropConfig from a dictionary; missing keys keep defaults."""
        defaults = cls()
        unknown = set(data) - set(defaults.to_dict())
        if unknown:
            raise ValueError(f"Unknown smartcrop setting(s): {', '.join(sorted(unknown))}")
        return cls(
            edge_weight=float(data.get("edge_weight", defaults.edge_weight)),
            saturation_weight=float(data.get("saturation_weight", defaults.saturation_weight)),
            saturation_threshold=float(
                data.get("saturation_threshold", defaults.saturation_threshold)
            ),
            scales=tuple(data.get("scales", defaults.scales)),
            min_stride=int(data.get("min_stride", defaults.min_stride)),
            stride_divisor=int(data.get("stride_divisor", defaults.stride_divisor)),
            min_side=int(data.get("min_side", defaults.min_side)),
        )


@lru_cache(maxsize=64)
def importance_weights(side: int) -> np.ndarray:
    """Center-weighted importance w(u, v) = max(0, 1 - max(|u|, |v|)^2).

    (u, v) are pixel-center coordinates scaled to [-1, 1] across the crop.
    """
    coords = (np.arange(side) + 0.5) * (2.0 / side) - 1.0
    chebyshev = np.maximum(np.abs(coords)[:, np.newaxis], np.abs(coords)[np.newaxis, :])
    weights = np.maximum(0.0, 1.0 - chebyshev**2)
    weights.setflags(write=False)
    return weights


class SmartCropper:
    """Edge + saturation saliency, sliding-window candidates, center-weighted ranking."""

    class ImageTooSmallError(ValueError):
        """Raised when the image is smaller than the minimum crop side."""

        pass

    def __init__(self, config: Optional[SmartCropConfig] = None):
        """Initialize the cropper.

        Args:
            config: Constants overriding the defaults
        """
        self.config = config or SmartCropConfig()

    @staticmethod
    def luminance(img: ImageBuffer) -> np.ndarray:
        if img.channels == 1:
            return img.data[:, :, 0]
        return img.data @ LUMA_WEIGHTS

    @classmethod
    def laplace_edges(cls, img: ImageBuffer) -> np.ndarray:
        """Absolute Laplacian of the luminance, clamp-to-edge borders."""
        response = ndimage.convolve(cls.luminance(img), LAPLACE_KERNEL, mode="nearest")
        return np.abs(response)

    def saturation_boost(self, img: ImageBuffer) -> np.ndarray:
        """max(R,G,B) - min(R,G,B) where above the threshold, else 0.

        Grayscale images have no saturation and give an all-zero map.
        """
        if img.channels != 3:
            return np.zeros((img.height, img.width))
        spread = img.data.max(axis=2) - img.data.min(axis=2)
        return np.where(spread > self.config.saturation_threshold, spread, 0.0)

    def saliency_maps(self, img: ImageBuffer) -> SaliencyMaps:
        return SaliencyMaps(edge=self.laplace_edges(img), saturation_boost=self.saturation_boost(img))

    def candidate_crops(self, width: int, height: int) -> List[CropCandidate]:
        """Square sliding windows at every configured scale.

        Raises:
            ImageTooSmallError: If min(width, height) is below min_side
        """
        shortest = min(width, height)
        if shortest < self.config.min_side:
            raise self.ImageTooSmallError(
                f"image {width}x{height} is smaller than {self.config.min_side} px"
            )
        candidates = []
        seen_sides = set()
        for scale in self.config.scales:
            side = max(1, int(math.floor(scale * shortest + 0.5)))
            if side in seen_sides:
                continue
            seen_sides.add(side)
            stride = max(self.config.min_stride, side // self.config.stride_divisor)
            for y in range(0, height - side + 1, stride):
                for x in range(0, width - side + 1, stride):
                    candidates.append(CropCandidate(x=x, y=y, side=side))
        return candidates

    def score_crop(self, crop: CropCandidate, maps: SaliencyMaps) -> float:
        """Center-weighted saliency inside the crop, normalized by side^2."""
        if not crop.fits(maps.width, maps.height):
            raise ValueError(
                f"crop {crop.side}px at ({crop.x}, {crop.y}) lies outside the "
                f"{maps.width}x{maps.height} maps"
            )
        window = (slice(crop.y, crop.y + crop.side), slice(crop.x, crop.x + crop.side))
        detail = (
            self.config.edge_weight * maps.edge[window]
            + self.config.saturation_weight * maps.saturation_boost[window]
        )
        return float(np.sum(detail * importance_weights(crop.side)) / (crop.side * crop.side))

    def best_crop(self, maps: SaliencyMaps) -> CropCandidate:
        """Highest-scoring candidate; ties prefer larger side, then smaller y, then smaller x."""
        best = None
        best_key = None
        for candidate in self.candidate_crops(maps.width, maps.height):
            score = self.score_crop(candidate, maps)
            key = (-score, -candidate.side, candidate.y, candidate.x)
            if best_key is None or key < best_key:
                best_key = key
                best = CropCandidate(
                    x=candidate.x, y=candidate.y, side=candidate.side, score=score
                )
        return best

    def smart_crop(self, img: ImageBuffer) -> CropCandidate:
        """Locate the most important square region of an image."""
        return self.best_crop(self.saliency_maps(img))

    @staticmethod
    def overlay_on_white(img: ImageBuffer, crop: CropCandidate) -> ImageBuffer:
        """Keep the crop at its original position and paint everything else white."""
        if not crop.fits(img.width, img.height):
            raise ValueError(
                f"crop {crop.side}px at ({crop.x}, {crop.y}) lies outside the "
                f"{img.width}x{img.height} image"
            )
        data = np.ones_like(img.data)
        window = (slice(crop.y, crop.y + crop.side), slice(crop.x, crop.x + crop.side))
        data[window] = img.data[window]
        return ImageBuffer(data)
