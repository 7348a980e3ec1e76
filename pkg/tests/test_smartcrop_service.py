"""Tests for content-aware cropping."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.models import CropCandidate, ImageBuffer, SaliencyMaps
from src.smartcrop_service import SmartCropConfig, SmartCropper, importance_weights


def square_feature(size: int = 128, left: int = 40, top: int = 40) -> ImageBuffer:
    """Black canvas holding a 16 px white square with an 8 px black core."""
    data = np.zeros((size, size, 3))
    data[top : top + 16, left : left + 16] = 1.0
    data[top + 4 : top + 12, left + 4 : left + 12] = 0.0
    return ImageBuffer(data)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2**32), st.sampled_from([0.5, 2.0, 4.0]))
def test_best_crop_ignores_map_scale(seed, factor):
    """
    **Feature: fgssl, Property 9: 顕著性マップの定数倍で最良の切り出しは変わらない**

    For any saliency maps and any positive power-of-two factor, scaling both
    maps scales every score by the same factor and keeps the winning crop.
    """
    generator = np.random.default_rng(seed)
    maps = SaliencyMaps(generator.random((72, 80)), generator.random((72, 80)))
    cropper = SmartCropper()
    crop = CropCandidate(x=8, y=0, side=64)
    assert cropper.score_crop(crop, maps.scaled(factor)) == pytest.approx(
        factor * cropper.score_crop(crop, maps)
    )
    best = cropper.best_crop(maps)
    scaled_best = cropper.best_crop(maps.scaled(factor))
    assert (best.x, best.y, best.side) == (scaled_best.x, scaled_best.y, scaled_best.side)


class TestSaliencyMaps:
    """Tests for the Laplace edge and saturation maps."""

    def test_constant_image_has_no_edges(self):
        assert not SmartCropper.laplace_edges(ImageBuffer.filled(10, 10, 0.7)).any()

    def test_single_white_pixel(self):
        data = np.zeros((5, 5, 3))
        data[2, 2] = 1.0
        edges = SmartCropper.laplace_edges(ImageBuffer(data))
        assert edges[2, 2] == pytest.approx(4.0)
        for y, x in [(1, 2), (3, 2), (2, 1), (2, 3)]:
            assert edges[y, x] == pytest.approx(1.0)
        assert edges[0, 0] == 0.0

    def test_linear_ramp_interior_is_zero(self):
        ramp = np.tile(np.arange(11) / 10.0, (6, 1))
        edges = SmartCropper.laplace_edges(ImageBuffer(ramp))
        assert np.allclose(edges[1:-1, 1:-1], 0.0, atol=1e-12)

    def test_saturation_examples(self):
        data = np.array([[[1.0, 0.0, 0.0], [0.5, 0.5, 0.5], [0.5, 0.45, 0.5]]])
        boost = SmartCropper().saturation_boost(ImageBuffer(data))
        assert boost[0].tolist() == [1.0, 0.0, 0.0]

    def test_grayscale_has_zero_saturation(self):
        img = ImageBuffer(np.random.default_rng(0).random((8, 8)))
        assert not SmartCropper().saturation_boost(img).any()


class TestCandidates:
    """Tests for candidate_crops."""

    def test_square_image_includes_full_frame(self):
        assert CropCandidate(0, 0, 64) in SmartCropper().candidate_crops(64, 64)

    def test_wide_image_full_scale_slides_horizontally(self):
        full = [c for c in SmartCropper().candidate_crops(128, 64) if c.side == 64]
        assert [(c.x, c.y) for c in full] == [(x, 0) for x in range(0, 65, 8)]

    def test_every_candidate_fits(self):
        for crop in SmartCropper().candidate_crops(150, 97):
            assert crop.fits(150, 97)

    def test_image_too_small(self):
        with pytest.raises(SmartCropper.ImageTooSmallError, match="smaller than 64 px"):
            SmartCropper().candidate_crops(63, 200)


class TestScoring:
    """Tests for score_crop and the importance weights."""

    def test_weights_vanish_at_border(self):
        weights = importance_weights(64)
        assert weights.max() < 1.0
        assert weights[0, 0] < weights[31, 31]
        assert weights[31, 31] == pytest.approx(1.0 - (1 / 64) ** 2)

    def test_zero_maps_score_zero(self):
        maps = SaliencyMaps(np.zeros((64, 64)), np.zeros((64, 64)))
        assert SmartCropper().score_crop(CropCandidate(0, 0, 64), maps) == 0.0

    def test_centered_detail_beats_corner_detail(self):
        centered = np.zeros((64, 64))
        centered[31:33, 31:33] = 1.0
        corner = np.zeros((64, 64))
        corner[0:2, 0:2] = 1.0
        cropper = SmartCropper()
        crop = CropCandidate(0, 0, 64)
        zero = np.zeros((64, 64))
        assert cropper.score_crop(crop, SaliencyMaps(centered, zero)) > cropper.score_crop(
            crop, SaliencyMaps(corner, zero)
        )

    def test_saturated_blob_raises_score(self):
        data = np.full((64, 128, 3), 0.5)
        data[24:40, 88:104] = [1.0, 0.2, 0.2]
        cropper = SmartCropper()
        maps = cropper.saliency_maps(ImageBuffer(data))
        left = cropper.score_crop(CropCandidate(0, 0, 64), maps)
        right = cropper.score_crop(CropCandidate(64, 0, 64), maps)
        assert right > left

    def test_crop_outside_maps(self):
        maps = SaliencyMaps(np.zeros((64, 64)), np.zeros((64, 64)))
        with pytest.raises(ValueError, match="lies outside"):
            SmartCropper().score_crop(CropCandidate(8, 0, 64), maps)


class TestSmartCrop:
    """Tests for smart_crop."""

    def test_constant_image_gives_full_frame(self):
        crop = SmartCropper().smart_crop(ImageBuffer.filled(128, 128, 0.4))
        assert (crop.x, crop.y, crop.side) == (0, 0, 128)

    def test_centers_on_feature(self):
        crop = SmartCropper().smart_crop(square_feature())
        assert (crop.x, crop.y, crop.side) == (16, 16, 64)
        assert crop.score > 0

    def test_shifting_feature_by_stride_shifts_crop(self):
        crop = SmartCropper().smart_crop(square_feature(left=48, top=48))
        assert (crop.x, crop.y, crop.side) == (24, 24, 64)

    def test_textured_upper_left_square_is_contained(self):
        data = np.zeros((128, 128))
        checker = (np.indices((16, 16)).sum(axis=0) % 2).astype(np.float64)
        data[8:24, 8:24] = checker
        crop = SmartCropper().smart_crop(ImageBuffer(data))
        assert crop.x <= 8 and crop.y <= 8
        assert crop.x + crop.side >= 24 and crop.y + crop.side >= 24

    def test_deterministic(self):
        img = ImageBuffer(np.random.default_rng(1).random((96, 80, 3)))
        assert SmartCropper().smart_crop(img) == SmartCropper().smart_crop(img)

    def test_custom_config_changes_scale_ladder(self):
        cropper = SmartCropper(SmartCropConfig(scales=(1.0,)))
        crop = cropper.smart_crop(square_feature())
        assert crop.side == 128


class TestOverlay:
    """Tests for overlay_on_white."""

    def test_full_frame_is_identity(self):
        img = ImageBuffer(np.random.default_rng(2).random((64, 64, 3)))
        assert SmartCropper.overlay_on_white(img, CropCandidate(0, 0, 64)) == img

    def test_white_pixel_count(self):
        img = ImageBuffer.filled(128, 96, 0.5)
        out = SmartCropper.overlay_on_white(img, CropCandidate(0, 0, 64))
        white = np.count_nonzero(np.all(out.data == 1.0, axis=2))
        assert white == 128 * 96 - 64 * 64

    def test_idempotent(self):
        img = ImageBuffer(np.random.default_rng(3).random((80, 80, 3)))
        crop = CropCandidate(8, 16, 64)
        once = SmartCropper.overlay_on_white(img, crop)
        assert SmartCropper.overlay_on_white(once, crop) == once


class TestSmartCropConfig:
    def test_round_trip(self):
        config = SmartCropConfig(saturation_weight=0.5, scales=(1.0, 0.5))
        assert SmartCropConfig.from_dict(config.to_dict()) == config

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="Unknown smartcrop setting"):
            SmartCropConfig.from_dict({"face_weight": 1.0})

    def test_invalid_scale(self):
        with pytest.raises(ValueError, match=r"\(0, 1\]"):
            SmartCropConfig(scales=(1.2,))
