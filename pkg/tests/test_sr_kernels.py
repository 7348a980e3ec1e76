"""Tests for super-resolution kernels and resizing."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.models import ImageBuffer, Tensor3
from src.resize import resize
from src.rng import Rng
from src.sr_kernels import SRKernels


def random_tensor(width: int, height: int, channels: int, seed: int = 0) -> Tensor3:
    return Tensor3(np.random.default_rng(seed).normal(size=(height, width, channels)))


def squared_error_oracle(a: Tensor3, b: Tensor3) -> float:
    total = 0.0
    for y in range(a.height):
        for x in range(a.width):
            for c in range(a.channels):
                total += (float(a.data[y, x, c]) - float(b.data[y, x, c])) ** 2
    return total


@settings(max_examples=500, deadline=None)
@given(
    st.integers(min_value=1, max_value=6),
    st.integers(min_value=1, max_value=6),
    st.integers(min_value=1, max_value=3),
    st.integers(min_value=1, max_value=3),
    st.integers(min_value=0, max_value=2**32),
)
def test_pixel_shuffle_round_trip(width, height, channels, r, seed):
    """
    **Feature: fgssl, Property 13: ピクセルシャッフルは逆変換で元に戻る**

    For any tensor with c * r^2 channels, shuffling keeps every element and
    unshuffling the result restores the tensor exactly.
    """
    t = random_tensor(width, height, channels * r * r, seed)
    shuffled = SRKernels.pixel_shuffle(t, r)
    assert shuffled.shape == (width * r, height * r, channels)
    assert np.array_equal(np.sort(shuffled.data.ravel()), np.sort(t.data.ravel()))
    assert SRKernels.pixel_unshuffle(shuffled, r) == t


@settings(max_examples=50, deadline=None)
@given(
    st.integers(min_value=1, max_value=16),
    st.integers(min_value=1, max_value=16),
    st.integers(min_value=1, max_value=8),
    st.integers(min_value=0, max_value=2**32),
)
def test_losses_match_summation_oracle(width, height, channels, seed):
    """
    **Feature: fgssl, Property 14: 内容損失は素朴な総和と一致し対称**

    For any pair of tensors up to 16x16x8, both content losses equal a plain
    triple-loop sum with their normalizers and do not depend on argument order.
    """
    a = random_tensor(width, height, channels, seed)
    b = random_tensor(width, height, channels, seed + 1)
    total = squared_error_oracle(a, b)

    mse = SRKernels.mse_content_loss(a, b, 1, width, height, average_channels=False)
    assert mse == pytest.approx(total / (width * height), rel=1e-12)
    assert SRKernels.mse_content_loss(b, a, 1, width, height, average_channels=False) == mse

    feature = SRKernels.feature_content_loss(a, b)
    assert feature == pytest.approx(total / (width * height), rel=1e-12)
    assert SRKernels.feature_content_loss(b, a) == feature


class TestBicubicDownscale:
    """Tests for bicubic_downscale."""

    def test_constant_image(self):
        out = SRKernels.bicubic_downscale(ImageBuffer.filled(16, 12, 0.3))
        assert (out.width, out.height) == (4, 3)
        assert np.allclose(out.data, 0.3, atol=1e-12)

    def test_output_shape(self):
        out = SRKernels.bicubic_downscale(ImageBuffer.filled(8, 8, 0.0), 4)
        assert (out.width, out.height) == (2, 2)

    def test_linear_ramp_is_reproduced(self):
        ramp = np.tile(np.arange(64) / 63.0, (16, 1))
        out = SRKernels.bicubic_downscale(ImageBuffer(ramp), 4)
        expected = (4 * np.arange(16) + 1.5) / 63.0
        assert np.allclose(out.data[1:-1, 1:-1, 0], expected[1:-1], atol=1e-6)

    def test_factor_one_is_identity(self):
        img = ImageBuffer.filled(5, 5, 0.2)
        assert SRKernels.bicubic_downscale(img, 1) is img

    def test_not_divisible(self):
        with pytest.raises(SRKernels.DivisibilityError, match="width 10 is not divisible"):
            SRKernels.bicubic_downscale(ImageBuffer.filled(10, 8, 0.0), 4)

    def test_weight_rows_sum_to_one(self):
        matrix = SRKernels.cubic_weight_matrix(37, 9)
        assert np.allclose(matrix.sum(axis=1), 1.0)


class TestPixelShuffle:
    """Tests for pixel_shuffle and pixel_unshuffle."""

    def test_factor_one_is_identity(self):
        t = random_tensor(3, 2, 5)
        assert SRKernels.pixel_shuffle(t, 1) == t
        assert SRKernels.pixel_unshuffle(t, 1) == t

    def test_index_order(self):
        t = Tensor3(np.array([[[1.0, 2.0, 3.0, 4.0]]]))
        out = SRKernels.pixel_shuffle(t, 2)
        assert out.shape == (2, 2, 1)
        # (x, y) = (0,0) a, (1,0) b, (0,1) c, (1,1) d
        assert out.data[:, :, 0].tolist() == [[1.0, 2.0], [3.0, 4.0]]

    def test_unshuffle_shape(self):
        assert SRKernels.pixel_unshuffle(random_tensor(2, 2, 1), 2).shape == (1, 1, 4)

    def test_channels_not_divisible(self):
        with pytest.raises(SRKernels.DivisibilityError, match="not divisible by r\\^2 = 4"):
            SRKernels.pixel_shuffle(random_tensor(2, 2, 6), 2)

    def test_unshuffle_dims_not_divisible(self):
        with pytest.raises(SRKernels.DivisibilityError, match="width 3"):
            SRKernels.pixel_unshuffle(random_tensor(3, 4, 1), 2)


class TestContentLosses:
    """Tests for the pixel, feature and perceptual losses."""

    def test_identical_tensors(self):
        t = random_tensor(8, 8, 3)
        assert SRKernels.mse_content_loss(t, t, 4, 2, 2) == 0.0
        assert SRKernels.feature_content_loss(t, t) == 0.0

    def test_constant_residual_averages_channels(self):
        hr = Tensor3(np.ones((12, 8, 3)))
        sr = Tensor3(np.full((12, 8, 3), 0.5))
        assert SRKernels.mse_content_loss(hr, sr, 4, 2, 3) == 0.25
        assert SRKernels.mse_content_loss(hr, sr, 4, 2, 3, average_channels=False) == 0.75

    def test_random_4x4_matches_oracle(self):
        hr = random_tensor(4, 4, 1, seed=1)
        sr = random_tensor(4, 4, 1, seed=2)
        expected = squared_error_oracle(hr, sr) / 16
        assert SRKernels.mse_content_loss(hr, sr, 2, 2, 2) == pytest.approx(expected, rel=1e-12)

    def test_same_pixel_permutation_keeps_loss(self):
        hr = random_tensor(6, 6, 2, seed=3)
        sr = random_tensor(6, 6, 2, seed=4)
        order = np.random.default_rng(5).permutation(36)

        def permuted(t):
            return Tensor3(t.data.reshape(36, 2)[order].reshape(6, 6, 2))

        assert SRKernels.mse_content_loss(permuted(hr), permuted(sr), 2, 3, 3) == pytest.approx(
            SRKernels.mse_content_loss(hr, sr, 2, 3, 3)
        )

    def test_feature_maps_differing_by_one(self):
        a = Tensor3(np.zeros((2, 2, 1)))
        b = Tensor3(np.ones((2, 2, 1)))
        assert SRKernels.feature_content_loss(a, b) == 1.0

    def test_feature_loss_sums_channels_by_default(self):
        a = Tensor3(np.zeros((2, 2, 4)))
        b = Tensor3(np.ones((2, 2, 4)))
        assert SRKernels.feature_content_loss(a, b) == 4.0
        assert SRKernels.feature_content_loss(a, b, average_channels=True) == 1.0

    def test_mse_shape_mismatch(self):
        with pytest.raises(SRKernels.ShapeMismatchError, match="expected 8x8"):
            SRKernels.mse_content_loss(random_tensor(8, 8, 1), random_tensor(8, 4, 1), 4, 2, 2)

    def test_mse_channel_mismatch(self):
        with pytest.raises(SRKernels.ShapeMismatchError, match="channel counts differ"):
            SRKernels.mse_content_loss(random_tensor(4, 4, 1), random_tensor(4, 4, 3), 2, 2, 2)

    def test_feature_shape_mismatch(self):
        with pytest.raises(SRKernels.ShapeMismatchError):
            SRKernels.feature_content_loss(random_tensor(2, 2, 1), random_tensor(2, 2, 2))

    def test_perceptual_loss(self):
        assert SRKernels.perceptual_loss(0.5, 0.0) == 0.5
        assert SRKernels.perceptual_loss(0.5, 100.0) == pytest.approx(0.6)
        assert SRKernels.perceptual_loss(0.2, 30.0 + 12.0) == pytest.approx(
            SRKernels.perceptual_loss(0.2, 30.0) + 0.001 * 12.0
        )


class TestSrPairs:
    def test_pair_shapes(self):
        img = ImageBuffer(np.random.default_rng(0).random((80, 100, 3)))
        hr, lr = SRKernels.make_sr_pair(img, 64, 4, Rng(1))
        assert (hr.width, hr.height) == (64, 64)
        assert (lr.width, lr.height) == (16, 16)

    def test_crop_is_deterministic(self):
        img = ImageBuffer(np.random.default_rng(0).random((40, 40, 3)))
        assert SRKernels.random_crop(img, 16, Rng(2)) == SRKernels.random_crop(img, 16, Rng(2))

    def test_crop_too_large(self):
        with pytest.raises(ValueError, match="does not fit"):
            SRKernels.random_crop(ImageBuffer.filled(10, 20, 0.0), 12, Rng(0))


class TestResize:
    """Tests for the resize helper."""

    def test_same_size_returns_input(self):
        img = ImageBuffer.filled(6, 4, 0.5)
        assert resize(img, 6, 4) is img

    def test_shrink_and_enlarge_constant(self):
        img = ImageBuffer.filled(8, 8, 0.6)
        small = resize(img, 4, 2)
        large = resize(img, 20, 16)
        assert (small.width, small.height) == (4, 2)
        assert (large.width, large.height) == (20, 16)
        assert np.allclose(small.data, 0.6)
        assert np.allclose(large.data, 0.6)

    def test_grayscale_keeps_channel_axis(self):
        out = resize(ImageBuffer(np.zeros((3, 3))), 6, 6)
        assert out.channels == 1

    def test_invalid_target(self):
        with pytest.raises(ValueError, match="must be positive"):
            resize(ImageBuffer.filled(4, 4, 0.0), 0, 4)
