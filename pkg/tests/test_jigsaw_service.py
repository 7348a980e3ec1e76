"""Tests for permutation-set generation and jigsaw tile emission."""

import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.grid import GridOps
from src.jigsaw_service import JigsawPretext, PermutationSetBuilder, all_permutations
from src.models import ImageBuffer, JigsawSample, PermutationSet
from src.rng import Rng


@pytest.fixture(scope="module")
def exhaustive_set():
    return PermutationSetBuilder().generate(100, candidate_pool=0, rng=Rng(42))


@pytest.fixture(scope="module")
def pooled_set():
    return PermutationSetBuilder().generate(100, candidate_pool=200, rng=Rng(42))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=1, max_value=8))
def test_reassembly_restores_image(seed, cell):
    """
    **Feature: fgssl, Property 10: タイルは逆順列で元画像に戻る**

    For any seed and tile size, the tiles of a jigsaw sample placed back
    under the inverse of the labelled permutation give the source image.
    """
    pset = PermutationSetBuilder().generate(10, candidate_pool=50, rng=Rng(seed))
    img = ImageBuffer(np.random.default_rng(seed).random((3 * cell, 3 * cell, 3)))
    sample = JigsawPretext.make_jigsaw_sample(img, pset, Rng(seed).derive(1))
    assert 0 <= sample.label < len(pset)
    assert JigsawPretext.reassemble(sample, pset) == img


class TestPermutationSetBuilder:
    """Tests for greedy set generation."""

    def test_pair_disagrees_everywhere(self):
        pset = PermutationSetBuilder().generate(2, candidate_pool=0, rng=Rng(1))
        assert pset.mean_hamming == 9.0

    def test_hundred_exhaustive_mean(self, exhaustive_set):
        assert len(exhaustive_set) == 100
        assert exhaustive_set.mean_hamming >= 8.0

    def test_hamming_matrix_symmetric_with_zero_diagonal(self, pooled_set):
        matrix = pooled_set.pairwise_hamming
        assert np.array_equal(matrix, matrix.T)
        assert not np.diagonal(matrix).any()

    def test_first_nine_disagree_everywhere(self, exhaustive_set):
        # a k x 9 Latin rectangle always extends, so nine mutual derangements exist
        assert exhaustive_set.prefix(9).min_hamming == 9

    def test_prefix_mean_does_not_grow(self, exhaustive_set):
        means = [exhaustive_set.prefix(k).mean_hamming for k in (2, 5, 9, 100)]
        assert means == sorted(means, reverse=True)

    def test_deterministic(self):
        builder = PermutationSetBuilder()
        a = builder.generate(20, candidate_pool=500, rng=Rng(3))
        b = builder.generate(20, candidate_pool=500, rng=Rng(3))
        assert a.perms == b.perms

    def test_small_length_covers_all_permutations(self):
        pset = PermutationSetBuilder(length=3).generate(6, candidate_pool=0, rng=Rng(0))
        assert sorted(pset.perms) == [tuple(p) for p in all_permutations(3).tolist()]

    def test_all_permutations_table(self):
        table = all_permutations(4)
        assert table.shape == (math.factorial(4), 4)
        assert table[0].tolist() == [0, 1, 2, 3]

    def test_count_below_two(self):
        with pytest.raises(PermutationSetBuilder.SetSizeError, match="at least 2"):
            PermutationSetBuilder().generate(1)

    def test_count_above_factorial(self):
        with pytest.raises(PermutationSetBuilder.SetSizeError, match="exceeds the 6 permutations"):
            PermutationSetBuilder(length=3).generate(7)

    def test_negative_pool(self):
        with pytest.raises(ValueError, match="non-negative"):
            PermutationSetBuilder().generate(5, candidate_pool=-1)


class TestJigsawPretext:
    """Tests for sample emission."""

    def test_identity_set_gives_reading_order(self):
        img = ImageBuffer(np.random.default_rng(0).random((9, 9, 3)))
        pset = PermutationSet((tuple(range(9)),))
        sample = JigsawPretext.make_jigsaw_sample(img, pset, Rng(5))
        assert sample.label == 0
        for tile, expected in zip(sample.tiles, GridOps.tiles(img, 3)):
            assert tile == expected

    def test_label_frequencies_are_uniform(self, pooled_set):
        img = ImageBuffer.filled(3, 3, 0.5)
        root = Rng(7)
        counts = Counter(
            JigsawPretext.make_jigsaw_sample(img, pooled_set, root.derive(k)).label
            for k in range(3000)
        )
        sigma = math.sqrt(3000 * 0.01 * 0.99)
        for label in range(100):
            assert abs(counts[label] - 30) <= 5 * sigma

    def test_multiple_samples_use_distinct_streams(self, pooled_set):
        img = ImageBuffer(np.random.default_rng(1).random((6, 6, 3)))
        samples = JigsawPretext.make_jigsaw_samples(img, pooled_set, 8, Rng(2))
        assert len(samples) == 8
        assert len({s.label for s in samples}) > 1

    def test_not_divisible_by_three(self, pooled_set):
        with pytest.raises(GridOps.DivisibilityError):
            JigsawPretext.make_jigsaw_sample(ImageBuffer.filled(10, 9, 0.0), pooled_set, Rng(0))

    def test_permutation_length_mismatch(self):
        pset = PermutationSet(((0, 1, 2, 3), (1, 0, 3, 2)))
        with pytest.raises(ValueError, match="does not match a 3x3 grid"):
            JigsawPretext.make_jigsaw_sample(ImageBuffer.filled(9, 9, 0.0), pset, Rng(0))

    def test_reassemble_rejects_unknown_label(self, pooled_set):
        tiles = tuple(GridOps.tiles(ImageBuffer.filled(3, 3, 0.0), 3))
        with pytest.raises(IndexError, match="outside a set of 100"):
            JigsawPretext.reassemble(JigsawSample(tiles=tiles, label=100), pooled_set)
