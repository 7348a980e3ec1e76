"""Unit tests for error handling across repositories, services and the CLI."""

import json
import os
import tempfile

import numpy as np
import pytest
from click.testing import CliRunner

from src.cli import cli
from src.models import ImageBuffer, OperationSpec, PipelineConfig
from src.pipeline_service import PipelineService
from src.repository import DataRepository, ImageRepository


def write_text(path: str, content: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(content)


class TestRepositoryErrorHandling:
    """Tests for error handling in data repository operations."""

    def test_embeddings_with_text(self):
        """Test that a non-numeric embedding file raises IOError."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "z.csv")
            write_text(path, "1,0\nup,down\n")
            with pytest.raises(IOError, match="non-numeric"):
                DataRepository.load_embeddings(path)

    def test_empty_embedding_file(self):
        """Test that an empty embedding file raises IOError."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "z.csv")
            write_text(path, "")
            with pytest.raises(IOError, match="is empty"):
                DataRepository.load_embeddings(path)

    def test_tensor_without_shape_row(self):
        """Test that a tensor file must declare its shape first."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "t.csv")
            write_text(path, "0.5\n0.5\n")
            with pytest.raises(IOError, match="'W,H,C' row"):
                DataRepository.load_tensor(path)

    def test_label_file_without_columns(self):
        """Test that a label file needs true and pred columns."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "labels.csv")
            write_text(path, "actual,guess\nA,A\n")
            with pytest.raises(IOError, match="true,pred"):
                DataRepository.load_label_pairs(path)

    def test_save_into_missing_directory(self):
        """Test that writing into a missing directory raises IOError."""
        with pytest.raises(IOError, match="does not exist"):
            ImageRepository.save_image(ImageBuffer.filled(2, 2, 0.0), "/nonexistent/dir/x.png")


class TestPipelineErrorHandling:
    """Tests for per-item error isolation."""

    def test_item_too_small_for_operation(self):
        """Test that an image too small for patch swap fails alone."""
        with tempfile.TemporaryDirectory() as tmpdir:
            corpus = os.path.join(tmpdir, "corpus", "cmd")
            os.makedirs(corpus)
            generator = np.random.default_rng(0)
            ImageRepository.save_image(
                ImageBuffer(generator.integers(0, 256, (64, 64, 3)) / 255.0),
                os.path.join(corpus, "large.png"),
            )
            ImageRepository.save_image(ImageBuffer.filled(20, 20, 0.5), os.path.join(corpus, "small.png"))
            config = PipelineConfig(
                seed=1,
                operation=OperationSpec("patch-swap", {"patch_side": 16}),
                input=os.path.join(tmpdir, "corpus"),
                output=os.path.join(tmpdir, "out"),
            )

            report = PipelineService().run(config)

            assert report.succeeded == 1
            assert report.errors[0]["path"].endswith("small.png")
            assert "image too small" in report.errors[0]["error"]

    def test_invalid_operation_params(self):
        """Test that malformed parameters fail before any item is processed."""
        with pytest.raises(ValueError):
            PipelineService.build_transform(OperationSpec("gamma", {"level_min": 0}))


class TestCLIErrorHandling:
    """Tests for error messages and exit codes of the CLI."""

    def setup_method(self):
        """Set up test fixtures."""
        self.runner = CliRunner()

    def test_corrupted_config_file(self):
        """Test that a corrupted config file is reported as a config error."""
        with self.runner.isolated_filesystem():
            write_text("run.json", "{ invalid json }")
            result = self.runner.invoke(cli, ["--config", "run.json", "augment"])
            assert result.exit_code == 1
            assert "✗ 設定エラー" in result.output
            assert "corrupted" in result.output

    def test_unknown_log_level(self):
        """Test that an unknown log level is rejected."""
        result = self.runner.invoke(cli, ["--log-level", "LOUD", "permset"])
        assert result.exit_code == 1
        assert "Unknown log level" in result.output

    def test_corrupted_permutation_set(self):
        """Test that a corrupted permutation set file is reported."""
        with self.runner.isolated_filesystem():
            write_text("set.json", "{ invalid json }")
            ImageRepository.save_image(ImageBuffer.filled(9, 9, 0.5), "leaf.png")
            result = self.runner.invoke(
                cli, ["--seed", "1", "jigsaw", "leaf.png", "--permset", "set.json", "--output", "t"]
            )
            assert result.exit_code == 1
            assert "✗ 入出力エラー" in result.output

    def test_bad_operation_param(self):
        """Test that an out-of-range operation parameter is reported."""
        with self.runner.isolated_filesystem():
            os.makedirs("corpus")
            result = self.runner.invoke(
                cli, ["--seed", "1", "augment", "-o", "dcl-jigsaw", "-p", "k=0", "-i", "corpus"]
            )
            assert result.exit_code == 1
            assert "✗ 設定エラー" in result.output

    def test_param_without_equals(self):
        """Test that a parameter must be key=value."""
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(
                cli, ["--seed", "1", "augment", "-o", "gamma", "-p", "level_min", "-i", "x"]
            )
            assert result.exit_code == 1
            assert "key=value" in result.output

    def test_missing_input(self):
        """Test that a missing input path is reported as an input error."""
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(cli, ["--seed", "1", "augment", "-o", "gamma", "-i", "none"])
            assert result.exit_code == 1
            assert "✗ 入力エラー" in result.output

    def test_unknown_smartcrop_setting(self):
        """Test that an unknown smartcrop constant is rejected."""
        with self.runner.isolated_filesystem():
            ImageRepository.save_image(ImageBuffer.filled(64, 64, 0.5), "leaf.png")
            write_text("crop.json", json.dumps({"face_weight": 2.0}))
            result = self.runner.invoke(cli, ["smartcrop", "leaf.png", "--crop-config", "crop.json"])
            assert result.exit_code == 1
            assert "✗ 設定エラー" in result.output

    def test_manifest_missing_label_column(self):
        """Test that split reports a malformed manifest."""
        with self.runner.isolated_filesystem():
            write_text("manifest.csv", "path\na.png\n")
            result = self.runner.invoke(cli, ["--seed", "1", "split", "manifest.csv", "out.csv"])
            assert result.exit_code == 1
            assert "missing column" in result.output

    def test_shuffle_channels_not_divisible(self):
        """Test that pixel-shuffle reports an invalid channel count."""
        with self.runner.isolated_filesystem():
            write_text("t.csv", "1,1,3\n0.1,0.2,0.3\n")
            result = self.runner.invoke(cli, ["pixel-shuffle", "t.csv", "out.csv", "--r", "2"])
            assert result.exit_code == 1
            assert "✗ パラメータエラー" in result.output
