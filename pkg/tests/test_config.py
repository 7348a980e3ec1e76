"""Tests for configuration loading and flag merging."""

import json
import os
import tempfile

import pytest

from src.config import ConfigError, build_pipeline_config, load_json_config, parse_size
from src.models import OperationSpec


class TestParseSize:
    @pytest.mark.parametrize(
        "value,expected",
        [("224x224", (224, 224)), (" 640 X 480 ", (640, 480)), ([32, 16], (32, 16)), (None, None)],
    )
    def test_accepted_forms(self, value, expected):
        assert parse_size(value) == expected

    @pytest.mark.parametrize("value", ["224", "axb", [1], 5])
    def test_rejected_forms(self, value):
        with pytest.raises(ConfigError):
            parse_size(value)

    def test_zero_side(self):
        with pytest.raises(ConfigError, match="must be positive"):
            parse_size("0x10")


class TestLoadJsonConfig:
    def test_reads_object(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "run.json")
            with open(path, "w", encoding="utf-8") as f:
                json.dump({"seed": 3, "operation": "gamma"}, f)
            assert load_json_config(path) == {"seed": 3, "operation": "gamma"}

    def test_array_is_rejected(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "run.json")
            with open(path, "w", encoding="utf-8") as f:
                f.write("[1, 2]")
            with pytest.raises(ConfigError, match="JSON object"):
                load_json_config(path)

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_json_config("/nonexistent/run.json")


class TestBuildPipelineConfig:
    """Tests for merging file values and flags."""

    def test_flags_override_file_values(self):
        config = build_pipeline_config(
            {"seed": 1, "jobs": 4, "output": "from-file"}, seed=9, jobs=None, output="out"
        )
        assert (config.seed, config.jobs, config.output) == (9, 4, "out")

    def test_operation_with_params(self):
        config = build_pipeline_config(
            {"seed": 2, "operation": {"name": "dcl-jigsaw", "params": {"n": 5, "k": 1}}}
        )
        assert config.operation == OperationSpec("dcl-jigsaw", {"n": 5, "k": 1})

    def test_defaults(self):
        config = build_pipeline_config(seed=0)
        assert config.operation.name == "identity"
        assert (config.output, config.jobs, config.resize, config.crop_divisible) == (
            "output",
            1,
            None,
            None,
        )

    def test_resize_string(self):
        assert build_pipeline_config(seed=0, resize="64x48").resize == (64, 48)

    def test_seed_is_mandatory(self):
        with pytest.raises(ConfigError, match="seed is mandatory"):
            build_pipeline_config({"operation": "gamma"})

    def test_params_must_be_object(self):
        with pytest.raises(ConfigError, match="params"):
            build_pipeline_config({"seed": 1, "operation": {"name": "gamma", "params": [1]}})

    def test_invalid_jobs(self):
        with pytest.raises(ConfigError, match="Invalid pipeline config"):
            build_pipeline_config(seed=1, jobs=0)
