"""Seeded corpus pipelines: single-view augmentation, view pairs and SR pairs."""

import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Tuple, Union

from src.augment_service import Augmenter
from src.dataset_service import DatasetService
from src.grid import GridOps
from src.log import get_logger
from src.models import (
    DclParams,
    DropoutParams,
    GammaParams,
    ImageBuffer,
    Manifest,
    ManifestEntry,
    OperationSpec,
    PatchSwapParams,
    PipelineConfig,
    RunReport,
)
from src.repository import DataRepository, ImageRepository
from src.resize import resize
from src.rng import Rng
from src.smartcrop_service import SmartCropConfig, SmartCropper
from src.sr_kernels import SRKernels

logger = get_logger(__name__)

# (image, rng) -> (output image, JSON sidecar record or None)
Transform = Callable[[ImageBuffer, Rng], Tuple[ImageBuffer, Optional[Union[dict, list]]]]


def _grid_order(params: dict, default: int) -> int:
    n = int(params.get("n", default))
    if n < 1:
        raise ValueError(f"Grid order n must be at least 1, got {n}")
    return n


def _smartcrop_config(params: dict) -> SmartCropConfig:
    return SmartCropConfig.from_dict(
        {k: v for k, v in params.items() if k in SmartCropConfig().to_dict()}
    )


def _gamma(params: dict) -> Transform:
    gamma = GammaParams.from_dict(params)
    return lambda img, rng: (Augmenter.gamma_transform(img, gamma, rng), None)


def _coarse_dropout(params: dict) -> Transform:
    dropout = DropoutParams.from_dict(params)

    def apply(img: ImageBuffer, rng: Rng):
        out, squares = Augmenter.coarse_dropout_with_record(img, dropout, rng)
        return out, {"squares": [s.to_dict() for s in squares]}

    return apply


def _patch_swap(params: dict) -> Transform:
    swap = PatchSwapParams.from_dict(params)

    def apply(img: ImageBuffer, rng: Rng):
        out, squares = Augmenter.patch_swap_with_record(img, swap, rng)
        return out, {"squares": [s.to_dict() for s in squares]}

    return apply


def _random_jigsaw(params: dict) -> Transform:
    n = _grid_order(params, 3)

    def apply(img: ImageBuffer, rng: Rng):
        out, perm = Augmenter.random_jigsaw(img, n, rng)
        return out, perm.to_list()

    return apply


def _dcl_jigsaw(params: dict) -> Transform:
    dcl = DclParams.from_dict(params)

    def apply(img: ImageBuffer, rng: Rng):
        out, perm = Augmenter.dcl_jigsaw(img, dcl, rng)
        return out, perm.to_list()

    return apply


def _smartcrop_overlay(params: dict) -> Transform:
    cropper = SmartCropper(_smartcrop_config(params))

    def apply(img: ImageBuffer, rng: Rng):
        crop = cropper.smart_crop(img)
        return SmartCropper.overlay_on_white(img, crop), {"crop": crop.to_dict()}

    return apply


def _smartcrop_shuffle(params: dict) -> Transform:
    cropper = SmartCropper(_smartcrop_config(params))
    n = _grid_order(params, 3)

    def apply(img: ImageBuffer, rng: Rng):
        crop = cropper.smart_crop(img)
        out, perm = Augmenter.shuffle_outside_crop(img, crop, n, rng)
        return out, {"crop": crop.to_dict(), "permutation": perm.to_list()}

    return apply


def _identity(params: dict) -> Transform:
    return lambda img, rng: (img, None)


class PipelineService:
    """Apply registered operations to every item of a corpus."""

    OPERATIONS: Dict[str, Callable[[dict], Transform]] = {
        "gamma": _gamma,
        "coarse-dropout": _coarse_dropout,
        "patch-swap": _patch_swap,
        "random-jigsaw": _random_jigsaw,
        "dcl-jigsaw": _dcl_jigsaw,
        "smartcrop-overlay": _smartcrop_overlay,
        "smartcrop-shuffle": _smartcrop_shuffle,
        "identity": _identity,
    }

    # recipe -> (view A, view B); user params fill in for every view that is
    # not the identity, but never override the params fixed here.
    PAIR_RECIPES: Dict[str, Tuple[OperationSpec, OperationSpec]] = {
        "original+gamma": (OperationSpec("identity"), OperationSpec("gamma")),
        "original+dcl": (OperationSpec("identity"), OperationSpec("dcl-jigsaw")),
        "original+random-jigsaw": (
            OperationSpec("identity"),
            OperationSpec("random-jigsaw", {"n": 4}),
        ),
        "jigsaw4x4+jigsaw2x2": (
            OperationSpec("random-jigsaw", {"n": 4}),
            OperationSpec("random-jigsaw", {"n": 2}),
        ),
        "original+patchswap": (OperationSpec("identity"), OperationSpec("patch-swap")),
        "original+coarsedropout": (
            OperationSpec("identity"),
            OperationSpec("coarse-dropout"),
        ),
        "original+smartcrop-overlay": (
            OperationSpec("identity"),
            OperationSpec("smartcrop-overlay"),
        ),
        "original+smartcrop-shuffle": (
            OperationSpec("identity"),
            OperationSpec("smartcrop-shuffle"),
        ),
    }

    REPORT_NAME = "run_report.json"
    ITEM_ERRORS = (IOError, OSError, ValueError)

    class UnknownOperationError(ValueError):
        """Raised when an operation or pair recipe is not registered."""

        pass

    def __init__(
        self,
        image_repository: Optional[ImageRepository] = None,
        data_repository: Optional[DataRepository] = None,
        dataset_service: Optional[DatasetService] = None,
    ):
        """Initialize the service with its repositories."""
        self.images = image_repository or ImageRepository()
        self.data = data_repository or DataRepository()
        self.datasets = dataset_service or DatasetService(self.data)

    # ------------------------------------------------------------------
    # Inputs
    # ------------------------------------------------------------------

    @classmethod
    def build_transform(cls, spec: OperationSpec) -> Transform:
        """
        Resolve an operation spec to a transform.

        Raises:
            UnknownOperationError: If the name is not registered
            ValueError: If the parameters are invalid
        """
        factory = cls.OPERATIONS.get(spec.name)
        if factory is None:
            raise cls.UnknownOperationError(
                f"Unknown operation '{spec.name}'. Available: {', '.join(sorted(cls.OPERATIONS))}"
            )
        return factory(dict(spec.params))

    def load_inputs(self, source: str) -> Tuple[Manifest, str]:
        """
        Resolve the pipeline input to a manifest and the base directory of
        its relative paths.

        ``source`` may be a CSV manifest, a ``<label>/<image>`` directory
        tree or a single image file.

        Raises:
            IOError: If the input does not exist or cannot be read
        """
        if not source:
            raise IOError("No input given")
        if os.path.isdir(source):
            return self.datasets.scan_directory(source), ""
        if not os.path.isfile(source):
            raise IOError(f"Input '{source}' does not exist")
        if source.lower().endswith(".csv"):
            return self.data.load_manifest(source), os.path.dirname(source)
        label = os.path.basename(os.path.dirname(os.path.abspath(source))) or "unlabelled"
        return Manifest((ManifestEntry(path=source, label=label),)), ""

    @staticmethod
    def output_names(manifest: Manifest) -> List[str]:
        """File stems for every entry; colliding stems get an ``_<index>`` suffix."""
        stems = [os.path.splitext(os.path.basename(e.path))[0] for e in manifest.entries]
        counts: Dict[str, int] = {}
        for stem in stems:
            counts[stem] = counts.get(stem, 0) + 1
        return [
            stem if counts[stem] == 1 else f"{stem}_{index}" for index, stem in enumerate(stems)
        ]

    def prepare(
        self,
        path: str,
        size: Optional[Tuple[int, int]] = None,
        crop_divisible: Optional[int] = None,
    ) -> ImageBuffer:
        """Load an image and apply the optional resize and divisibility crop."""
        img = self.images.load_image(path)
        if size is not None:
            img = resize(img, *size)
        if crop_divisible:
            img = GridOps.center_crop_to_multiple(img, crop_divisible)
        return img

    # ------------------------------------------------------------------
    # Runs
    # ------------------------------------------------------------------

    def run(self, config: PipelineConfig) -> RunReport:
        """
        Apply the configured operation to every input item.

        Item i uses the stream ``Rng(seed).derive(i)``. Outputs go to
        ``<output>/<stem>.png`` with an optional ``<stem>.json`` sidecar, and
        the run report to ``<output>/run_report.json``.

        Raises:
            UnknownOperationError: If the operation is not registered
            IOError: If the input cannot be resolved
        """
        transform = self.build_transform(config.operation)

        def handle(index: int, img: ImageBuffer, rng: Rng, stem: str) -> dict:
            out, record = transform(img, rng)
            target = os.path.join(config.output, f"{stem}.png")
            self.images.save_image(out, target)
            if record is not None:
                self.data.write_json(os.path.join(config.output, f"{stem}.json"), record)
            return {"output": target}

        return self._execute(config, config.operation.name, [config.output], handle)

    def pair_emit(self, config: PipelineConfig, variant: str) -> RunReport:
        """
        Emit two views per item under ``a/`` and ``b/`` with matching names.

        View A uses ``derive(i).derive(0)`` and view B ``derive(i).derive(1)``.

        Raises:
            UnknownOperationError: If the recipe is not registered
        """
        recipe = self.PAIR_RECIPES.get(variant)
        if recipe is None:
            raise self.UnknownOperationError(
                f"Unknown pair recipe '{variant}'. Available: {', '.join(sorted(self.PAIR_RECIPES))}"
            )
        transforms = []
        for spec in recipe:
            # the recipe's own params (grid orders) win over user params
            params = {} if spec.name == "identity" else dict(config.operation.params)
            params.update(spec.params)
            transforms.append(self.build_transform(OperationSpec(spec.name, params)))
        view_dirs = [os.path.join(config.output, view) for view in ("a", "b")]

        def handle(index: int, img: ImageBuffer, rng: Rng, stem: str) -> dict:
            views = [
                transform(img, rng.derive(view)) for view, transform in enumerate(transforms)
            ]
            written: List[str] = []
            written_images: List[str] = []
            try:
                for (out, record), directory in zip(views, view_dirs):
                    target = os.path.join(directory, f"{stem}.png")
                    self.images.save_image(out, target)
                    written.append(target)
                    written_images.append(target)
                    if record is not None:
                        sidecar = os.path.join(directory, f"{stem}.json")
                        self.data.write_json(sidecar, record)
                        written.append(sidecar)
            except self.ITEM_ERRORS:
                for path in written:
                    os.remove(path)
                raise
            return {"output": {"a": written_images[0], "b": written_images[1]}}

        return self._execute(config, variant, view_dirs, handle)

    def sr_pair(
        self,
        config: PipelineConfig,
        crop_side: Optional[int] = None,
        factor: int = SRKernels.DEFAULT_FACTOR,
    ) -> RunReport:
        """Write high-resolution crops to ``hr/`` and their downscales to ``lr/``."""
        hr_dir = os.path.join(config.output, "hr")
        lr_dir = os.path.join(config.output, "lr")

        def handle(index: int, img: ImageBuffer, rng: Rng, stem: str) -> dict:
            hr, lr = SRKernels.make_sr_pair(img, crop_side, factor, rng)
            outputs = {"hr": os.path.join(hr_dir, f"{stem}.png"), "lr": os.path.join(lr_dir, f"{stem}.png")}
            self.images.save_image(hr, outputs["hr"])
            self.images.save_image(lr, outputs["lr"])
            return {"output": outputs}

        return self._execute(config, f"sr-pair-x{factor}", [hr_dir, lr_dir], handle)

    def _execute(
        self,
        config: PipelineConfig,
        name: str,
        directories: List[str],
        handle: Callable[[int, ImageBuffer, Rng, str], dict],
    ) -> RunReport:
        started = time.perf_counter()
        manifest, base_dir = self.load_inputs(config.input)
        for directory in directories:
            os.makedirs(directory, exist_ok=True)
        root = Rng(config.seed)
        stems = self.output_names(manifest)

        def process(index: int) -> Tuple[bool, dict]:
            entry = manifest.entries[index]
            rng = root.derive(index)
            try:
                img = self.prepare(
                    os.path.join(base_dir, entry.path), config.resize, config.crop_divisible
                )
                result = handle(index, img, rng, stems[index])
            except self.ITEM_ERRORS as e:
                logger.info("item %d %s failed", index, entry.path)
                logger.debug("item %d error: %s", index, e)
                return False, {"index": index, "path": entry.path, "error": str(e)}
            logger.info("item %d %s ok", index, entry.path)
            return True, {"index": index, "path": entry.path, "seed": rng.seed, **result}

        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(process, range(len(manifest))))

        report = RunReport(operation=name, seed=config.seed, total=len(manifest))
        for ok, item in outcomes:
            (report.items if ok else report.errors).append(item)
        report.elapsed_seconds = round(time.perf_counter() - started, 6)

        os.makedirs(config.output, exist_ok=True)
        self.data.write_json(os.path.join(config.output, self.REPORT_NAME), report.to_dict())
        logger.info(
            "%s: %d/%d items succeeded in %.3fs",
            name,
            report.succeeded,
            report.total,
            report.elapsed_seconds,
        )
        return report
