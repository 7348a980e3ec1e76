"""Corpus manifests: scanning, stratified splitting and class weights."""

import math
import os
from typing import Dict, List, Optional

import numpy as np
from sklearn.utils.class_weight import compute_class_weight

from src.log import get_logger
from src.models import ClassWeights, Manifest, ManifestEntry
from src.repository import DataRepository
from src.rng import Rng

logger = get_logger(__name__)


class DatasetService:
    """Service for manifest-level dataset operations."""

    DEFAULT_TRAIN_FRACTION = 0.8
    IMAGE_EXTENSIONS = (".png", ".ppm", ".pnm")
    # absorbs float error in fraction * n, e.g. 0.7 * 10
    FLOOR_EPSILON = 1e-9

    class SplitError(ValueError):
        """Raised when a class cannot be split into train and val."""

        pass

    class EmptyManifestError(ValueError):
        """Raised when an operation needs at least one entry."""

        pass

    def __init__(self, repository: Optional[DataRepository] = None):
        """Initialize the service with a repository."""
        self.repository = repository or DataRepository()

    @staticmethod
    def _group_by_label(manifest: Manifest) -> Dict[str, List[int]]:
        groups: Dict[str, List[int]] = {}
        for index, entry in enumerate(manifest.entries):
            groups.setdefault(entry.label, []).append(index)
        return dict(sorted(groups.items()))

    def stratified_split(
        self,
        manifest: Manifest,
        train_fraction: float = DEFAULT_TRAIN_FRACTION,
        rng: Optional[Rng] = None,
    ) -> Manifest:
        """
        Tag every entry train or val, class by class.

        Each class c with n_c entries gets floor(train_fraction * n_c) train
        entries, clamped so that both sides keep at least one. Classes are
        processed in sorted label order, each consuming one permutation
        from ``rng``. Entry order is preserved.

        Args:
            manifest: The corpus to split; existing split tags are replaced
            train_fraction: Fraction of each class tagged train
            rng: Random stream choosing the train entries

        Returns:
            A new Manifest with every entry tagged

        Raises:
            SplitError: If any class has fewer than 2 entries
            ValueError: If train_fraction is not strictly between 0 and 1
        """
        if not 0.0 < train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
        rng = rng or Rng(0)
        groups = self._group_by_label(manifest)
        for label, indices in groups.items():
            if len(indices) < 2:
                raise self.SplitError(
                    f"class '{label}' has {len(indices)} entr{'y' if len(indices) == 1 else 'ies'}; "
                    "at least 2 are needed to split"
                )

        tags = ["val"] * len(manifest)
        for label, indices in groups.items():
            count = len(indices)
            train_count = math.floor(train_fraction * count + self.FLOOR_EPSILON)
            train_count = min(max(train_count, 1), count - 1)
            order = rng.permutation(count)
            for position in order[:train_count]:
                tags[indices[position]] = "train"
            logger.debug("split %s: %d train / %d val", label, train_count, count - train_count)

        return Manifest(
            tuple(
                ManifestEntry(path=entry.path, label=entry.label, split=tag)
                for entry, tag in zip(manifest.entries, tags)
            )
        )

    def class_weights(self, manifest: Manifest) -> ClassWeights:
        """
        Balanced inverse-frequency weights w_c = N / (K * n_c).

        Raises:
            EmptyManifestError: If the manifest has no entries
        """
        if len(manifest) == 0:
            raise self.EmptyManifestError("Cannot compute class weights of an empty manifest")
        classes = np.array(manifest.labels)
        labels = np.array([entry.label for entry in manifest.entries])
        weights = compute_class_weight(class_weight="balanced", classes=classes, y=labels)
        return ClassWeights({str(c): float(w) for c, w in zip(classes, weights)})

    def scan_directory(self, root: str) -> Manifest:
        """
        Build a manifest from a ``root/<label>/<image>`` tree.

        Only PNG and PPM files are listed; labels and file names are sorted.

        Raises:
            IOError: If root is not a directory
        """
        if not os.path.isdir(root):
            raise IOError(f"Corpus directory '{root}' does not exist")
        entries = []
        for label in sorted(os.listdir(root)):
            label_dir = os.path.join(root, label)
            if not os.path.isdir(label_dir) or label.startswith("."):
                continue
            for name in sorted(os.listdir(label_dir)):
                path = os.path.join(label_dir, name)
                if os.path.isfile(path) and name.lower().endswith(self.IMAGE_EXTENSIONS):
                    entries.append(ManifestEntry(path=path, label=label))
        logger.info("scanned %s: %d images", root, len(entries))
        return Manifest(tuple(entries))

    def split_counts(self, manifest: Manifest) -> Dict[str, Dict[str, int]]:
        """Per-class train/val counts of a tagged manifest."""
        counts: Dict[str, Dict[str, int]] = {}
        for entry in manifest.entries:
            slot = counts.setdefault(entry.label, {"train": 0, "val": 0})
            if entry.split in slot:
                slot[entry.split] += 1
        return dict(sorted(counts.items()))
