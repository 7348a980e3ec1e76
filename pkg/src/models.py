"""Data models for the fine-grained self-supervision toolkit."""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np


def _readonly(array: np.ndarray) -> np.ndarray:
    """Return a float64 copy of ``array`` that cannot be written to."""
    frozen = np.array(array, dtype=np.float64, copy=True)
    frozen.setflags(write=False)
    return frozen


# ============================================================================
# image-core
# ============================================================================


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """An H x W x C image with intensities in [0, 1].

    The array is stored row-major with a top-left origin and interleaved
    channels. Instances are immutable; operations return new buffers.
    """

    data: np.ndarray

    def __post_init__(self):
        array = np.asarray(self.data)
        if array.ndim == 2:
            array = array[:, :, np.newaxis]
        if array.ndim != 3:
            raise ValueError(f"Image data must be H x W x C, got shape {array.shape}")
        height, width, channels = array.shape
        if height == 0 or width == 0:
            raise ValueError("Image must not have a zero dimension")
        if channels not in (1, 3):
            raise ValueError(f"Image must have 1 or 3 channels, got {channels}")
        array = _readonly(array)
        if not np.all(np.isfinite(array)):
            raise ValueError("Image data contains non-finite values")
        if array.min() < 0.0 or array.max() > 1.0:
            raise ValueError("Image intensities must lie in [0, 1]")
        object.__setattr__(self, "data", array)

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def channels(self) -> int:
        return int(self.data.shape[2])

    @classmethod
    def filled(
        cls, width: int, height: int, value: float, channels: int = 3
    ) -> "ImageBuffer":
        """Create a constant image."""
        return cls(np.full((height, width, channels), value, dtype=np.float64))

    def copy_data(self) -> np.ndarray:
        """Return a writable copy of the pixel array."""
        return np.array(self.data, copy=True)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True)
class RegionGrid:
    """An n x n tiling of an image into equal cells."""

    n: int
    cell_width: int
    cell_height: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"Grid order must be at least 1, got {self.n}")
        if self.cell_width < 1 or self.cell_height < 1:
            raise ValueError("Grid cells must be at least 1 x 1 pixels")

    @property
    def cell_count(self) -> int:
        return self.n * self.n


@dataclass(frozen=True)
class GridPermutation:
    """A bijection on the n*n cells of a region grid.

    Output cell ``i`` holds input cell ``mapping[i]`` (cells are numbered in
    reading order).
    """

    n: int
    mapping: Tuple[int, ...]

    def __post_init__(self):
        mapping = tuple(int(i) for i in self.mapping)
        if self.n < 1:
            raise ValueError(f"Grid order must be at least 1, got {self.n}")
        size = self.n * self.n
        if len(mapping) != size or sorted(mapping) != list(range(size)):
            raise ValueError(
                f"Mapping must be a permutation of 0..{size - 1}, got {list(mapping)}"
            )
        object.__setattr__(self, "mapping", mapping)

    @classmethod
    def identity(cls, n: int) -> "GridPermutation":
        return cls(n=n, mapping=tuple(range(n * n)))

    def inverse(self) -> "GridPermutation":
        """Return the permutation that undoes this one."""
        inverse = [0] * len(self.mapping)
        for position, source in enumerate(self.mapping):
            inverse[source] = position
        return GridPermutation(n=self.n, mapping=tuple(inverse))

    def is_identity(self) -> bool:
        return all(i == source for i, source in enumerate(self.mapping))

    def to_dict(self) -> dict:
        """Convert the GridPermutation instance to a dictionary."""
        return {"n": self.n, "mapping": list(self.mapping)}

    @classmethod
    def from_dict(cls, data: dict) -> "GridPermutation":
        """Create a GridPermutation instance from a dictionary."""
        return cls(n=int(data["n"]), mapping=tuple(data["mapping"]))

    def to_list(self) -> List[int]:
        """The mapping as a bare integer list; n is its square root."""
        return list(self.mapping)

    @classmethod
    def from_list(cls, mapping: Sequence[int]) -> "GridPermutation":
        n = math.isqrt(len(mapping))
        if n * n != len(mapping):
            raise ValueError(f"Mapping length {len(mapping)} is not a square")
        return cls(n=n, mapping=tuple(mapping))


# ============================================================================
# augment
# ============================================================================


@dataclass(frozen=True)
class GammaParams:
    """Range of gamma levels; level L maps p to p ** (L / 100)."""

    level_min: int = 50
    level_max: int = 250

    def __post_init__(self):
        if not (1 <= self.level_min <= 1000 and 1 <= self.level_max <= 1000):
            raise ValueError("Gamma levels must lie in [1, 1000]")
        if self.level_min > self.level_max:
            raise ValueError(
                f"level_min ({self.level_min}) must not exceed level_max ({self.level_max})"
            )

    def to_dict(self) -> dict:
        return {"level_min": self.level_min, "level_max": self.level_max}

    @classmethod
    def from_dict(cls, data: dict) -> "GammaParams":
        return cls(
            level_min=int(data.get("level_min", 50)),
            level_max=int(data.get("level_max", 250)),
        )


@dataclass(frozen=True)
class DropoutParams:
    """Coarse dropout: ``hole_count`` black squares with sides in a range."""

    hole_count: int = 8
    side_min: int = 10
    side_max: int = 25

    def __post_init__(self):
        if self.hole_count < 1:
            raise ValueError("hole_count must be at least 1")
        if not 0 < self.side_min <= self.side_max:
            raise ValueError(
                f"Square sides must satisfy 0 < side_min <= side_max, "
                f"got {self.side_min}..{self.side_max}"
            )

    def to_dict(self) -> dict:
        return {
            "hole_count": self.hole_count,
            "side_min": self.side_min,
            "side_max": self.side_max,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DropoutParams":
        return cls(
            hole_count=int(data.get("hole_count", 8)),
            side_min=int(data.get("side_min", 10)),
            side_max=int(data.get("side_max", 25)),
        )


@dataclass(frozen=True)
class PatchSwapParams:
    """Side length of the two square patches exchanged by patch swapping."""

    patch_side: int = 200

    def __post_init__(self):
        if self.patch_side < 1:
            raise ValueError("patch_side must be at least 1")

    def to_dict(self) -> dict:
        return {"patch_side": self.patch_side}

    @classmethod
    def from_dict(cls, data: dict) -> "PatchSwapParams":
        return cls(patch_side=int(data.get("patch_side", 200)))


@dataclass(frozen=True)
class DclParams:
    """Grid order and neighbourhood radius for region confusion shuffling."""

    n: int = 7
    k: int = 2

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("Grid order n must be at least 1")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"Neighbourhood radius k must satisfy 1 <= k <= n ({self.n}), got {self.k}")

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k}

    @classmethod
    def from_dict(cls, data: dict) -> "DclParams":
        return cls(n=int(data.get("n", 7)), k=int(data.get("k", 2)))


@dataclass(frozen=True)
class Square:
    """An axis-aligned square region touched by an augmentation."""

    x: int
    y: int
    side: int

    def contains(self, px: int, py: int) -> bool:
        return self.x <= px < self.x + self.side and self.y <= py < self.y + self.side

    def overlaps(self, other: "Square") -> bool:
        return (
            self.x < other.x + other.side
            and other.x < self.x + self.side
            and self.y < other.y + other.side
            and other.y < self.y + self.side
        )

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "side": self.side}


# ============================================================================
# smartcrop
# ============================================================================


@dataclass(frozen=True)
class CropCandidate:
    """A square crop window with its importance score."""

    x: int
    y: int
    side: int
    score: float = 0.0

    def __post_init__(self):
        if self.side < 1:
            raise ValueError("Crop side must be at least 1")
        if self.x < 0 or self.y < 0:
            raise ValueError("Crop origin must not be negative")

    def fits(self, width: int, height: int) -> bool:
        """Return True if the crop lies fully inside a width x height image."""
        return self.x + self.side <= width and self.y + self.side <= height

    def to_dict(self) -> dict:
        """Convert the CropCandidate instance to a dictionary."""
        return {"x": self.x, "y": self.y, "side": self.side, "score": self.score}

    @classmethod
    def from_dict(cls, data: dict) -> "CropCandidate":
        """Create a CropCandidate instance from a dictionary."""
        return cls(
            x=int(data["x"]),
            y=int(data["y"]),
            side=int(data["side"]),
            score=float(data.get("score", 0.0)),
        )


@dataclass(frozen=True, eq=False)
class SaliencyMaps:
    """Per-pixel edge and saturation maps of one image."""

    edge: np.ndarray
    saturation_boost: np.ndarray

    def __post_init__(self):
        edge = _readonly(self.edge)
        saturation = _readonly(self.saturation_boost)
        if edge.ndim != 2 or edge.shape != saturation.shape:
            raise ValueError(
                f"Saliency maps must be matching 2-D arrays, got {edge.shape} and {saturation.shape}"
            )
        if edge.min() < 0 or saturation.min() < 0:
            raise ValueError("Saliency maps must be non-negative")
        object.__setattr__(self, "edge", edge)
        object.__setattr__(self, "saturation_boost", saturation)

    @property
    def width(self) -> int:
        return int(self.edge.shape[1])

    @property
    def height(self) -> int:
        return int(self.edge.shape[0])

    def scaled(self, factor: float) -> "SaliencyMaps":
        return SaliencyMaps(self.edge * factor, self.saturation_boost * factor)


# ============================================================================
# jigsaw-pretext
# ============================================================================


@dataclass(frozen=True, eq=False)
class PermutationSet:
    """A set of distinct tile permutations with pairwise Hamming statistics."""

    perms: Tuple[Tuple[int, ...], ...]
    pairwise_hamming: np.ndarray = field(init=False, repr=False)
    mean_hamming: float = field(init=False)
    min_hamming: int = field(init=False)

    def __post_init__(self):
        perms = tuple(tuple(int(v) for v in perm) for perm in self.perms)
        if not perms:
            raise ValueError("Permutation set must not be empty")
        length = len(perms[0])
        for perm in perms:
            if len(perm) != length or sorted(perm) != list(range(length)):
                raise ValueError(f"Not a permutation of 0..{length - 1}: {list(perm)}")
        if len(set(perms)) != len(perms):
            raise ValueError("Permutation set contains duplicates")

        array = np.array(perms, dtype=np.int64)
        hamming = (array[:, np.newaxis, :] != array[np.newaxis, :, :]).sum(axis=2)
        count = len(perms)
        if count >= 2:
            upper = hamming[np.triu_indices(count, k=1)]
            mean = float(upper.mean())
            minimum = int(upper.min())
        else:
            mean = math.nan
            minimum = 0
        hamming.setflags(write=False)

        object.__setattr__(self, "perms", perms)
        object.__setattr__(self, "pairwise_hamming", hamming)
        object.__setattr__(self, "mean_hamming", mean)
        object.__setattr__(self, "min_hamming", minimum)

    def __len__(self) -> int:
        return len(self.perms)

    @property
    def length(self) -> int:
        return len(self.perms[0])

    def prefix(self, count: int) -> "PermutationSet":
        return PermutationSet(self.perms[:count])

    def to_dict(self) -> dict:
        """Convert the PermutationSet instance to a dictionary."""
        return {
            "perms": [list(perm) for perm in self.perms],
            "count": len(self.perms),
            "mean_hamming": self.mean_hamming,
            "min_hamming": self.min_hamming,
            "pairwise_hamming": self.pairwise_hamming.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PermutationSet":
        """Create a PermutationSet from a dictionary; statistics are recomputed."""
        return cls(perms=tuple(tuple(perm) for perm in data["perms"]))


@dataclass(frozen=True)
class JigsawSample:
    """Shuffled 3 x 3 tiles of one image plus the permutation label."""

    tiles: Tuple[ImageBuffer, ...]
    label: int

    def to_dict(self) -> dict:
        return {"label": self.label, "tiles": len(self.tiles)}


# ============================================================================
# contrastive
# ============================================================================


@dataclass(frozen=True, eq=False)
class EmbeddingBatch:
    """2N embedding rows where rows (2m, 2m + 1) are the positive pair m."""

    vectors: np.ndarray

    def __post_init__(self):
        vectors = _readonly(self.vectors)
        if vectors.ndim != 2:
            raise ValueError(f"Embeddings must be a 2-D array, got shape {vectors.shape}")
        rows, dim = vectors.shape
        if rows == 0 or rows % 2 != 0:
            raise ValueError(f"Embedding batch needs an even, non-zero row count, got {rows}")
        if dim == 0:
            raise ValueError("Embedding dimension must be at least 1")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("Embeddings contain non-finite values")
        norms = np.linalg.norm(vectors, axis=1)
        zero_rows = np.flatnonzero(norms == 0.0)
        if zero_rows.size:
            raise ValueError(f"Embedding row {int(zero_rows[0])} has zero norm")
        object.__setattr__(self, "vectors", vectors)

    @property
    def pair_count(self) -> int:
        return int(self.vectors.shape[0] // 2)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def rows(self) -> int:
        return int(self.vectors.shape[0])


@dataclass(frozen=True)
class Temperature:
    """Softmax temperature of the contrastive loss."""

    tau: float = 0.5

    def __post_init__(self):
        if not self.tau > 0 or not math.isfinite(self.tau):
            raise ValueError(f"Temperature must be a positive number, got {self.tau}")


# ============================================================================
# sr-kernels
# ============================================================================


@dataclass(frozen=True, eq=False)
class Tensor3:
    """A real-valued H x W x C tensor (pixels or feature maps)."""

    data: np.ndarray

    def __post_init__(self):
        array = _readonly(self.data)
        if array.ndim != 3:
            raise ValueError(f"Tensor data must be H x W x C, got shape {array.shape}")
        object.__setattr__(self, "data", array)

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def channels(self) -> int:
        return int(self.data.shape[2])

    @property
    def shape(self) -> Tuple[int, int, int]:
        """Shape as (W, H, C)."""
        return (self.width, self.height, self.channels)

    @classmethod
    def from_image(cls, img: ImageBuffer) -> "Tensor3":
        return cls(img.data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tensor3):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    __hash__ = None


# ============================================================================
# dataset-metrics
# ============================================================================

SPLIT_TAGS = ("train", "val")


@dataclass(frozen=True)
class ManifestEntry:
    """One labelled image of a corpus."""

    path: str
    label: str
    split: Optional[str] = None

    def __post_init__(self):
        if not self.path:
            raise ValueError("Manifest entry path must not be empty")
        if not self.label or not str(self.label).strip():
            raise ValueError(f"Manifest entry '{self.path}' has an empty label")
        if self.split is not None and self.split not in SPLIT_TAGS:
            raise ValueError(f"Split tag must be one of {SPLIT_TAGS}, got '{self.split}'")

    def to_dict(self) -> dict:
        data = {"path": self.path, "label": self.label}
        if self.split is not None:
            data["split"] = self.split
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ManifestEntry":
        split = data.get("split") or None
        return cls(path=str(data["path"]), label=str(data["label"]), split=split)


@dataclass(frozen=True)
class Manifest:
    """An ordered, labelled corpus listing."""

    entries: Tuple[ManifestEntry, ...] = ()

    def __post_init__(self):
        entries = tuple(self.entries)
        seen = set()
        for entry in entries:
            if entry.path in seen:
                raise ValueError(f"Duplicate manifest path '{entry.path}'")
            seen.add(entry.path)
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def labels(self) -> List[str]:
        """Distinct labels in sorted order."""
        return sorted({entry.label for entry in self.entries})

    def counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for entry in self.entries:
            counts[entry.label] = counts.get(entry.label, 0) + 1
        return dict(sorted(counts.items()))

    def by_split(self, split: str) -> "Manifest":
        return Manifest(tuple(e for e in self.entries if e.split == split))

    def to_dict(self) -> dict:
        return {"entries": [entry.to_dict() for entry in self.entries]}

    @classmethod
    def from_dict(cls, data: dict) -> "Manifest":
        return cls(tuple(ManifestEntry.from_dict(item) for item in data["entries"]))


@dataclass(frozen=True)
class ClassWeights:
    """Per-class loss or sampling multipliers."""

    weights: Dict[str, float]

    def __post_init__(self):
        for label, weight in self.weights.items():
            if not weight > 0:
                raise ValueError(f"Class weight for '{label}' must be positive, got {weight}")

    def to_dict(self) -> dict:
        return dict(self.weights)


@dataclass(frozen=True)
class EvalReport:
    """Per-class precision/recall/F1, accuracy and the confusion matrix."""

    labels: Tuple[str, ...]
    precision: Dict[str, float]
    recall: Dict[str, float]
    f1: Dict[str, float]
    support: Dict[str, int]
    accuracy: float
    confusion: Tuple[Tuple[int, ...], ...]
    unknown_labels: Tuple[str, ...] = ()

    @property
    def total(self) -> int:
        return int(sum(sum(row) for row in self.confusion))

    @property
    def macro_precision(self) -> float:
        return _mean(self.precision.values())

    @property
    def macro_recall(self) -> float:
        return _mean(self.recall.values())

    @property
    def macro_f1(self) -> float:
        return _mean(self.f1.values())

    def to_dict(self) -> dict:
        """Convert the EvalReport instance to a dictionary."""
        return {
            "labels": list(self.labels),
            "classes": {
                label: {
                    "precision": self.precision[label],
                    "recall": self.recall[label],
                    "f1": self.f1[label],
                    "support": self.support[label],
                }
                for label in self.labels
            },
            "accuracy": self.accuracy,
            "macro_avg": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
            },
            "confusion_matrix": [list(row) for row in self.confusion],
            "unknown_labels": list(self.unknown_labels),
            "total": self.total,
        }


def _mean(values: Sequence[float]) -> float:
    values = list(values)
    return float(sum(values) / len(values)) if values else 0.0


# ============================================================================
# pipeline-cli
# ============================================================================


@dataclass(frozen=True)
class OperationSpec:
    """A registered operation name and its parameter map."""

    name: str
    params: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, data: dict) -> "OperationSpec":
        return cls(name=str(data["name"]), params=dict(data.get("params", {})))


@dataclass(frozen=True)
class PipelineConfig:
    """Everything needed to reproduce one corpus run."""

    seed: int
    operation: OperationSpec
    input: str
    output: str
    resize: Optional[Tuple[int, int]] = None
    jobs: int = 1
    crop_divisible: Optional[int] = None

    def __post_init__(self):
        if self.seed is None:
            raise ValueError("A seed is mandatory")
        if self.jobs < 1:
            raise ValueError(f"jobs must be at least 1, got {self.jobs}")
        if self.resize is not None:
            width, height = self.resize
            if width < 1 or height < 1:
                raise ValueError(f"Resize target must be positive, got {width}x{height}")
        if self.crop_divisible is not None and self.crop_divisible < 1:
            raise ValueError("crop_divisible must be at least 1")

    def to_dict(self) -> dict:
        """Convert the PipelineConfig instance to a dictionary."""
        return {
            "seed": self.seed,
            "operation": self.operation.to_dict(),
            "input": self.input,
            "output": self.output,
            "resize": list(self.resize) if self.resize else None,
            "jobs": self.jobs,
            "crop_divisible": self.crop_divisible,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        """Create a PipelineConfig instance from a dictionary."""
        if data.get("seed") is None:
            raise ValueError("A seed is mandatory")
        operation = data.get("operation") or {"name": "identity"}
        if isinstance(operation, str):
            operation = {"name": operation}
        resize = data.get("resize")
        return cls(
            seed=int(data["seed"]),
            operation=OperationSpec.from_dict(operation),
            input=str(data.get("input", "")),
            output=str(data.get("output", "output")),
            resize=tuple(int(v) for v in resize) if resize else None,
            jobs=int(data.get("jobs", 1)),
            crop_divisible=data.get("crop_divisible"),
        )


@dataclass
class RunReport:
    """Outcome of one pipeline run."""

    operation: str
    seed: int
    total: int = 0
    items: List[dict] = field(default_factory=list)
    errors: List[dict] = field(default_factory=list)
    elapsed_seconds: float = 0.0

    @property
    def succeeded(self) -> int:
        return len(self.items)

    @property
    def failed(self) -> int:
        return len(self.errors)

    @property
    def exit_code(self) -> int:
        return 0 if not self.errors else 1

    def to_dict(self) -> dict:
        """Convert the RunReport instance to a dictionary."""
        return {
            "operation": self.operation,
            "seed": self.seed,
            "total": self.total,
            "succeeded": self.succeeded,
            "failed": self.failed,
            "items": list(self.items),
            "errors": list(self.errors),
            "elapsed_seconds": self.elapsed_seconds,
        }
