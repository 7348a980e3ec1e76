"""Repositories for images, JSON documents and CSV corpus listings."""

import io
import json
import os
import re
import tempfile
from typing import Any, List, Tuple

import cv2
import numpy as np
import pandas as pd

from src.models import ImageBuffer, Manifest, ManifestEntry, Tensor3


def atomic_write_bytes(path: str, payload: bytes) -> None:
    """Write ``payload`` to ``path`` through a temp file and a rename.

    Raises:
        IOError: If the parent directory is missing or not writable
    """
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory):
        raise IOError(f"Output directory '{directory}' does not exist")
    fd, temp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(temp_path, path)
    except OSError as e:
        if os.path.exists(temp_path):
            os.unlink(temp_path)
        raise IOError(f"Cannot write '{path}': {str(e)}")


class ImageRepository:
    """8-bit PNG and binary PPM (P6) codec on top of OpenCV."""

    PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
    PPM_MAGIC = b"P6"
    PPM_HEADER = re.compile(
        rb"^P6(?:\s+|#[^\n]*\n)+(\d+)(?:\s+|#[^\n]*\n)+(\d+)(?:\s+|#[^\n]*\n)+(\d+)\s"
    )
    WRITE_EXTENSIONS = {".png": ".png", ".ppm": ".ppm", ".pnm": ".ppm"}

    class UnsupportedFormatError(IOError):
        """Raised when a file is not a decodable 8-bit PNG or P6 PPM."""

        pass

    class EmptyImageError(IOError):
        """Raised when an image header declares a zero dimension."""

        pass

    @classmethod
    def load_image(cls, path: str) -> ImageBuffer:
        """Load a PNG or PPM file as an ImageBuffer with values in [0, 1].

        Raises:
            IOError: If the file cannot be read
            UnsupportedFormatError: If the format is not PNG/P6 or is corrupt
            EmptyImageError: If the image has a zero dimension
        """
        try:
            with open(path, "rb") as f:
                raw = f.read()
        except OSError as e:
            raise IOError(f"Cannot read image file '{path}': {str(e)}")

        width, height = cls._header_size(raw, path)
        if width == 0 or height == 0:
            raise cls.EmptyImageError(f"Image '{path}' has a zero dimension ({width}x{height})")

        decoded = cv2.imdecode(np.frombuffer(raw, dtype=np.uint8), cv2.IMREAD_UNCHANGED)
        if decoded is None or decoded.size == 0:
            raise cls.UnsupportedFormatError(f"unsupported format: cannot decode '{path}'")
        if decoded.dtype != np.uint8:
            raise cls.UnsupportedFormatError(
                f"unsupported format: '{path}' is not 8-bit ({decoded.dtype})"
            )

        if decoded.ndim == 2:
            pixels = decoded[:, :, np.newaxis]
        elif decoded.shape[2] == 4:
            pixels = cv2.cvtColor(decoded, cv2.COLOR_BGRA2RGB)
        elif decoded.shape[2] == 3:
            pixels = cv2.cvtColor(decoded, cv2.COLOR_BGR2RGB)
        else:
            raise cls.UnsupportedFormatError(
                f"unsupported format: '{path}' has {decoded.shape[2]} channels"
            )
        return ImageBuffer(pixels.astype(np.float64) / 255.0)

    @classmethod
    def save_image(cls, img: ImageBuffer, path: str) -> None:
        """Save an image as PNG (``.png``) or binary PPM (``.ppm``/``.pnm``).

        Values are quantized with round-half-up, so 0.5 is stored as 128.
        Grayscale images written as PPM are stored as three equal channels.

        Raises:
            IOError: If the directory is missing, the path is not writable or
                the extension is not supported
        """
        extension = os.path.splitext(path)[1].lower()
        if extension not in cls.WRITE_EXTENSIONS:
            raise cls.UnsupportedFormatError(
                f"unsupported format: cannot write '{extension or path}' (use .png or .ppm)"
            )
        pixels = cls.quantize(img)
        if img.channels == 3:
            pixels = cv2.cvtColor(pixels, cv2.COLOR_RGB2BGR)
        elif extension != ".png":
            pixels = np.repeat(pixels, 3, axis=2)
        else:
            pixels = pixels[:, :, 0]

        ok, encoded = cv2.imencode(cls.WRITE_EXTENSIONS[extension], pixels)
        if not ok:
            raise IOError(f"Cannot encode image for '{path}'")
        atomic_write_bytes(path, encoded.tobytes())

    @staticmethod
    def quantize(img: ImageBuffer) -> np.ndarray:
        """Map [0, 1] intensities to uint8 with round-half-up."""
        return np.floor(img.data * 255.0 + 0.5).clip(0, 255).astype(np.uint8)

    @classmethod
    def _header_size(cls, raw: bytes, path: str) -> Tuple[int, int]:
        """Read (width, height) from a PNG or PPM header."""
        if raw.startswith(cls.PNG_SIGNATURE):
            if len(raw) < 24 or raw[12:16] != b"IHDR":
                raise cls.UnsupportedFormatError(f"unsupported format: corrupt PNG header in '{path}'")
            width = int.from_bytes(raw[16:20], "big")
            height = int.from_bytes(raw[20:24], "big")
            return width, height
        if raw.startswith(cls.PPM_MAGIC):
            match = cls.PPM_HEADER.match(raw[:512])
            if not match:
                raise cls.UnsupportedFormatError(f"unsupported format: corrupt PPM header in '{path}'")
            width, height, maxval = (int(group) for group in match.groups())
            if maxval != 255:
                raise cls.UnsupportedFormatError(
                    f"unsupported format: '{path}' has maxval {maxval}, only 8-bit is supported"
                )
            return width, height
        raise cls.UnsupportedFormatError(f"unsupported format: '{path}' is neither PNG nor P6 PPM")


class DataRepository:
    """JSON documents and CSV listings (manifests, label pairs)."""

    MANIFEST_COLUMNS = ("path", "label")

    @staticmethod
    def read_json(filepath: str) -> Any:
        """Read a JSON file.

        Raises:
            IOError: If the file is missing or corrupted
        """
        try:
            with open(filepath, "r", encoding="utf-8") as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise IOError(f"Data file '{filepath}' is corrupted and cannot be parsed: {str(e)}")
        except OSError as e:
            raise IOError(f"Cannot read data file '{filepath}': {str(e)}")

    @staticmethod
    def write_json(filepath: str, data: Any) -> None:
        """Write data to a JSON file atomically (UTF-8, indented, sorted)."""
        text = json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
        atomic_write_bytes(filepath, text.encode("utf-8"))

    @classmethod
    def load_manifest(cls, filepath: str) -> Manifest:
        """Load a ``path,label[,split]`` CSV manifest.

        Raises:
            IOError: If the file cannot be read or lacks the required columns
            ValueError: If an entry is invalid (empty label, duplicate path)
        """
        frame = cls._read_csv(filepath)
        missing = [c for c in cls.MANIFEST_COLUMNS if c not in frame.columns]
        if missing:
            raise IOError(f"Manifest '{filepath}' is missing column(s): {', '.join(missing)}")
        has_split = "split" in frame.columns
        entries = [
            ManifestEntry(
                path=row["path"],
                label=row["label"],
                split=(row["split"] or None) if has_split else None,
            )
            for row in frame.to_dict("records")
        ]
        return Manifest(tuple(entries))

    @classmethod
    def save_manifest(cls, manifest: Manifest, filepath: str) -> None:
        """Write a manifest as UTF-8 CSV with LF line endings."""
        has_split = any(entry.split is not None for entry in manifest)
        columns = list(cls.MANIFEST_COLUMNS) + (["split"] if has_split else [])
        frame = pd.DataFrame(
            [
                {"path": e.path, "label": e.label, "split": e.split or ""}
                for e in manifest
            ],
            columns=["path", "label", "split"],
        )
        buffer = io.StringIO()
        frame[columns].to_csv(buffer, index=False, lineterminator="\n")
        atomic_write_bytes(filepath, buffer.getvalue().encode("utf-8"))

    @classmethod
    def load_label_pairs(cls, filepath: str) -> List[Tuple[str, str]]:
        """Load a ``true,pred`` CSV as a list of (true, predicted) pairs."""
        frame = cls._read_csv(filepath)
        if not {"true", "pred"} <= set(frame.columns):
            raise IOError(f"Label file '{filepath}' must have the columns true,pred")
        frame = frame[["true", "pred"]]
        return [(str(t), str(p)) for t, p in frame.itertuples(index=False, name=None)]

    @classmethod
    def load_embeddings(cls, filepath: str) -> np.ndarray:
        """Load a headerless CSV with one embedding vector per row."""
        frame = cls._read_csv(filepath, header=None)
        if frame.empty:
            raise IOError(f"Embedding file '{filepath}' is empty")
        # cells stay strings so the float conversion is exact and reports bad cells
        try:
            return frame.to_numpy().astype(np.float64)
        except ValueError as e:
            raise IOError(f"Embedding file '{filepath}' contains non-numeric values: {str(e)}")

    @classmethod
    def load_tensor(cls, filepath: str) -> Tensor3:
        """Load a tensor CSV.

        The first row holds ``W,H,C``; it is followed by H*W rows of C values
        in row-major pixel order.
        """
        try:
            with open(filepath, "r", encoding="utf-8") as f:
                header = f.readline()
        except OSError as e:
            raise IOError(f"Cannot read tensor file '{filepath}': {str(e)}")
        try:
            width, height, channels = (int(v) for v in header.strip().split(","))
        except ValueError:
            raise IOError(f"Tensor file '{filepath}' must start with a 'W,H,C' row")

        frame = cls._read_csv(filepath, header=None, skiprows=1)
        try:
            values = frame.to_numpy().astype(np.float64) if not frame.empty else np.empty((0, channels))
        except ValueError as e:
            raise IOError(f"Tensor file '{filepath}' contains non-numeric values: {str(e)}")
        if values.shape != (width * height, channels):
            raise IOError(
                f"Tensor file '{filepath}' declares {width}x{height}x{channels} but holds "
                f"{values.shape[0]} rows of {values.shape[1] if values.ndim == 2 else 0} values"
            )
        return Tensor3(values.reshape(height, width, channels))

    @staticmethod
    def save_tensor(tensor: Tensor3, filepath: str) -> None:
        """Write a tensor in the format read by :meth:`load_tensor`."""
        width, height, channels = tensor.shape
        buffer = io.StringIO()
        buffer.write(f"{width},{height},{channels}\n")
        frame = pd.DataFrame(tensor.data.reshape(height * width, channels))
        frame.to_csv(buffer, index=False, header=False, lineterminator="\n", float_format="%.17g")
        atomic_write_bytes(filepath, buffer.getvalue().encode("utf-8"))

    @staticmethod
    def _read_csv(filepath: str, **options: Any) -> pd.DataFrame:
        try:
            settings = {"dtype": str, "keep_default_na": False, "encoding": "utf-8", **options}
            return pd.read_csv(filepath, **settings)
        except pd.errors.EmptyDataError:
            return pd.DataFrame()
        except (OSError, ValueError, UnicodeDecodeError) as e:
            raise IOError(f"Cannot read CSV file '{filepath}': {str(e)}")
