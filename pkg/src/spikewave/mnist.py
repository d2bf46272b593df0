"""MNIST IDX container parsing, writing, and input-current encoding."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import BadMagicError, CountMismatchError, TruncatedError
from .streams import InputStream

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
SIDE = 28


@dataclass(frozen=True)
class LabeledDataset:
    """28x28 grayscale digit images (uint8, 0-255) with class labels 0-9."""

    images: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise ValueError(f"{len(self.images)} images vs {len(self.labels)} labels")

    def __len__(self) -> int:
        return len(self.labels)

    def subset(self, idx) -> "LabeledDataset":
        return LabeledDataset(self.images[idx], self.labels[idx])


def _read_exact(fh, count: int, what: str, path) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise TruncatedError(f"{path}: truncated {what} (wanted {count} bytes, got {len(data)})")
    return data


def load_mnist_idx(images_path, labels_path) -> LabeledDataset:
    """Decode the big-endian IDX pair used by the MNIST distribution.

    Image files carry magic 0x00000803 and dims (count, 28, 28); label files
    carry magic 0x00000801 and a count that must match. Bad magic, truncated
    payloads, and count mismatches each raise a distinct error; nothing
    partial is ever returned.
    """
    with open(images_path, "rb") as fh:
        magic, n_img, rows, cols = struct.unpack(">IIII", _read_exact(fh, 16, "image header", images_path))
        if magic != IMAGE_MAGIC:
            raise BadMagicError(f"{images_path}: bad magic 0x{magic:08x} (expected 0x{IMAGE_MAGIC:08x})")
        if (rows, cols) != (SIDE, SIDE):
            raise BadMagicError(f"{images_path}: expected 28x28 images, header says {rows}x{cols}")
        payload = _read_exact(fh, n_img * rows * cols, "image payload", images_path)
        images = np.frombuffer(payload, dtype=np.uint8).reshape(n_img, rows, cols)
    with open(labels_path, "rb") as fh:
        magic, n_lab = struct.unpack(">II", _read_exact(fh, 8, "label header", labels_path))
        if magic != LABEL_MAGIC:
            raise BadMagicError(f"{labels_path}: bad magic 0x{magic:08x} (expected 0x{LABEL_MAGIC:08x})")
        labels = np.frombuffer(_read_exact(fh, n_lab, "label payload", labels_path), dtype=np.uint8)
    if n_img != n_lab:
        raise CountMismatchError(f"{images_path} holds {n_img} images but {labels_path} holds {n_lab} labels")
    return LabeledDataset(images, labels)


def write_idx_images(path, images: np.ndarray):
    images = np.asarray(images, dtype=np.uint8)
    n, rows, cols = images.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGE_MAGIC, n, rows, cols))
        fh.write(images.tobytes())


def write_idx_labels(path, labels: np.ndarray):
    labels = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", LABEL_MAGIC, len(labels)))
        fh.write(labels.tobytes())


def encode_frame(image: np.ndarray, gain: float) -> np.ndarray:
    """Map pixel intensities to input currents: gain * pixel/255, row-major.

    Flattening matches grid_geometry(28, 28): pixel (row, col) drives neuron
    row*28 + col. Stochastic noise comes from the network's noise drive, not
    from the encoder.
    """
    image = np.asarray(image)
    if image.shape != (SIDE, SIDE):
        raise ValueError(f"expected a {SIDE}x{SIDE} image, got {image.shape}")
    return gain * image.astype(np.float64).ravel() / 255.0


def build_stream(dataset: LabeledDataset, gain: float, hold_duration: float, gap: float = 0.0) -> InputStream:
    frames = np.stack([encode_frame(img, gain) for img in dataset.images])
    return InputStream(frames, hold_duration, gap)
