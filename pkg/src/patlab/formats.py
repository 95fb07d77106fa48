"""File formats and text rendering.

* IDX — big-endian container compatible with standard MNIST loaders:
  magic ``00 00 08 <ndim>`` (0x08 = unsigned byte), then each dimension
  as a 32-bit big-endian unsigned integer, then the raw payload.
* HMAP — little-endian heatmap container: magic ``HMAP``, width and
  height as 32-bit unsigned, then width*height float32 values row-major.
* CSV heatmaps — one text row per lattice row.
* PNG — 8-bit grayscale, pixel value round(255 * value).
* Dataset bundles — images/labels/y_g/y_s IDX files plus a JSON-lines
  manifest; all five agree on the sample count (checked on read).
* ASCII — blank for the empty generator, letters A, B, C, ... for
  template indices 1, 2, 3, ...
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .core import Configuration
from .errors import BadMagic, CountMismatch, TooManyGenerators, TruncatedFile

IDX_UBYTE = 0x08


def write_idx(tensor: np.ndarray, path) -> None:
    """Write an unsigned-byte tensor of rank 1..3 in IDX layout."""
    arr = np.asarray(tensor)
    if arr.dtype != np.uint8:
        raise ValueError(f"IDX payload must be uint8, got {arr.dtype}")
    if not 1 <= arr.ndim <= 3:
        raise ValueError(f"IDX rank must be 1..3, got {arr.ndim}")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">I", (IDX_UBYTE << 8) | arr.ndim))
        for dim in arr.shape:
            fh.write(struct.pack(">I", dim))
        fh.write(arr.tobytes())


def read_idx(path) -> np.ndarray:
    """Inverse of :func:`write_idx`, bit-exact."""
    blob = Path(path).read_bytes()
    if len(blob) < 4:
        raise TruncatedFile(f"{path}: shorter than an IDX header")
    (magic,) = struct.unpack(">I", blob[:4])
    ndim = magic & 0xFF
    if magic >> 8 != IDX_UBYTE or not 1 <= ndim <= 3:
        raise BadMagic(f"{path}: magic 0x{magic:08x} is not an ubyte IDX tensor")
    header_end = 4 + 4 * ndim
    if len(blob) < header_end:
        raise TruncatedFile(f"{path}: truncated dimension header")
    shape = struct.unpack(f">{ndim}I", blob[4:header_end])
    expected = int(np.prod(shape))
    payload = blob[header_end:]
    if len(payload) != expected:
        raise TruncatedFile(
            f"{path}: payload holds {len(payload)} bytes, header promises {expected}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(shape).copy()


HMAP_MAGIC = b"HMAP"


def write_heatmap_binary(values: np.ndarray, path) -> None:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("heatmap payload must be 2-D")
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(HMAP_MAGIC)
        fh.write(struct.pack("<II", w, h))
        fh.write(arr.astype("<f4").tobytes())


def read_heatmap_binary(path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if len(blob) < 12:
        raise TruncatedFile(f"{path}: shorter than an HMAP header")
    if blob[:4] != HMAP_MAGIC:
        raise BadMagic(f"{path}: missing HMAP magic")
    w, h = struct.unpack("<II", blob[4:12])
    expected = 12 + 4 * w * h
    if len(blob) != expected:
        raise TruncatedFile(f"{path}: holds {len(blob)} bytes, header promises {expected}")
    return np.frombuffer(blob[12:], dtype="<f4").reshape(h, w).astype(np.float64)


def write_heatmap_csv(values: np.ndarray, path) -> None:
    np.savetxt(path, np.asarray(values, dtype=np.float64), delimiter=",", fmt="%.17g")


def read_heatmap_csv(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=np.float64))


def read_heatmap_file(path) -> np.ndarray:
    """Dispatch on suffix: .hmap binary, anything else CSV."""
    if str(path).endswith(".hmap"):
        return read_heatmap_binary(path)
    return read_heatmap_csv(path)


def write_png(image01: np.ndarray, path) -> None:
    """8-bit grayscale PNG of an image with values in [0, 1]."""
    arr = np.asarray(image01, dtype=np.float64)
    Image.fromarray(np.rint(arr * 255.0).astype(np.uint8), mode="L").save(path)


def read_png(path) -> np.ndarray:
    """Grayscale PNG back as uint8."""
    return np.asarray(Image.open(path).convert("L"), dtype=np.uint8)


def ascii_render(config: Configuration) -> str:
    """Letter rendering: blank for empty, A for alpha=1, B for 2, ..."""
    if int(config.alpha.max(initial=0)) > 26:
        raise TooManyGenerators("letter rendering supports at most alpha 26 ('Z')")
    lines = []
    for row in config.alpha:
        line = "".join(" " if a == 0 else chr(ord("A") + int(a) - 1) for a in row)
        lines.append(line.rstrip())
    return "\n".join(lines)


@dataclass(frozen=True)
class Bundle:
    """In-memory view of a dataset bundle directory."""

    images: np.ndarray      # (n, 28, 28) uint8
    class_labels: np.ndarray  # (n,) uint8
    y_g: np.ndarray         # (n, 28, 28) uint8 template labels
    y_s: np.ndarray         # (n, 28, 28) uint8 orientations, s=1 at empty sites
    manifest: tuple

    def __len__(self):
        return int(self.images.shape[0])


BUNDLE_FILES = ("images.idx", "class_labels.idx", "y_g.idx", "y_s.idx", "manifest.jsonl")


def write_bundle(records, out_dir) -> None:
    """Write SampleRecords as an IDX bundle plus a JSON-lines manifest.

    The y_s file stores 0 at empty sites; reading maps those back to the
    canonical s=1.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    images = np.stack([np.rint(rec.image * 255.0).astype(np.uint8) for rec in records])
    labels = np.array([rec.class_label for rec in records], dtype=np.uint8)
    y_g = np.stack([rec.seed_alpha.astype(np.uint8) for rec in records])
    y_s_raw = np.stack([rec.seed_s.astype(np.uint8) for rec in records])
    y_s = np.where(y_g == 0, 0, y_s_raw).astype(np.uint8)
    write_idx(images, out / "images.idx")
    write_idx(labels, out / "class_labels.idx")
    write_idx(y_g, out / "y_g.idx")
    write_idx(y_s, out / "y_s.idx")
    with open(out / "manifest.jsonl", "w") as fh:
        for i, rec in enumerate(records):
            fh.write(json.dumps({
                "index": i,
                "class": int(rec.class_label),
                "steps": int(rec.steps),
                "rng_seed": int(rec.rng_seed),
            }) + "\n")


def read_bundle(bundle_dir) -> Bundle:
    root = Path(bundle_dir)
    images = read_idx(root / "images.idx")
    labels = read_idx(root / "class_labels.idx")
    y_g = read_idx(root / "y_g.idx")
    y_s = read_idx(root / "y_s.idx")
    manifest = tuple(
        json.loads(line)
        for line in (root / "manifest.jsonl").read_text().splitlines()
        if line.strip()
    )
    counts = {len(images), len(labels), len(y_g), len(y_s), len(manifest)}
    if len(counts) != 1:
        raise CountMismatch(f"bundle files disagree on sample count: {sorted(counts)}")
    y_s = np.where(y_g == 0, 1, y_s).astype(np.uint8)
    return Bundle(images=images, class_labels=labels, y_g=y_g, y_s=y_s,
                  manifest=manifest)
