"""Datasets: IDX image files, synthetic images and synthetic point clouds."""

from __future__ import annotations

import gzip
import hashlib
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadMagic, DimensionOverflow, TruncatedFile, UnknownKind
from .geometry import PointCloud

IDX_UBYTE = 0x08
IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
MAX_IDX_ELEMENTS = 1 << 32


def content_checksum(items: np.ndarray) -> str:
    """64-bit BLAKE2b digest of shape, dtype and raw bytes, as 16 hex digits."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(items.shape).encode())
    h.update(str(items.dtype).encode())
    h.update(np.ascontiguousarray(items).tobytes())
    return h.hexdigest()


@dataclass(frozen=True)
class Dataset:
    """``N x input_dim`` float32 items in ``[0, 1]``."""

    items: np.ndarray
    name: str
    labels: np.ndarray | None = None
    checksum: str = field(default="")

    def __post_init__(self):
        items = np.ascontiguousarray(self.items, dtype=np.float32)
        if items.ndim != 2 or items.shape[0] < 1:
            raise ValueError(f"dataset must be a non-empty (N, input_dim) array, got {items.shape}")
        if items.min() < 0 or items.max() > 1:
            raise ValueError("dataset values must lie in [0, 1]")
        items.setflags(write=False)
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "checksum", content_checksum(items))

    def __len__(self) -> int:
        return self.items.shape[0]

    @property
    def input_dim(self) -> int:
        return self.items.shape[1]

    def subset(self, limit: int) -> "Dataset":
        if limit <= 0 or limit >= len(self):
            return self
        labels = None if self.labels is None else self.labels[:limit]
        return Dataset(self.items[:limit], f"{self.name}[:{limit}]", labels)


def _read_bytes(path: Path) -> bytes:
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as fh:
        return fh.read()


def read_idx(path: str | Path, expected_magic: int | None = None) -> np.ndarray:
    """Parse a big-endian unsigned-byte IDX file into an array."""
    path = Path(path)
    raw = _read_bytes(path)
    if len(raw) < 4:
        raise TruncatedFile(f"{path}: expected at least 4 header bytes, got {len(raw)}")
    (magic,) = struct.unpack(">I", raw[:4])
    if magic >> 16 != 0 or (magic >> 8) & 0xFF != IDX_UBYTE or (
        expected_magic is not None and magic != expected_magic
    ):
        want = f"0x{expected_magic:08x}" if expected_magic is not None else "0x000008xx"
        raise BadMagic(f"{path}: bad IDX magic 0x{magic:08x}, expected {want}")
    ndim = magic & 0xFF
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise TruncatedFile(f"{path}: expected {header} header bytes, got {len(raw)}")
    shape = struct.unpack(f">{ndim}I", raw[4:header])
    count = 1
    for s in shape:
        count *= s
    if count >= MAX_IDX_ELEMENTS:
        raise DimensionOverflow(f"{path}: dimensions {shape} describe {count} elements")
    expected = header + count
    if len(raw) < expected:
        raise TruncatedFile(f"{path}: expected {expected} bytes, got {len(raw)}")
    return np.frombuffer(raw, dtype=np.uint8, count=count, offset=header).reshape(shape)


def write_idx(path: str | Path, array: np.ndarray) -> None:
    array = np.ascontiguousarray(array, dtype=np.uint8)
    magic = (IDX_UBYTE << 8) | array.ndim
    if str(path).endswith(".gz"):
        fh = gzip.GzipFile(path, "wb", mtime=0)
    else:
        fh = open(path, "wb")
    with fh:
        fh.write(struct.pack(">I", magic))
        fh.write(struct.pack(f">{array.ndim}I", *array.shape))
        fh.write(array.tobytes())


def load_idx(images_path: str | Path, labels_path: str | Path | None = None) -> Dataset:
    """Load an IDX image file (optionally with labels), flattened and scaled by 1/255."""
    images = read_idx(images_path, IMAGES_MAGIC)
    items = images.reshape(images.shape[0], -1).astype(np.float32) / np.float32(255.0)
    labels = None
    if labels_path is not None:
        labels = read_idx(labels_path, LABELS_MAGIC)
        if len(labels) != len(items):
            raise ValueError(f"{labels_path}: {len(labels)} labels for {len(items)} images")
    return Dataset(items, Path(images_path).name, labels)


def synth_images(n: int, seed: int, side: int = 28) -> Dataset:
    """Small grayscale images, each a few Gaussian blobs, in 1/255 steps."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:side, 0:side].astype(np.float64)
    out = np.zeros((n, side, side))
    for i in range(n):
        for _ in range(rng.integers(1, 4)):
            cy, cx = rng.uniform(4, side - 4, size=2)
            s = rng.uniform(1.5, 4.0)
            out[i] += rng.uniform(0.5, 1.0) * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * s * s))
    out = np.round(np.clip(out, 0, 1) * 255) / 255
    return Dataset(out.reshape(n, -1), f"synthetic-{n}-{seed}")


def synth_cloud(kind: str, n: int, noise: float = 0.0, seed: int = 0, n_centers: int = 2) -> PointCloud:
    """Planar test clouds.

    ``circle`` puts ``n`` equally spaced points on the unit circle;
    ``two_circles`` splits them over two unit circles centred at ``(+-3, 0)``;
    ``blobs`` draws tight Gaussian clusters around ``n_centers`` centres ten
    units apart.  Gaussian noise of standard deviation ``noise`` is added.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if noise < 0:
        raise ValueError(f"noise must be >= 0, got {noise}")
    rng = np.random.default_rng(seed)
    if kind == "circle":
        t = 2 * np.pi * np.arange(n) / n
        pts = np.column_stack([np.cos(t), np.sin(t)])
    elif kind == "two_circles":
        m = (n + 1) // 2
        t1 = 2 * np.pi * np.arange(m) / m
        t2 = 2 * np.pi * np.arange(n - m) / max(n - m, 1)
        pts = np.vstack([
            np.column_stack([np.cos(t1) - 3, np.sin(t1)]),
            np.column_stack([np.cos(t2) + 3, np.sin(t2)]),
        ])
    elif kind == "blobs":
        angles = 2 * np.pi * np.arange(n_centers) / n_centers
        radius = 5.0 / max(np.sin(np.pi / n_centers), 1e-12) if n_centers > 1 else 0.0
        centers = radius * np.column_stack([np.cos(angles), np.sin(angles)])
        which = np.arange(n) % n_centers
        pts = centers[which] + 0.1 * rng.standard_normal((n, 2))
    else:
        raise UnknownKind(f"unknown cloud kind {kind!r}; expected blobs, circle or two_circles")
    if noise > 0:
        pts = pts + noise * rng.standard_normal(pts.shape)
    return PointCloud(pts)


class SplitMix64:
    """SplitMix64 generator; drives the batch order."""

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Integer in ``[0, bound)`` by multiply-shift."""
        return (self.next_u64() * bound) >> 64

    def permutation(self, n: int) -> np.ndarray:
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return np.asarray(perm, dtype=np.int64)


def batch_indices(n_items: int, batch_size: int, seed: int):
    """Endless stream of index batches: reshuffle every epoch, drop nothing.

    A batch that crosses an epoch boundary is completed from the next epoch's
    permutation.
    """
    rng = SplitMix64(seed)
    perm = rng.permutation(n_items)
    pos = 0
    while True:
        out = []
        while len(out) < batch_size:
            take = min(batch_size - len(out), n_items - pos)
            out.extend(perm[pos:pos + take])
            pos += take
            if pos == n_items:
                perm = rng.permutation(n_items)
                pos = 0
        yield np.asarray(out, dtype=np.int64)
