"""Point clouds, Euclidean distance matrices and edge-length gradients."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateEdge, NonFiniteInput

#: Edges shorter than this have no usable gradient.
MIN_EDGE_LENGTH = 1e-12


@dataclass(frozen=True)
class PointCloud:
    """``n`` points in ``R^d`` stored as a float64 ``(n, d)`` array.

    Coincident points are allowed; quantization can collapse codes onto each
    other.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"point cloud must be a non-empty (n, d) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise NonFiniteInput("point cloud contains NaN or Inf coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @classmethod
    def from_csv(cls, path: str | Path) -> "PointCloud":
        """Read a headerless CSV with one point per row.

        Raises ``ValueError`` naming the 1-based line number of the first
        unparsable row.
        """
        rows = []
        width = None
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = [float(tok) for tok in line.split(",")]
                except ValueError as exc:
                    raise ValueError(f"{path}: line {lineno}: cannot parse {line!r}") from exc
                if width is None:
                    width = len(row)
                elif len(row) != width:
                    raise ValueError(f"{path}: line {lineno}: expected {width} columns, got {len(row)}")
                rows.append(row)
        if not rows:
            raise ValueError(f"{path}: no points")
        return cls(np.asarray(rows, dtype=np.float64))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for row in self.points:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


@dataclass(frozen=True)
class DistanceMatrix:
    """Dense symmetric Euclidean distance matrix with a zero diagonal."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1] or vals.shape[0] < 1:
            raise ValueError(f"distance matrix must be square and non-empty, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise NonFiniteInput("distance matrix contains NaN or Inf")
        if np.any(vals < 0) or np.any(np.diag(vals) != 0) or not np.array_equal(vals, vals.T):
            raise ValueError("distance matrix must be symmetric, non-negative, with a zero diagonal")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def as_cloud(points) -> PointCloud:
    return points if isinstance(points, PointCloud) else PointCloud(points)


def pairwise_distances(cloud: PointCloud | np.ndarray) -> DistanceMatrix:
    """Euclidean distances between all pairs of points.

    Computed from coordinate differences rather than the Gram-matrix identity
    so that equal-length edges come out bit-identical and the diagonal is an
    exact zero.
    """
    pts = as_cloud(cloud).points
    diff = pts[:, None, :] - pts[None, :, :]
    values = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    values.setflags(write=False)
    return DistanceMatrix(values)


def distance_gradient(cloud: PointCloud | np.ndarray, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of ``|x_i - x_j|`` with respect to ``x_i`` and ``x_j``."""
    pts = as_cloud(cloud).points
    if i == j:
        raise DegenerateEdge(f"edge ({i}, {j}) has identical endpoints")
    diff = pts[i] - pts[j]
    length = float(np.sqrt(diff @ diff))
    if length < MIN_EDGE_LENGTH:
        raise DegenerateEdge(f"edge ({i}, {j}) has length {length:.3e} < {MIN_EDGE_LENGTH}")
    g = diff / length
    return g, -g


def accumulate_edge_gradients(points: np.ndarray, edges: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Sum ``weights[m] * d|x_u - x_v| / dX`` over edges ``(u, v)``.

    Vectorized counterpart of :func:`distance_gradient` for many edges at once.
    Edges shorter than :data:`MIN_EDGE_LENGTH` are skipped.
    """
    out = np.zeros_like(points, dtype=np.float64)
    if len(edges) == 0:
        return out
    edges = np.asarray(edges, dtype=np.intp)
    u, v = edges[:, 0], edges[:, 1]
    diff = points[u] - points[v]
    length = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    keep = length >= MIN_EDGE_LENGTH
    g = diff[keep] * (np.asarray(weights, dtype=np.float64)[keep] / length[keep])[:, None]
    np.add.at(out, u[keep], g)
    np.add.at(out, v[keep], -g)
    return out
