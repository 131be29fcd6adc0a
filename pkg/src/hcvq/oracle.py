"""Brute-force ground truth for tests.

Deliberately naive: every simplex up to dimension ``max_dim + 1`` is
enumerated, the full boundary matrix is reduced left to right over Z/2 with
no clearing and no union-find.  Nothing here is shared with the persistence
engine beyond the distance matrix.
"""

from __future__ import annotations

from itertools import combinations
from typing import Callable

import numpy as np

from .errors import TooLarge, UnsupportedDimension
from .geometry import DistanceMatrix, PointCloud, as_cloud, pairwise_distances
from .persistence.diagram import PersistenceDiagram

MAX_POINTS = 16


def _diameter(simplex, values):
    if len(simplex) < 2:
        return 0.0
    return max(values[a, b] for a, b in combinations(simplex, 2))


def full_boundary_matrix(values: np.ndarray, max_dim: int):
    """Simplices in filtration order and their boundary columns.

    Order is (filtration value, dimension, lexicographic vertices).  Column
    ``j`` lists the row indices of the faces of simplex ``j``, sorted.
    """
    n = values.shape[0]
    simplices = []
    for size in range(1, max_dim + 3):
        simplices.extend(combinations(range(n), size))
    simplices.sort(key=lambda s: (_diameter(s, values), len(s), s))
    index = {s: i for i, s in enumerate(simplices)}
    columns = []
    for s in simplices:
        if len(s) == 1:
            columns.append([])
        else:
            columns.append(sorted(index[f] for f in combinations(s, len(s) - 1)))
    return simplices, columns


def brute_force_ph(dm: DistanceMatrix | PointCloud | np.ndarray, max_dim: int = 1) -> PersistenceDiagram:
    if max_dim not in (0, 1):
        raise UnsupportedDimension(f"max_dim must be 0 or 1, got {max_dim}")
    if isinstance(dm, PointCloud):
        dm = pairwise_distances(dm)
    values = np.asarray(dm.values if isinstance(dm, DistanceMatrix) else dm, dtype=np.float64)
    n = values.shape[0]
    if n > MAX_POINTS:
        raise TooLarge(f"brute force is limited to {MAX_POINTS} points, got {n}")

    simplices, columns = full_boundary_matrix(values, max_dim)
    cols = [set(c) for c in columns]
    low_owner: dict[int, int] = {}
    paired = set()
    pairs = []
    for j in range(len(cols)):
        while cols[j]:
            low = max(cols[j])
            if low not in low_owner:
                break
            cols[j] ^= cols[low_owner[low]]
        if cols[j]:
            low = max(cols[j])
            low_owner[low] = j
            paired.update((low, j))
            pairs.append((low, j))

    rows = []
    for i, j in pairs:
        birth_s, death_s = simplices[i], simplices[j]
        dim = len(birth_s) - 1
        if dim > max_dim:
            continue
        rows.append((dim, _diameter(birth_s, values), _diameter(death_s, values), birth_s, death_s))
    for i, s in enumerate(simplices):
        if i not in paired and len(s) - 1 <= max_dim:
            rows.append((len(s) - 1, _diameter(s, values), np.inf, s, ()))

    def pad(s, width):
        return list(s) + [-1] * (width - len(s))

    def edge_of(s, value, longest):
        if len(s) < 2:
            return [-1, -1]
        edges = [e for e in combinations(s, 2)]
        if longest:
            return list(max(edges, key=lambda e: (values[e], e)))
        return list(edges[0])

    return PersistenceDiagram(
        dims=np.array([r[0] for r in rows], dtype=np.int8),
        births=np.array([r[1] for r in rows], dtype=np.float64),
        deaths=np.array([r[2] for r in rows], dtype=np.float64),
        birth_simplex=np.array([pad(r[3], 3) for r in rows], dtype=np.int64).reshape(-1, 3),
        death_simplex=np.array([pad(r[4], 3) for r in rows], dtype=np.int64).reshape(-1, 3),
        birth_edge=np.array([edge_of(r[3], r[1], False) for r in rows], dtype=np.int64).reshape(-1, 2),
        death_edge=np.array([edge_of(r[4], r[2], True) for r in rows], dtype=np.int64).reshape(-1, 2),
        n_points=n,
        includes_essential=True,
    )


def finite_diff(metric: Callable[[PointCloud], float], cloud, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function of the point coordinates."""
    pts = as_cloud(cloud).points
    grad = np.zeros_like(pts)
    for idx in np.ndindex(*pts.shape):
        plus = pts.copy()
        minus = pts.copy()
        plus[idx] += h
        minus[idx] -= h
        grad[idx] = (metric(PointCloud(plus)) - metric(PointCloud(minus))) / (2 * h)
    return grad


def min_distance_gap(cloud) -> float:
    """Smallest gap between distinct pairwise distances (tie detector)."""
    d = pairwise_distances(cloud).values
    vals = np.sort(d[np.triu_indices(d.shape[0], 1)])
    if len(vals) < 2:
        return np.inf
    return float(np.min(np.diff(vals)))


def stable_cloud(rng: np.random.Generator, n: int, d: int, min_gap: float = 1e-3, scale: float = 1.0) -> PointCloud:
    """Random Gaussian cloud regenerated until no two distances are within ``min_gap``."""
    while True:
        cloud = PointCloud(rng.standard_normal((n, d)) * scale)
        if min_distance_gap(cloud) > min_gap:
            return cloud
