"""Exact Vietoris-Rips persistent homology in dimensions 0 and 1.

The heavy lifting lives in a compiled extension (``_core``); a NumPy
implementation with identical output (``_pure``) is used when the extension is
missing or when the environment variable ``HCVQ_PURE`` is set to ``1``.
:data:`BACKEND` names the kernel picked at import time.

Simplices are ordered by filtration value, then dimension, then
lexicographically by their sorted vertex tuple.  The filtration value of a
simplex is its longest edge.
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import UnsupportedDimension
from ..geometry import DistanceMatrix, PointCloud, pairwise_distances
from . import _pure
from .diagram import PersistenceDiagram, PersistencePair, read_jsonl

if os.environ.get("HCVQ_PURE") == "1":
    _kernel = _pure
    BACKEND = "python"
else:
    try:
        from . import _core as _kernel

        BACKEND = "cython"
    except ImportError:  # extension not built
        _kernel = _pure
        BACKEND = "python"

__all__ = [
    "BACKEND",
    "PersistenceDiagram",
    "PersistencePair",
    "critical_edges",
    "read_jsonl",
    "sorted_edges",
    "vr_persistence",
]


def sorted_edges(values: np.ndarray):
    """Edges ``(u, v)``, ``u < v``, in filtration order ``(length, u, v)``.

    Returns ``(eu, ev, lengths, vrank, erank)`` where ``vrank[u, v]`` is the
    dense rank of the edge length among distinct lengths and ``erank[u, v]``
    the position of the edge in the order.
    """
    n = values.shape[0]
    iu, iv = np.triu_indices(n, 1)
    lengths = values[iu, iv]
    order = np.lexsort((iv, iu, lengths))
    eu = np.ascontiguousarray(iu[order], dtype=np.int64)
    ev = np.ascontiguousarray(iv[order], dtype=np.int64)
    lengths = lengths[order]

    vrank = np.zeros((n, n), dtype=np.int64)
    erank = np.full((n, n), -1, dtype=np.int64)
    if len(lengths):
        dense = np.concatenate([[0], np.cumsum(lengths[1:] != lengths[:-1])])
        vrank[eu, ev] = dense
        vrank[ev, eu] = dense
        ranks = np.arange(len(eu), dtype=np.int64)
        erank[eu, ev] = ranks
        erank[ev, eu] = ranks
    return eu, ev, lengths, vrank, erank


def vr_persistence(dm: DistanceMatrix | PointCloud | np.ndarray, max_dim: int = 1) -> PersistenceDiagram:
    """Persistence diagram of the full Vietoris-Rips filtration.

    ``dm`` may be a :class:`DistanceMatrix`, a :class:`PointCloud` or a raw
    square distance array.  No scale threshold is applied.  Dimension-0 pairs
    come from Kruskal-style union-find (the elder component, i.e. the one with
    the smaller root vertex, survives a merge); dimension-1 pairs from
    coboundary reduction with clearing.  Zero-persistence pairs are kept.
    """
    if max_dim not in (0, 1):
        raise UnsupportedDimension(f"max_dim must be 0 or 1, got {max_dim}")
    if isinstance(dm, PointCloud):
        dm = pairwise_distances(dm)
    values = np.ascontiguousarray(dm.values if isinstance(dm, DistanceMatrix) else dm, dtype=np.float64)
    n = values.shape[0]

    eu, ev, lengths, vrank, erank = sorted_edges(values)
    young, mst = _kernel.union_find_pairs(n, eu, ev)

    rows_dim, rows_birth, rows_death = [np.zeros(1, np.int8)], [np.zeros(1)], [np.full(1, np.inf)]
    bs = [np.array([[0, -1, -1]])]
    ds = [np.full((1, 3), -1)]
    be = [np.full((1, 2), -1)]
    de = [np.full((1, 2), -1)]

    k0 = len(mst)
    rows_dim.append(np.zeros(k0, np.int8))
    rows_birth.append(np.zeros(k0))
    rows_death.append(lengths[mst])
    bs.append(np.column_stack([young, np.full(k0, -1), np.full(k0, -1)]))
    edge0 = np.column_stack([eu[mst], ev[mst]])
    ds.append(np.column_stack([edge0, np.full(k0, -1)]))
    be.append(np.full((k0, 2), -1))
    de.append(edge0)

    if max_dim >= 1 and n >= 3:
        # enclosing radius: past it every Rips complex is a cone
        center = int(np.argmin(values.max(axis=1)))
        thr = int(vrank[center, np.argmax(values[center])])
        er, keys = _kernel.cohomology_pairs(
            n, eu, ev, vrank, erank, np.ascontiguousarray(mst, dtype=np.int64), thr, center
        )
        k1 = len(er)
        finite = keys >= 0
        safe = np.where(finite, keys, 0)
        c = safe % n
        b = (safe // n) % n
        a = (safe // (n * n)) % n
        tri = np.column_stack([a, b, c])
        tri[~finite] = -1
        # the killing triangle enters with its last edge in filtration order
        facet_ranks = np.column_stack([erank[a, b], erank[a, c], erank[b, c]])
        last = facet_ranks.max(axis=1)
        death_edge = np.column_stack([eu[last], ev[last]])
        death_edge[~finite] = -1
        death = np.where(finite, lengths[last], np.inf)
        birth_edge = np.column_stack([eu[er], ev[er]])

        rows_dim.append(np.ones(k1, np.int8))
        rows_birth.append(lengths[er])
        rows_death.append(death)
        bs.append(np.column_stack([birth_edge, np.full(k1, -1)]))
        ds.append(tri)
        be.append(birth_edge)
        de.append(death_edge)

    return PersistenceDiagram(
        dims=np.concatenate(rows_dim),
        births=np.concatenate(rows_birth).astype(np.float64),
        deaths=np.concatenate(rows_death).astype(np.float64),
        birth_simplex=np.concatenate(bs).astype(np.int64),
        death_simplex=np.concatenate(ds).astype(np.int64),
        birth_edge=np.concatenate(be).astype(np.int64),
        death_edge=np.concatenate(de).astype(np.int64),
        n_points=n,
        includes_essential=True,
    )


def critical_edges(diagram: PersistenceDiagram) -> list[tuple[int, tuple[int, int], str]]:
    """Edges whose lengths realize each finite birth/death value.

    Returns ``(pair_index, (u, v), role)`` with ``role`` in ``{"birth",
    "death"}``.  Dimension-0 births sit at 0 and map to no edge.
    """
    out = []
    for m in range(len(diagram)):
        if not np.isfinite(diagram.deaths[m]):
            continue
        if diagram.birth_edge[m, 0] >= 0:
            out.append((m, (int(diagram.birth_edge[m, 0]), int(diagram.birth_edge[m, 1])), "birth"))
        out.append((m, (int(diagram.death_edge[m, 0]), int(diagram.death_edge[m, 1])), "death"))
    return out
