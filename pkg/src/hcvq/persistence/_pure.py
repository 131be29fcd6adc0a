"""Pure-Python/NumPy reduction kernel.

Same inputs, outputs and pairing as the compiled ``_core`` extension; used when
the extension is not built or ``HCVQ_PURE=1`` is set.
"""

from __future__ import annotations

import numpy as np


def union_find_pairs(n: int, eu: np.ndarray, ev: np.ndarray):
    """Dimension-0 pairing over edges already in filtration order.

    Returns ``(younger_root, edge_rank)`` arrays, one entry per merge.  The
    component whose root has the smaller vertex index survives.
    """
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    vertices, ranks = [], []
    for r in range(len(eu)):
        ru, rv = find(int(eu[r])), find(int(ev[r]))
        if ru == rv:
            continue
        elder, younger = (ru, rv) if ru < rv else (rv, ru)
        parent[younger] = elder
        vertices.append(younger)
        ranks.append(r)
        if len(ranks) == n - 1:
            break
    return np.asarray(vertices, dtype=np.int64), np.asarray(ranks, dtype=np.int64)


def _cofacet_keys(u, v, n, vrank, thr):
    """Sorted keys of the cofacets of edge ``(u, v)``, ``u < v``, with value rank <= ``thr``."""
    k = np.arange(n, dtype=np.int64)
    k = k[(k != u) & (k != v)]
    vr = np.maximum(np.maximum(vrank[u, v], vrank[u, k]), vrank[v, k])
    k, vr = k[vr <= thr], vr[vr <= thr]
    a = np.minimum(k, u)
    c = np.maximum(k, v)
    b = u + v + k - a - c
    keys = ((vr * n + a) * n + b) * n + c
    keys.sort()
    return keys


def _max_facet_rank(key, n, erank):
    c = key % n
    b = (key // n) % n
    a = (key // (n * n)) % n
    return max(erank[a, b], erank[a, c], erank[b, c])


def cohomology_pairs(n, eu, ev, vrank, erank, mst_ranks, thr, center):
    """Dimension-1 pairing by coboundary reduction.

    Edges are processed from last to first; edges that already died in
    dimension 0 are cleared.  Zero-persistence apparent pairs are emitted
    without reduction.  Only simplices with value rank ``<= thr`` (the
    enclosing radius) enter the reduction; above it the complex is a cone over
    ``center`` and each longer edge is paired with its cone triangle.  Returns
    ``(edge_rank, triangle_key)`` arrays; ``triangle_key`` is ``-1`` for an
    essential class.
    """
    vrank = np.asarray(vrank, dtype=np.int64)
    erank = np.asarray(erank, dtype=np.int64)
    cleared = np.zeros(len(eu), dtype=bool)
    cleared[mst_ranks] = True

    pivot_of: dict[int, int] = {}
    reduced: dict[int, np.ndarray] = {}
    apparent: set[int] = set()
    out_edges, out_keys = [], []

    for r in range(len(eu) - 1, -1, -1):
        if cleared[r]:
            continue
        u, v = int(eu[r]), int(ev[r])
        if vrank[u, v] > thr:
            a, b, c = sorted((u, v, center))
            out_edges.append(r)
            out_keys.append(((int(vrank[u, v]) * n + a) * n + b) * n + c)
            continue
        col = _cofacet_keys(u, v, n, vrank, thr)
        t = int(col[0])
        if t // (n ** 3) == vrank[u, v] and _max_facet_rank(t, n, erank) == r:
            pivot_of[t] = r
            apparent.add(r)
            out_edges.append(r)
            out_keys.append(t)
            continue
        while True:
            if len(col) == 0:
                out_edges.append(r)
                out_keys.append(-1)
                break
            t = int(col[0])
            other = pivot_of.get(t)
            if other is None:
                pivot_of[t] = r
                reduced[r] = col
                out_edges.append(r)
                out_keys.append(t)
                break
            if other in apparent:
                other_col = _cofacet_keys(int(eu[other]), int(ev[other]), n, vrank, thr)
            else:
                other_col = reduced[other]
            col = np.setxor1d(col, other_col, assume_unique=True)

    return np.asarray(out_edges, dtype=np.int64), np.asarray(out_keys, dtype=np.int64)
