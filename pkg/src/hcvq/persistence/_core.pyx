# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled reduction kernel; mirrors ``_pure`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t
from libcpp.vector cimport vector
from libcpp.unordered_map cimport unordered_map
from libcpp.algorithm cimport sort
from cython.operator cimport dereference as deref

cnp.import_array()


cdef inline int _find(int* parent, int x) noexcept nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def union_find_pairs(int n, const int64_t[::1] eu, const int64_t[::1] ev):
    cdef vector[int] parent
    cdef vector[int64_t] vertices, ranks
    cdef Py_ssize_t r, m = eu.shape[0]
    cdef int ru, rv, elder, younger
    parent.resize(n)
    for r in range(n):
        parent[r] = <int>r
    with nogil:
        for r in range(m):
            ru = _find(parent.data(), <int>eu[r])
            rv = _find(parent.data(), <int>ev[r])
            if ru == rv:
                continue
            if ru < rv:
                elder, younger = ru, rv
            else:
                elder, younger = rv, ru
            parent[younger] = elder
            vertices.push_back(younger)
            ranks.push_back(r)
            if <int>ranks.size() == n - 1:
                break
    out_v = np.empty(vertices.size(), dtype=np.int64)
    out_r = np.empty(ranks.size(), dtype=np.int64)
    cdef int64_t[::1] ov = out_v, orr = out_r
    for r in range(<Py_ssize_t>vertices.size()):
        ov[r] = vertices[r]
        orr[r] = ranks[r]
    return out_v, out_r


cdef inline int64_t _max3(int64_t a, int64_t b, int64_t c) noexcept nogil:
    if b > a:
        a = b
    if c > a:
        a = c
    return a


cdef void _cofacets(int u, int v, int n, const int64_t[:, ::1] vrank, int64_t thr,
                    vector[int64_t]& out, bint do_sort) noexcept nogil:
    cdef int k, a, b, c
    cdef int64_t vr, base = vrank[u, v]
    out.clear()
    for k in range(n):
        if k == u or k == v:
            continue
        vr = _max3(base, vrank[u, k], vrank[v, k])
        if vr > thr:
            continue
        if k < u:
            a, b, c = k, u, v
        elif k < v:
            a, b, c = u, k, v
        else:
            a, b, c = u, v, k
        out.push_back(((vr * n + a) * n + b) * n + c)
    if do_sort:
        sort(out.begin(), out.end())


cdef void _symdiff(const vector[int64_t]& x, const vector[int64_t]& y,
                   vector[int64_t]& out) noexcept nogil:
    cdef size_t i = 0, j = 0, nx = x.size(), ny = y.size()
    out.clear()
    out.reserve(nx + ny)
    while i < nx and j < ny:
        if x[i] < y[j]:
            out.push_back(x[i]); i += 1
        elif y[j] < x[i]:
            out.push_back(y[j]); j += 1
        else:
            i += 1; j += 1
    while i < nx:
        out.push_back(x[i]); i += 1
    while j < ny:
        out.push_back(y[j]); j += 1


def cohomology_pairs(int n, const int64_t[::1] eu, const int64_t[::1] ev,
                     const int64_t[:, ::1] vrank, const int64_t[:, ::1] erank,
                     const int64_t[::1] mst_ranks, int64_t thr, int center):
    cdef Py_ssize_t m = eu.shape[0], r, i
    cdef int64_t nn = <int64_t>n, n3 = nn * nn * nn, t, a, b, c, other
    cdef int u, v
    cdef vector[char] cleared, apparent
    cdef vector[vector[int64_t]] reduced
    cdef vector[int64_t] col, other_col, tmp, out_edges, out_keys
    cdef unordered_map[int64_t, int64_t] pivot_of
    cdef unordered_map[int64_t, int64_t].iterator it

    cleared.resize(m, 0)
    apparent.resize(m, 0)
    reduced.resize(m)
    for i in range(mst_ranks.shape[0]):
        cleared[mst_ranks[i]] = 1

    with nogil:
        r = m - 1
        while r >= 0:
            if cleared[r]:
                r -= 1
                continue
            u = <int>eu[r]
            v = <int>ev[r]
            if vrank[u, v] > thr:
                # past the enclosing radius: killed at once by the cone over the centre
                if center < u:
                    a, b, c = center, u, v
                elif center < v:
                    a, b, c = u, center, v
                else:
                    a, b, c = u, v, center
                out_edges.push_back(r)
                out_keys.push_back(((vrank[u, v] * nn + a) * nn + b) * nn + c)
                r -= 1
                continue
            _cofacets(u, v, n, vrank, thr, col, False)
            t = col[0]
            for i in range(1, <Py_ssize_t>col.size()):
                if col[i] < t:
                    t = col[i]
            c = t % nn
            b = (t // nn) % nn
            a = (t // (nn * nn)) % nn
            if t // n3 == vrank[u, v] and _max3(erank[a, b], erank[a, c], erank[b, c]) == r:
                pivot_of[t] = r
                apparent[r] = 1
                out_edges.push_back(r)
                out_keys.push_back(t)
                r -= 1
                continue
            sort(col.begin(), col.end())
            while True:
                if col.size() == 0:
                    out_edges.push_back(r)
                    out_keys.push_back(-1)
                    break
                t = col[0]
                it = pivot_of.find(t)
                if it == pivot_of.end():
                    pivot_of[t] = r
                    reduced[r].swap(col)
                    out_edges.push_back(r)
                    out_keys.push_back(t)
                    break
                other = deref(it).second
                if apparent[other]:
                    _cofacets(<int>eu[other], <int>ev[other], n, vrank, thr, other_col, True)
                    _symdiff(col, other_col, tmp)
                else:
                    _symdiff(col, reduced[other], tmp)
                col.swap(tmp)
            r -= 1

    oe = np.empty(out_edges.size(), dtype=np.int64)
    ok = np.empty(out_keys.size(), dtype=np.int64)
    cdef int64_t[::1] oev = oe, okv = ok
    for i in range(<Py_ssize_t>out_edges.size()):
        oev[i] = out_edges[i]
        okv[i] = out_keys[i]
    return oe, ok
