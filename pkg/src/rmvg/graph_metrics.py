"""Per-vertex degree, clustering, betweenness and closeness.

Path lengths are hop counts on binary graphs and sums of ``1 / weight`` on
weighted graphs. Betweenness counts unordered vertex pairs.
"""

from __future__ import annotations

import enum

import numba
import numpy as np

from .hvg import Mode, VisibilityGraph


class VertexProperty(str, enum.Enum):
    DG = "DG"
    CL = "CL"
    BC = "BC"
    CC = "CC"


def _csr(g: VisibilityGraph):
    a = g.adjacency
    return (a.indptr.astype(np.int64), a.indices.astype(np.int64),
            a.data.astype(np.float64))


@numba.njit(cache=True)
def _clustering(indptr, indices, data):
    n = indptr.shape[0] - 1
    out = np.zeros(n)
    mark = np.zeros(n, dtype=np.bool_)
    for v in range(n):
        lo, hi = indptr[v], indptr[v + 1]
        size = hi - lo + 1
        if size <= 1:
            continue
        own = 0.0
        for e in range(lo, hi):
            mark[indices[e]] = True
            own += data[e]
        inner = 0.0
        for e in range(lo, hi):
            u = indices[e]
            for f in range(indptr[u], indptr[u + 1]):
                if mark[indices[f]]:
                    inner += data[f]
        for e in range(lo, hi):
            mark[indices[e]] = False
        out[v] = (2.0 * own + inner) / (size * (size - 1.0))
    return out


@numba.njit(cache=True)
def _brandes_bfs(indptr, indices):
    n = indptr.shape[0] - 1
    bc = np.zeros(n)
    cc = np.zeros(n)
    dist = np.empty(n, dtype=np.int64)
    sigma = np.empty(n)
    delta = np.empty(n)
    order = np.empty(n, dtype=np.int64)
    for s in range(n):
        dist[:] = -1
        sigma[:] = 0.0
        delta[:] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = order[head]
            head += 1
            dv = dist[v] + 1
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if dist[w] < 0:
                    dist[w] = dv
                    order[tail] = w
                    tail += 1
                if dist[w] == dv:
                    sigma[w] += sigma[v]
        acc = 0.0
        for k in range(1, tail):
            acc += 2.0 ** (-dist[order[k]])
        cc[s] = acc
        for k in range(tail - 1, 0, -1):
            w = order[k]
            coef = (1.0 + delta[w]) / sigma[w]
            dw = dist[w] - 1
            for e in range(indptr[w], indptr[w + 1]):
                v = indices[e]
                if dist[v] == dw:
                    delta[v] += sigma[v] * coef
            bc[w] += delta[w]
    return bc * 0.5, cc


@numba.njit(cache=True)
def _heap_push(hkey, hval, size, key, val):
    i = size
    hkey[i] = key
    hval[i] = val
    while i > 0:
        p = (i - 1) >> 1
        if hkey[p] > hkey[i] or (hkey[p] == hkey[i] and hval[p] > hval[i]):
            hkey[p], hkey[i] = hkey[i], hkey[p]
            hval[p], hval[i] = hval[i], hval[p]
            i = p
        else:
            break
    return size + 1


@numba.njit(cache=True)
def _heap_pop(hkey, hval, size):
    key = hkey[0]
    val = hval[0]
    size -= 1
    hkey[0] = hkey[size]
    hval[0] = hval[size]
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        m = i
        if l < size and (hkey[l] < hkey[m] or (hkey[l] == hkey[m] and hval[l] < hval[m])):
            m = l
        if r < size and (hkey[r] < hkey[m] or (hkey[r] == hkey[m] and hval[r] < hval[m])):
            m = r
        if m == i:
            break
        hkey[m], hkey[i] = hkey[i], hkey[m]
        hval[m], hval[i] = hval[i], hval[m]
        i = m
    return key, val, size


@numba.njit(cache=True)
def _brandes_dijkstra(indptr, indices, length):
    n = indptr.shape[0] - 1
    m = indices.shape[0]
    bc = np.zeros(n)
    cc = np.zeros(n)
    dist = np.empty(n)
    sigma = np.empty(n)
    delta = np.empty(n)
    done = np.empty(n, dtype=np.bool_)
    order = np.empty(n, dtype=np.int64)
    hkey = np.empty(m + n)
    hval = np.empty(m + n, dtype=np.int64)
    for s in range(n):
        dist[:] = np.inf
        sigma[:] = 0.0
        delta[:] = 0.0
        done[:] = False
        dist[s] = 0.0
        sigma[s] = 1.0
        size = _heap_push(hkey, hval, 0, 0.0, s)
        count = 0
        while size > 0:
            d, v, size = _heap_pop(hkey, hval, size)
            if done[v]:
                continue
            done[v] = True
            order[count] = v
            count += 1
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if done[w]:
                    continue
                alt = d + length[e]
                if alt < dist[w]:
                    dist[w] = alt
                    sigma[w] = sigma[v]
                    size = _heap_push(hkey, hval, size, alt, w)
                elif alt == dist[w]:
                    sigma[w] += sigma[v]
        acc = 0.0
        for k in range(1, count):
            acc += 2.0 ** (-dist[order[k]])
        cc[s] = acc
        for k in range(count - 1, 0, -1):
            w = order[k]
            coef = (1.0 + delta[w]) / sigma[w]
            for e in range(indptr[w], indptr[w + 1]):
                v = indices[e]
                if dist[v] + length[e] == dist[w]:
                    delta[v] += sigma[v] * coef
            bc[w] += delta[w]
    return bc * 0.5, cc


def degree(g: VisibilityGraph, v: int | None = None):
    """Weighted degree of ``v``; all vertices when ``v`` is None."""
    d = g.degrees()
    return d if v is None else float(d[v])


def clustering(g: VisibilityGraph, v: int | None = None):
    """Clustering with the vertex itself counted in its neighbourhood.

    ``sum_{i,j in C} A[i,j] / (|C| (|C| - 1))`` over ordered pairs, where
    ``C`` is ``v`` plus its neighbours; 0 for isolated vertices.
    """
    out = _clustering(*_csr(g))
    return out if v is None else float(out[v])


def betweenness_closeness(g: VisibilityGraph) -> tuple[np.ndarray, np.ndarray]:
    """Both path-based centralities from a single all-sources Brandes sweep.

    Closeness here is ``sum_{i != v} 2 ** -dist(i, v)``; unreachable
    vertices contribute nothing.
    """
    indptr, indices, data = _csr(g)
    if g.mode is Mode.BINARY:
        return _brandes_bfs(indptr, indices)
    return _brandes_dijkstra(indptr, indices, 1.0 / data)


def betweenness(g: VisibilityGraph, v: int | None = None):
    out = betweenness_closeness(g)[0]
    return out if v is None else float(out[v])


def closeness(g: VisibilityGraph, v: int | None = None):
    out = betweenness_closeness(g)[1]
    return out if v is None else float(out[v])


def vertex_properties(g: VisibilityGraph, kind) -> np.ndarray:
    """The chosen metric at every vertex, in time order."""
    kind = VertexProperty(kind)
    if kind is VertexProperty.DG:
        return degree(g)
    if kind is VertexProperty.CL:
        return clustering(g)
    if kind is VertexProperty.BC:
        return betweenness(g)
    return closeness(g)


def all_vertex_properties(g: VisibilityGraph, kinds=tuple(VertexProperty)) -> dict:
    """Metrics for several kinds, sharing the shortest-path sweep."""
    kinds = [VertexProperty(k) for k in kinds]
    out = {}
    if VertexProperty.DG in kinds:
        out[VertexProperty.DG] = degree(g)
    if VertexProperty.CL in kinds:
        out[VertexProperty.CL] = clustering(g)
    if VertexProperty.BC in kinds or VertexProperty.CC in kinds:
        bc, cc = betweenness_closeness(g)
        if VertexProperty.BC in kinds:
            out[VertexProperty.BC] = bc
        if VertexProperty.CC in kinds:
            out[VertexProperty.CC] = cc
    return out
