"""Horizontal visibility graphs (binary and weighted) of univariate series."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numba
import numpy as np
import scipy.sparse as sp


class Mode(str, enum.Enum):
    BINARY = "binary"
    WEIGHTED = "weighted"


@numba.njit(cache=True)
def _hvg_scan(x, fill, src, dst):
    # Two-pass use: fill=False only counts edges.
    n = x.shape[0]
    m = 0
    for i in range(n - 1):
        xi = x[i]
        top = -np.inf
        j = i + 1
        while j < n:
            if x[j] > top:
                if fill:
                    src[m] = i
                    dst[m] = j
                m += 1
                top = x[j]
                # an intermediate equal to x[i] already blocks i
                if top >= xi:
                    break
            j += 1
    return m


def hvg_edges(x) -> tuple[np.ndarray, np.ndarray]:
    """Edge list ``(i, j)``, ``i < j``, 0-based, sorted by ``(i, j)``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    empty = np.empty(0, dtype=np.int64)
    m = _hvg_scan(x, False, empty, empty)
    src = np.empty(m, dtype=np.int64)
    dst = np.empty(m, dtype=np.int64)
    _hvg_scan(x, True, src, dst)
    return src, dst


def hvg_weights(x, src, dst) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return 1.0 / np.hypot((dst - src).astype(float), x[src] - x[dst])


@dataclass(frozen=True, eq=False)
class VisibilityGraph:
    """Undirected HVG stored as a sorted edge list.

    Vertex ``t`` (0-based) corresponds to sample ``x[t]``. In binary mode all
    weights are 1.
    """

    n: int
    mode: Mode
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges, weights=None, mode=None) -> "VisibilityGraph":
        """Graph from arbitrary undirected ``(i, j)`` pairs (0-based)."""
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        e = np.sort(e, axis=1)
        w = np.ones(len(e)) if weights is None else np.asarray(weights, dtype=float)
        idx = np.lexsort((e[:, 1], e[:, 0]))
        if mode is None:
            mode = Mode.BINARY if weights is None else Mode.WEIGHTED
        return cls(n, Mode(mode), e[idx, 0], e[idx, 1], w[idx])

    @property
    def n_edges(self) -> int:
        return self.src.shape[0]

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric CSR adjacency with sorted column indices."""
        a = sp.coo_matrix((self.weight, (self.src, self.dst)), shape=(self.n, self.n))
        a = (a + a.T).tocsr()
        a.sort_indices()
        return a

    def binarized(self) -> "VisibilityGraph":
        if self.mode is Mode.BINARY:
            return self
        return VisibilityGraph(self.n, Mode.BINARY, self.src, self.dst,
                               np.ones(self.n_edges))

    def edge_keys(self) -> np.ndarray:
        """``i * n + j`` for each edge; sorted because edges are."""
        return self.src * self.n + self.dst

    def degrees(self) -> np.ndarray:
        """Weighted degree (plain degree in binary mode)."""
        d = np.bincount(self.src, weights=self.weight, minlength=self.n)
        d += np.bincount(self.dst, weights=self.weight, minlength=self.n)
        return d

    def __eq__(self, other):
        if not isinstance(other, VisibilityGraph):
            return NotImplemented
        return (self.n == other.n and self.mode == other.mode
                and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst)
                and np.array_equal(self.weight, other.weight))

    __hash__ = None


def build_hvg(x, mode=Mode.BINARY) -> VisibilityGraph:
    """Horizontal visibility graph of ``x``.

    ``(i, j)`` is an edge iff every sample strictly between them is strictly
    lower than both ends. Weighted edges carry ``1 / hypot(j - i, x[i] - x[j])``.
    """
    mode = Mode(mode)
    x = np.asarray(getattr(x, "values", x), dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 2:
        raise ValueError("need a one-dimensional series of length >= 2")
    if not np.all(np.isfinite(x)):
        raise ValueError("series must be finite")
    src, dst = hvg_edges(x)
    if mode is Mode.BINARY:
        w = np.ones(src.shape[0])
    else:
        w = hvg_weights(x, src, dst)
    return VisibilityGraph(x.shape[0], mode, src, dst, w)


def degree_law_check(length: int = 100_000, seed: int = 0):
    """Degree distribution of the binary HVG of i.i.d. uniform noise.

    Returns ``(pk, mean_degree)`` where ``pk[k]`` is the empirical
    probability of degree ``k``.
    """
    rng = np.random.default_rng(seed)
    g = build_hvg(rng.uniform(size=length))
    deg = g.degrees().astype(np.int64)
    pk = np.bincount(deg) / length
    return pk, float(deg.mean())


def write_edges(g: VisibilityGraph, path) -> None:
    """``i j weight`` per line, 1-based vertex indices, sorted by ``(i, j)``."""
    with open(path, "w") as fh:
        for i, j, w in zip(g.src + 1, g.dst + 1, g.weight):
            fh.write(f"{i} {j} {w:.17g}\n")


def read_edges(path, n: int, mode=Mode.BINARY) -> VisibilityGraph:
    data = np.loadtxt(path, ndmin=2)
    if data.size == 0:
        data = np.empty((0, 3))
    return VisibilityGraph(n, Mode(mode), data[:, 0].astype(np.int64) - 1,
                           data[:, 1].astype(np.int64) - 1, data[:, 2].copy())
