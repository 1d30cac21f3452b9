"""Multiplex of per-neuron visibility graphs and the measures defined on it:
time-averaged entropy of vertex properties across layers, average edge
overlap and average interlayer mutual information of degree sequences."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .esn import StateTrajectory
from .graph_metrics import VertexProperty, all_vertex_properties
from .hvg import Mode, build_hvg

BINS = 50


@dataclass(frozen=True, eq=False)
class Multiplex:
    layers: tuple
    mode: Mode
    _props: dict = field(default_factory=dict, repr=False)

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def n(self) -> int:
        return self.layers[0].n

    def properties(self, kind) -> np.ndarray:
        """``(n_layers, n)`` matrix of one vertex property; row ``l`` is the
        sequence of layer ``l`` in time order. Cached."""
        return self.properties_many([kind])[VertexProperty(kind)]

    def properties_many(self, kinds) -> dict:
        kinds = [VertexProperty(k) for k in kinds]
        missing = [k for k in kinds if k not in self._props]
        if missing:
            rows = [all_vertex_properties(g, missing) for g in self.layers]
            for k in missing:
                self._props[k] = np.vstack([r[k] for r in rows])
        return {k: self._props[k] for k in kinds}

    def binarized(self) -> "Multiplex":
        if self.mode is Mode.BINARY:
            return self
        return Multiplex(tuple(g.binarized() for g in self.layers), Mode.BINARY)

    def degree_sequences(self) -> np.ndarray:
        """Integer binary degrees, ``(n_layers, n)``."""
        return np.vstack([g.binarized().degrees() for g in self.layers]).astype(np.int64)


@dataclass(frozen=True)
class HeterogeneityResult:
    h_bar: float
    per_t: np.ndarray
    kind: VertexProperty
    bins: int


def build_multiplex(states, mode=Mode.BINARY) -> Multiplex:
    """One HVG layer per neuron built from its activation series.

    ``states`` is a ``(t_max, n_r)`` array or a trajectory, whose washout rows
    are dropped first.
    """
    h = states.h if isinstance(states, StateTrajectory) else np.asarray(states, dtype=float)
    if h.ndim != 2 or h.shape[1] < 2 or h.shape[0] < 2:
        raise ValueError("need at least 2 neurons and 2 time steps")
    mode = Mode(mode)
    return Multiplex(tuple(build_hvg(h[:, l], mode) for l in range(h.shape[1])), mode)


def column_entropies(values: np.ndarray, bins: int = BINS) -> np.ndarray:
    """Shannon entropy (bits) of each column of ``values`` from a ``bins``-bin
    equal-width histogram over that column's own [min, max].

    A column with a single distinct value has entropy 0.
    """
    if bins < 2:
        raise ValueError("need at least 2 bins")
    v = np.asarray(values, dtype=float)
    n_rows, n_cols = v.shape
    lo = v.min(axis=0)
    hi = v.max(axis=0)
    span = hi - lo
    flat = span <= 0
    # divide before scaling so a subnormal span cannot overflow
    idx = np.floor((v - lo) / np.where(flat, 1.0, span) * bins).astype(np.int64)
    np.clip(idx, 0, bins - 1, out=idx)
    # last edge is closed, matching numpy.histogram
    counts = np.zeros((n_cols, bins))
    cols = np.broadcast_to(np.arange(n_cols), v.shape)
    np.add.at(counts, (cols.ravel(), idx.ravel()), 1.0)
    p = counts / n_rows
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    h = -terms.sum(axis=1)
    h[flat] = 0.0
    return np.maximum(h, 0.0)


def instantaneous_entropy(m: Multiplex, t: int, kind, bins: int = BINS) -> float:
    """Entropy of the property values across layers at vertex ``t`` (0-based)."""
    col = m.properties(kind)[:, t : t + 1]
    return float(column_entropies(col, bins)[0])


def heterogeneity(m: Multiplex, kind, bins: int = BINS) -> HeterogeneityResult:
    """Mean over time of the across-layer property entropy."""
    kind = VertexProperty(kind)
    per_t = column_entropies(m.properties(kind), bins)
    return HeterogeneityResult(float(per_t.mean()), per_t, kind, bins)


def aeo(m: Multiplex) -> float:
    """Average edge overlap on the binarized layers: mean number of layers
    carrying each edge of the union graph, divided by the layer count."""
    keys = np.concatenate([g.edge_keys() for g in m.layers])
    if keys.size == 0:
        raise ValueError("multiplex has no edges")
    union = np.unique(keys).size
    return float(keys.size / (m.n_layers * union))


def _entropy_bits(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log2(p)).sum())


def discrete_mutual_info(a: np.ndarray, b: np.ndarray) -> float:
    """Plug-in mutual information (bits) of two integer sequences from their
    exact joint counts."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    ka = ia.max() + 1
    kb = ib.max() + 1
    joint = np.bincount(ia * kb + ib, minlength=ka * kb).reshape(ka, kb)
    return _mi_from_joint(joint)


def _mi_from_joint(joint: np.ndarray) -> float:
    joint = np.asarray(joint, dtype=float)
    mi = (_entropy_bits(joint.sum(axis=1)) + _entropy_bits(joint.sum(axis=0))
          - _entropy_bits(joint.ravel()))
    return max(mi, 0.0)


def imi_pair(m: Multiplex, li: int, lj: int) -> float:
    """Mutual information between the binary degree sequences of two layers."""
    deg = m.degree_sequences()
    return discrete_mutual_info(deg[li], deg[lj])


def avg_imi(m: Multiplex) -> float:
    """Mean interlayer mutual information over all unordered layer pairs."""
    if m.n_layers < 2:
        raise ValueError("need at least two layers")
    deg = m.degree_sequences()
    k = int(deg.max()) + 1
    marg = [np.bincount(d, minlength=k).astype(float) for d in deg]
    h = [_entropy_bits(c) for c in marg]
    total = 0.0
    pairs = 0
    for i, j in combinations(range(m.n_layers), 2):
        joint = np.bincount(deg[i] * k + deg[j], minlength=k * k)
        total += max(h[i] + h[j] - _entropy_bits(joint), 0.0)
        pairs += 1
    return total / pairs
