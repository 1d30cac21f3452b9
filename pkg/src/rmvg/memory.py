"""Unsupervised memory quantifiers.

Each measure looks for the neuron whose activity best agrees with a delayed
copy of the input, for any delay in a window ``[tau_b, tau_a]``:

* ``delta_ts``  -- similarity of the raw activation and delayed input series;
* ``delta_dg``  -- similarity of their binary-HVG degree sequences;
* ``delta_and`` -- number of HVG edges the two graphs share.

All series live in the post-washout frame of the reservoir states. For a
delay ``tau`` the input sample aligned with state ``t`` is ``x[t - tau]``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import rankdata

from .errors import UndefinedCorrelation
from .esn import StateTrajectory
from .hvg import Mode, build_hvg
from .multiplex import Multiplex, build_multiplex

MI_BINS = 16


class Similarity(str, enum.Enum):
    PC = "pc"
    SC = "sc"
    MI = "mi"


@dataclass(frozen=True)
class DelayWindow:
    tau_a: int
    tau_b: int

    def __post_init__(self):
        if not self.tau_a > self.tau_b >= 1:
            raise ValueError("need tau_a > tau_b >= 1")

    @property
    def lags(self) -> range:
        return range(self.tau_b, self.tau_a + 1)

    @property
    def label(self) -> str:
        return f"{self.tau_a}:{self.tau_b}"

    @classmethod
    def parse(cls, text: str) -> "DelayWindow":
        a, b = text.split(":")
        return cls(int(a), int(b))


@dataclass(frozen=True)
class AgreementResult:
    """Best agreement and where it was found (0-based layer, delay).
    ``best_layer``/``best_lag`` are None when every candidate was undefined."""

    value: float
    best_layer: Optional[int]
    best_lag: Optional[int]


def _check_pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.shape[0] < 2:
        raise ValueError("need two sequences of equal length >= 2")
    return a, b


def pearson(a, b) -> float:
    a, b = _check_pair(a, b)
    da = a - a.mean()
    db = b - b.mean()
    na = np.sqrt(da @ da)
    nb = np.sqrt(db @ db)
    if na == 0 or nb == 0:
        raise UndefinedCorrelation("correlation undefined for a constant sequence")
    return float(np.clip((da @ db) / (na * nb), -1.0, 1.0))


def spearman(a, b) -> float:
    """Pearson correlation of average ranks (ties share their mean rank)."""
    a, b = _check_pair(a, b)
    return pearson(rankdata(a), rankdata(b))


def _bin_index(v: np.ndarray, bins: int) -> np.ndarray:
    """Equal-width bin index of each row of ``v`` over that row's [min, max]."""
    lo = v.min(axis=-1, keepdims=True)
    span = v.max(axis=-1, keepdims=True) - lo
    rel = (v - lo) / np.where(span > 0, span, 1.0)
    return np.clip(np.floor(rel * bins).astype(np.int64), 0, bins - 1)


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    n = counts.sum(axis=-1, keepdims=True)
    p = counts / n
    with np.errstate(divide="ignore", invalid="ignore"):
        return -np.where(p > 0, p * np.log2(p), 0.0).sum(axis=-1)


def mutual_info(a, b, bins: int = MI_BINS) -> float:
    """Mutual information (bits) from an equal-width ``bins`` x ``bins``
    joint histogram spanning the range of each sequence."""
    a, b = _check_pair(a, b)
    return float(_mi_batch(b[None, :], a, bins)[0])


def _mi_batch(rows: np.ndarray, probe: np.ndarray, bins: int) -> np.ndarray:
    if bins < 2:
        raise ValueError("need at least 2 bins")
    ir = _bin_index(rows, bins)
    ip = _bin_index(probe, bins)
    n_rows, n = ir.shape
    codes = (np.arange(n_rows)[:, None] * bins + ir) * bins + ip[None, :]
    joint = np.bincount(codes.ravel(), minlength=n_rows * bins * bins)
    joint = joint.reshape(n_rows, bins, bins).astype(float)
    mi = (_entropy_rows(joint.sum(axis=2)) + _entropy_rows(joint.sum(axis=1))
          - _entropy_rows(joint.reshape(n_rows, -1)))
    return np.maximum(mi, 0.0)


def _pearson_batch(rows: np.ndarray, probe: np.ndarray) -> np.ndarray:
    """Pearson correlation of ``probe`` with every row; NaN where undefined."""
    dr = rows - rows.mean(axis=1, keepdims=True)
    dp = probe - probe.mean()
    nr = np.sqrt(np.einsum("ij,ij->i", dr, dr))
    np_ = np.sqrt(dp @ dp)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = (dr @ dp) / (nr * np_)
    r[(nr == 0) | (np_ == 0)] = np.nan
    return np.clip(r, -1.0, 1.0)


def _similarity_grid(rows: np.ndarray, probes: list, kind: Similarity,
                     bins: int) -> np.ndarray:
    """``grid[l, k]`` = similarity of row ``l`` with ``probes[k]``."""
    kind = Similarity(kind)
    if kind is Similarity.SC:
        rows = rankdata(rows, axis=1)
        probes = [rankdata(p) for p in probes]
    cols = []
    for p in probes:
        if kind is Similarity.MI:
            cols.append(_mi_batch(rows, p, bins))
        else:
            cols.append(_pearson_batch(rows, p))
    return np.column_stack(cols)


def _best(grid: np.ndarray, lags) -> AgreementResult:
    # undefined similarities contribute 0; ties go to the smallest (layer, lag)
    g = np.where(np.isnan(grid), -np.inf, grid)
    flat = int(np.argmax(g))
    best = g.flat[flat]
    if not np.isfinite(best):
        return AgreementResult(0.0, None, None)
    if best < 0 and np.isnan(grid).any():
        return AgreementResult(0.0, None, None)
    layer, k = divmod(flat, grid.shape[1])
    return AgreementResult(float(best), layer, int(lags[k]))


def _frame(x, states):
    """Post-washout activations ``(n, n_r)`` and the matching input slice.
    ``x`` may be full length (washout rows included) or already trimmed."""
    if isinstance(states, StateTrajectory):
        h = states.h
        washout = states.washout
    else:
        h = np.asarray(states, dtype=float)
        washout = 0
    x = np.asarray(getattr(x, "values", x), dtype=float)
    if x.shape[0] == h.shape[0] + washout:
        x = x[washout:]
    if x.shape[0] != h.shape[0]:
        raise ValueError("input is not aligned with the states")
    return h, x


def _check_window(w: DelayWindow, n: int, trim: bool):
    need = 3 * w.tau_a if trim else w.tau_a
    if need + 2 > n:
        raise ValueError(f"window {w.label} too long for {n} samples")


def delta_ts(x, states, w: DelayWindow, kappa=Similarity.PC,
             bins: int = MI_BINS) -> AgreementResult:
    """Best similarity between any activation series and the input delayed by
    any ``tau`` in the window, over steps ``t >= tau_a``."""
    h, x = _frame(x, states)
    n = h.shape[0]
    _check_window(w, n, trim=False)
    rows = np.ascontiguousarray(h[w.tau_a:].T)
    probes = [x[w.tau_a - tau : n - tau] for tau in w.lags]
    return _best(_similarity_grid(rows, probes, kappa, bins), list(w.lags))


def _overlap(w: DelayWindow, n: int) -> tuple[int, int]:
    # shared range [tau_a, n) with tau_a more steps dropped at both ends
    return 2 * w.tau_a, n - w.tau_a


def _layers_and_input(x, m):
    if isinstance(m, Multiplex):
        if m.mode is not Mode.BINARY:
            m = m.binarized()
        x = np.asarray(getattr(x, "values", x), dtype=float)
        if x.shape[0] > m.n:
            x = x[x.shape[0] - m.n:]
        if x.shape[0] != m.n:
            raise ValueError("input is not aligned with the multiplex")
        return x, m
    h, x = _frame(x, m)
    return x, build_multiplex(h, Mode.BINARY)


def delta_dg(x, m, w: DelayWindow, kappa=Similarity.SC,
             bins: int = MI_BINS) -> AgreementResult:
    """Best similarity between a layer's degree sequence and the input HVG's
    degree sequence shifted by any delay in the window.

    ``m`` is a binary multiplex in the post-washout frame (or a trajectory
    to build it from); ``x`` is the input in the same frame or full length.
    """
    x, m = _layers_and_input(x, m)
    n = m.n
    _check_window(w, n, trim=True)
    lo, hi = _overlap(w, n)
    phi_x = build_hvg(x, Mode.BINARY).degrees()
    rows = np.ascontiguousarray(m.degree_sequences()[:, lo:hi], dtype=float)
    probes = [phi_x[lo - tau : hi - tau] for tau in w.lags]
    return _best(_similarity_grid(rows, probes, kappa, bins), list(w.lags))


def delta_and(x, m, w: DelayWindow, normalized: bool = False) -> AgreementResult:
    """Largest number of edges shared by a layer and the delayed input HVG,
    both restricted to the trimmed overlap.

    With ``normalized`` the count is divided by the restricted input edge
    count.
    """
    x, m = _layers_and_input(x, m)
    n = m.n
    _check_window(w, n, trim=True)
    lo, hi = _overlap(w, n)
    gx = build_hvg(x, Mode.BINARY)
    layer_keys = []
    for g in m.layers:
        keep = (g.src >= lo) & (g.dst < hi)
        layer_keys.append(g.src[keep] * n + g.dst[keep])
    lags = list(w.lags)
    counts = np.zeros((len(layer_keys), len(lags)))
    for k, tau in enumerate(lags):
        s = gx.src + tau
        d = gx.dst + tau
        keep = (s >= lo) & (d < hi)
        xk = s[keep] * n + d[keep]
        for l, lk in enumerate(layer_keys):
            if lk.size and xk.size:
                pos = np.minimum(np.searchsorted(lk, xk), lk.size - 1)
                counts[l, k] = np.count_nonzero(lk[pos] == xk)
                if normalized:
                    counts[l, k] /= xk.size
    return _best(counts, lags)
