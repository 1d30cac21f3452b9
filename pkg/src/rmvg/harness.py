"""Hyperparameter sweeps relating unsupervised graph measures to supervised
accuracy and memory capacity.

Work items are ``(cell, trial)`` pairs. Each item is a pure function of the
sweep configuration and its indices: the reservoir seed is derived from
``(base_seed, k, j, trial)`` and the task signal is shared by every item.
Results are sorted by index before aggregation, so output does not depend
on the number of worker processes.
"""

from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats
from threadpoolctl import threadpool_limits

from . import esn
from .errors import NumericFailure, UndefinedCorrelation
from .graph_metrics import VertexProperty
from .hvg import Mode
from .memory import DelayWindow, Similarity, delta_and, delta_dg, delta_ts
from .multiplex import BINS, aeo, avg_imi, build_multiplex, heterogeneity
from .signals import DEFAULT_LENGTH, TaskKind, TaskSpec, gen_noise, task_series

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
TASK_STREAM = 0x7A5C

ENTROPY_MEASURES = [f"H_{k.value}_{m}" for m in ("b", "w") for k in VertexProperty]
ACCURACY_MEASURES = ENTROPY_MEASURES + ["IMI", "AEO", "lambda"]
DEFAULT_WINDOWS = ("10:5", "15:10", "20:15", "25:20")
MEMORY_KINDS = [f"delta_{src}_{k.value}" for src in ("ts", "dg") for k in Similarity]
MEMORY_KINDS.append("delta_and")

DESK_SCALE = {"rho_steps": 9, "omega_steps": 5, "trials": 5}
FULL_SCALE = {"rho_steps": 20, "omega_steps": 10, "trials": 15}
MEMORY_DESK_SCALE = {"rho_steps": 20, "trials": 5}
MEMORY_FULL_SCALE = {"rho_steps": 100, "trials": 15}

RECOVERABLE = (NumericFailure, UndefinedCorrelation, np.linalg.LinAlgError, FloatingPointError)


class SweepAborted(RuntimeError):
    """Every trial of some grid cell failed."""


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, *indices: int) -> int:
    """64-bit seed mixed from a base seed and any number of indices."""
    z = _splitmix64(base_seed & MASK64)
    for i in indices:
        z = _splitmix64(z ^ (i & MASK64))
    return z


def grid(lo: float, hi: float, steps: int) -> list[float]:
    if steps < 1:
        raise ValueError("grid needs at least one step")
    if steps == 1:
        return [float(lo)]
    return [float(v) for v in np.linspace(lo, hi, steps)]


def _check_grid(values, name):
    if len(values) == 0:
        raise ValueError(f"{name} grid is empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} grid must be strictly increasing")


@dataclass(frozen=True)
class SweepConfig:
    task: TaskSpec
    rho_grid: tuple
    omega_grid: tuple
    trials: int = 5
    n_r: int = 100
    sparsity: float = 0.25
    reg: float = esn.RIDGE
    washout: int = esn.WASHOUT
    bins: int = BINS
    length: int = DEFAULT_LENGTH
    measures: tuple = tuple(ACCURACY_MEASURES)
    base_seed: int = 0
    lags: tuple = tuple(range(1, 41))
    windows: tuple = DEFAULT_WINDOWS
    threads: int = 1

    def __post_init__(self):
        _check_grid(self.rho_grid, "rho")
        _check_grid(self.omega_grid, "omega")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        object.__setattr__(self, "rho_grid", tuple(float(r) for r in self.rho_grid))
        object.__setattr__(self, "omega_grid", tuple(float(w) for w in self.omega_grid))

    @property
    def task_seed(self) -> int:
        return derive_seed(self.base_seed, TASK_STREAM)


@dataclass
class ManifoldResult:
    """Trial means per grid cell: ``means[name][k, j]``."""

    rho: np.ndarray
    omega: np.ndarray
    means: dict
    counts: np.ndarray


@dataclass
class SweepResult:
    kind: str  # "accuracy" or "memory"
    columns: list
    raw: list
    manifold: ManifoldResult
    correlations: list = field(default_factory=list)
    overall_correlations: list = field(default_factory=list)


def effective_threads(requested: int | None = None) -> int:
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("RMVG_THREADS")
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def _limit_blas():
    threadpool_limits(1)


def _execute(fn, items, threads: int):
    """Run ``fn`` over ``items`` and return results in item order."""
    threads = effective_threads(threads)
    if threads == 1:
        with threadpool_limits(1):
            return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads, initializer=_limit_blas) as pool:
        return list(pool.map(fn, items, chunksize=1))


# --- accuracy -------------------------------------------------------------

def _entropy_plan(measures):
    plan = {Mode.BINARY: [], Mode.WEIGHTED: []}
    for name in measures:
        if name.startswith("H_"):
            _, kind, mode = name.split("_")
            plan[Mode.BINARY if mode == "b" else Mode.WEIGHTED].append(VertexProperty(kind))
    return plan


def accuracy_trial(item) -> dict:
    cfg, x, y, k, j, trial = item
    seed = derive_seed(cfg.base_seed, k, j, trial)
    row = {"k": k, "j": j, "trial": trial, "rho": cfg.rho_grid[k],
           "omega": cfg.omega_grid[j], "seed": seed, "status": "ok"}
    try:
        res = esn.init_reservoir(esn.ReservoirParams(
            cfg.n_r, cfg.rho_grid[k], cfg.omega_grid[j], cfg.sparsity, seed))
        traj = esn.run(res, x, cfg.washout)
        readout = esn.train_readout(traj, x, y, cfg.reg)
        row["nrmse"], row["gamma"] = esn.evaluate(readout, traj, x, y)
        plan = _entropy_plan(cfg.measures)
        binary = None
        for mode, kinds in plan.items():
            need_binary = mode is Mode.BINARY and ({"IMI", "AEO"} & set(cfg.measures))
            if not kinds and not need_binary:
                continue
            m = build_multiplex(traj, mode)
            if mode is Mode.BINARY:
                binary = m
            m.properties_many(kinds)
            tag = "b" if mode is Mode.BINARY else "w"
            for kind in kinds:
                row[f"H_{kind.value}_{tag}"] = heterogeneity(m, kind, cfg.bins).h_bar
        if {"IMI", "AEO"} & set(cfg.measures):
            binary = binary or build_multiplex(traj, Mode.BINARY)
            if "IMI" in cfg.measures:
                row["IMI"] = avg_imi(binary)
            if "AEO" in cfg.measures:
                row["AEO"] = aeo(binary)
        if "lambda" in cfg.measures:
            row["lambda"] = esn.jacobian_lambda(traj, res.w_rr)
    except RECOVERABLE as exc:
        row["status"] = f"failed: {exc}"
    return row


def accuracy_columns(measures) -> list:
    return (["k", "j", "trial", "rho", "omega", "seed", "status", "gamma", "nrmse"]
            + [m for m in ACCURACY_MEASURES if m in measures])


def run_accuracy_sweep(cfg: SweepConfig) -> SweepResult:
    """Grid over ``(rho, omega_i)``: accuracy and graph measures per trial,
    trial means per cell, and the correlation of each measure's manifold
    with the accuracy manifold."""
    if TaskKind(cfg.task.kind) is TaskKind.NOISE:
        raise ValueError("the accuracy sweep needs a prediction task")
    task = replace(cfg.task, seed=cfg.task_seed)
    x, y = task_series(task, cfg.length)
    items = [(cfg, x.values, y.values, k, j, t)
             for k in range(len(cfg.rho_grid))
             for j in range(len(cfg.omega_grid))
             for t in range(cfg.trials)]
    log.info("accuracy sweep: %d runs", len(items))
    rows = _execute(accuracy_trial, items, cfg.threads)
    columns = accuracy_columns(cfg.measures)
    return summarize(rows, columns, "accuracy")


# --- memory ---------------------------------------------------------------

def _window_tag(text) -> str:
    return DelayWindow.parse(text).label.replace(":", "_")


def memory_columns(windows) -> list:
    cols = ["k", "trial", "rho", "omega", "seed", "status", "MC"]
    cols += [f"MC_{_window_tag(w)}" for w in windows]
    for w in windows:
        cols += [f"{name}_{_window_tag(w)}" for name in MEMORY_KINDS]
    return cols


def memory_trial(item) -> dict:
    cfg, x, k, trial = item
    seed = derive_seed(cfg.base_seed, k, 0, trial)
    omega = cfg.omega_grid[0]
    row = {"k": k, "trial": trial, "rho": cfg.rho_grid[k], "omega": omega,
           "seed": seed, "status": "ok"}
    try:
        res = esn.init_reservoir(esn.ReservoirParams(
            cfg.n_r, cfg.rho_grid[k], omega, cfg.sparsity, seed))
        traj = esn.run(res, x, cfg.washout)
        row["MC"] = float(esn.memory_capacity_terms_from_states(
            traj, x, cfg.lags, cfg.reg).sum())
        m = build_multiplex(traj, Mode.BINARY)
        for text in cfg.windows:
            w = DelayWindow.parse(text)
            label = _window_tag(text)
            # readouts reproducing the delayed inputs of this window only
            row[f"MC_{label}"] = float(esn.memory_capacity_terms_from_states(
                traj, x, w.lags, cfg.reg).sum())
            for kappa in Similarity:
                row[f"delta_ts_{kappa.value}_{label}"] = delta_ts(x, traj, w, kappa).value
                row[f"delta_dg_{kappa.value}_{label}"] = delta_dg(x, m, w, kappa).value
            row[f"delta_and_{label}"] = delta_and(x, m, w).value
    except RECOVERABLE as exc:
        row["status"] = f"failed: {exc}"
    return row


def run_memory_sweep(cfg: SweepConfig) -> SweepResult:
    """Sweep ``rho`` at fixed input scaling on uniform noise: memory capacity
    and the graph memory measures per trial, means per ``rho``, and the
    correlation of each measure with memory capacity across ``rho``."""
    if len(cfg.omega_grid) != 1:
        raise ValueError("the memory sweep uses a single input scaling")
    p = cfg.task.params
    x = gen_noise(cfg.length, p.get("lo", -1.0), p.get("hi", 1.0), cfg.task_seed).values
    items = [(cfg, x, k, t) for k in range(len(cfg.rho_grid)) for t in range(cfg.trials)]
    log.info("memory sweep: %d runs", len(items))
    rows = _execute(memory_trial, items, cfg.threads)
    return summarize(rows, memory_columns(cfg.windows), "memory")


# --- aggregation ----------------------------------------------------------

def manifold_correlation(a, b) -> tuple[float, float]:
    """Pearson r between two grids (flattened) and its two-sided p-value
    from the t distribution with ``n - 2`` degrees of freedom."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError("grids differ in shape")
    n = a.shape[0]
    if n < 3:
        raise UndefinedCorrelation("need at least 3 cells")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise UndefinedCorrelation("grid has missing values")
    da = a - a.mean()
    db = b - b.mean()
    na = math.sqrt(da @ da)
    nb = math.sqrt(db @ db)
    if na == 0 or nb == 0:
        raise UndefinedCorrelation("constant grid")
    r = float(np.clip((da @ db) / (na * nb), -1.0, 1.0))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return r, float(2.0 * stats.t.sf(abs(t), n - 2))


def _split_measure(name: str) -> tuple[str, str]:
    if name.startswith("H_"):
        return name[:-2], name[-1]
    if name in ("lambda", "nrmse"):
        return name, "-"
    return name, "b"  # IMI and AEO live on the binary multiplex


def _window_reference(name: str) -> str:
    # delta_dg_sc_20_15 -> MC_20_15
    a, b = name.rsplit("_", 2)[1:]
    return f"MC_{a}_{b}"


def _correlate(means, pairs, n):
    out = []
    for measure, mode, ref, name in pairs:
        try:
            r, p = manifold_correlation(means[ref], means[name])
        except UndefinedCorrelation:
            r, p = math.nan, math.nan
        out.append({"measure": measure, "mode": mode, "r": r, "p": p, "n": n})
    return out


def summarize(rows, columns, kind: str) -> SweepResult:
    """Sort raw rows, average successful trials per cell and correlate.

    Accuracy measures are correlated with ``gamma``. Each memory measure is
    correlated with the capacity over its own delay window; the correlations
    with ``MC`` over the configured lags go to ``overall_correlations``.
    """
    if kind == "accuracy":
        key = lambda r: (int(r["k"]), int(r["j"]), int(r["trial"]))
        values = columns[columns.index("gamma"):]
        cell = lambda r: (int(r["k"]), int(r["j"]))
    else:
        key = lambda r: (int(r["k"]), int(r["trial"]))
        values = columns[columns.index("MC"):]
        cell = lambda r: (int(r["k"]), 0)
    rows = sorted(rows, key=key)
    nk = max(int(r["k"]) for r in rows) + 1
    nj = max(cell(r)[1] for r in rows) + 1
    rho = np.full(nk, np.nan)
    omega = np.full(nj, np.nan)
    sums = {v: np.zeros((nk, nj)) for v in values}
    counts = np.zeros((nk, nj), dtype=int)
    for r in rows:
        k, j = cell(r)
        rho[k] = float(r["rho"])
        omega[j] = float(r["omega"])
        if r["status"] != "ok":
            warnings.warn(f"run k={k} j={j} trial={r['trial']} excluded: {r['status']}")
            continue
        counts[k, j] += 1
        for v in values:
            sums[v][k, j] += float(r.get(v, np.nan))
    if np.any(counts == 0):
        bad = np.argwhere(counts == 0)[0]
        raise SweepAborted(f"all trials failed in cell {tuple(int(i) for i in bad)}")
    means = {v: sums[v] / counts for v in values}
    n = int(nk * nj)
    overall = []
    if kind == "accuracy":
        pairs = [(*_split_measure(v), "gamma", v) for v in values[1:]]
        correlations = _correlate(means, pairs, n)
    else:
        deltas = [v for v in values if v.startswith("delta_")]
        correlations = _correlate(
            means, [(v, "b", _window_reference(v), v) for v in deltas], n)
        overall = _correlate(means, [(v, "b", "MC", v) for v in deltas], n)
    manifold = ManifoldResult(rho, omega, means, counts)
    return SweepResult(kind, list(columns), rows, manifold, correlations, overall)


def correlation_lookup(result: SweepResult, measure: str, mode: str = "b") -> float:
    for c in result.correlations:
        if c["measure"] == measure and c["mode"] == mode:
            return c["r"]
    raise KeyError((measure, mode))
