"""CSV output of sweep results.

An output directory holds ``raw.csv`` (one row per run), ``manifold.csv``
(trial means per grid cell), ``correlations.csv`` (``measure,mode,r,p,n``)
and, for memory sweeps, ``correlations_mc.csv`` with each measure
correlated against capacity over the configured lags. Floats are written
with 17 significant digits so a report can be rebuilt from ``raw.csv``
byte for byte.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .harness import SweepResult, summarize

INT_COLUMNS = ("k", "j", "trial", "seed")
CORRELATION_COLUMNS = ("measure", "mode", "r", "p", "n")


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def _write(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def write_raw(result: SweepResult, path) -> None:
    _write(Path(path), result.columns,
           ([r.get(c) for c in result.columns] for r in result.raw))


def write_manifold(result: SweepResult, path) -> None:
    m = result.manifold
    names = list(m.means)
    rows = []
    for k, rho in enumerate(m.rho):
        for j, omega in enumerate(m.omega):
            rows.append([rho, omega, int(m.counts[k, j])]
                        + [m.means[v][k, j] for v in names])
    _write(Path(path), ["rho", "omega", "count"] + names, rows)


def write_correlations(correlations, path) -> None:
    _write(Path(path), CORRELATION_COLUMNS,
           ([c[k] for k in CORRELATION_COLUMNS] for c in correlations))


def read_raw(path) -> tuple[list, list, str]:
    """Rows of a raw CSV as dicts, its column order and the sweep kind."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = []
        for rec in reader:
            row = {}
            for c, v in zip(columns, rec):
                if c == "status":
                    row[c] = v
                elif v == "":
                    continue
                elif c in INT_COLUMNS:
                    row[c] = int(v)
                else:
                    row[c] = float(v)
            rows.append(row)
    if not rows:
        raise ValueError(f"{path}: no runs")
    kind = "accuracy" if "j" in columns else "memory"
    return rows, columns, kind


def write_report(result: SweepResult, out_dir, figures: bool = True) -> list:
    """Write every CSV (and figures) for ``result``; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "raw.csv", out / "manifold.csv", out / "correlations.csv"]
    write_raw(result, paths[0])
    write_manifold(result, paths[1])
    write_correlations(result.correlations, paths[2])
    if result.kind == "memory":
        paths.append(out / "correlations_mc.csv")
        write_correlations(result.overall_correlations, paths[-1])
    if figures:
        from .plotting import render_figures
        paths += render_figures(result, out)
    return paths


def report_from_raw(raw_path, out_dir, figures: bool = True) -> list:
    """Rebuild the aggregated outputs from a raw CSV."""
    rows, columns, kind = read_raw(raw_path)
    return write_report(summarize(rows, columns, kind), out_dir, figures)
