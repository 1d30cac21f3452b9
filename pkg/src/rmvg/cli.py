"""Command line entry point: ``rmvg <command> [options]``.

Commands: ``generate``, ``hvg``, ``sweep-accuracy``, ``sweep-memory`` and
``report``. Each command also accepts ``--config FILE.toml`` whose keys
mirror the long flags (``rho-steps`` or ``rho_steps``); flags given on the
command line take precedence.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import harness, report
from .hvg import Mode, build_hvg, write_edges
from .signals import DEFAULT_LENGTH, TaskKind, TaskSpec, task_series

TASK_PARAMS = {
    "psi": float, "tau": int, "alpha": float, "beta": float, "x0": float,
    "step": float, "forecast_step": int, "r": int, "p": int, "d": int,
    "lo": float, "hi": float,
}


def _lags(text: str) -> tuple:
    if ":" in text:
        a, b = text.split(":")
        return tuple(range(int(a), int(b) + 1))
    return tuple(int(v) for v in text.split(","))


def _windows(text: str) -> tuple:
    return tuple(w.strip() for w in text.split(",") if w.strip())


def _measures(text: str) -> tuple:
    names = tuple(m.strip() for m in text.split(",") if m.strip())
    unknown = set(names) - set(harness.ACCURACY_MEASURES)
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown measures: {sorted(unknown)}")
    return names


def _add_common(p):
    p.add_argument("--config", help="TOML file with default values for any flag")


def _add_sweep_common(p, seed_help="base seed"):
    p.add_argument("--trials", type=int)
    p.add_argument("--nr", type=int, default=100)
    p.add_argument("--sparsity", type=float, default=0.25)
    p.add_argument("--reg", type=float, default=harness.esn.RIDGE)
    p.add_argument("--length", type=int, default=DEFAULT_LENGTH,
                   help="input length including washout")
    p.add_argument("--washout", type=int, default=harness.esn.WASHOUT)
    p.add_argument("--seed", type=int, default=0, help=seed_help)
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (default: all cores, capped by RMVG_THREADS)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--full-scale", action="store_true")
    p.add_argument("--no-figures", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmvg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a task signal as CSV")
    _add_common(p)
    p.add_argument("--task", required=True, choices=[k.value for k in TaskKind])
    p.add_argument("--length", type=int, default=DEFAULT_LENGTH)
    p.add_argument("--seed", type=int, default=0)
    for name, typ in TASK_PARAMS.items():
        p.add_argument("--" + name.replace("_", "-"), type=typ, dest=name)
    p.add_argument("--no-saturate", dest="saturate", action="store_false", default=None,
                   help="NARMA: literal recurrence without tanh")
    p.add_argument("--out", required=True)

    p = sub.add_parser("hvg", help="visibility graph of one CSV column")
    _add_common(p)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--mode", choices=[m.value for m in Mode], default="binary")
    p.add_argument("--column", default="input")
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep-accuracy", help="(rho, omega_i) grid against accuracy")
    _add_common(p)
    p.add_argument("--task", required=True,
                   choices=[k.value for k in TaskKind if k is not TaskKind.NOISE])
    p.add_argument("--rho-min", type=float, default=0.5)
    p.add_argument("--rho-max", type=float, default=1.3)
    p.add_argument("--rho-steps", type=int)
    p.add_argument("--omega-min", type=float, default=0.2)
    p.add_argument("--omega-max", type=float, default=0.9)
    p.add_argument("--omega-steps", type=int)
    p.add_argument("--bins", type=int, default=harness.BINS)
    p.add_argument("--measures", type=_measures, default=tuple(harness.ACCURACY_MEASURES),
                   help="comma separated subset, e.g. H_CL_b,AEO,lambda")
    _add_sweep_common(p)

    p = sub.add_parser("sweep-memory", help="rho sweep against memory capacity")
    _add_common(p)
    p.add_argument("--rho-min", type=float, default=0.1)
    p.add_argument("--rho-max", type=float, default=2.0)
    p.add_argument("--rho-steps", type=int)
    p.add_argument("--omega", type=float, default=0.7)
    p.add_argument("--windows", type=_windows, default=harness.DEFAULT_WINDOWS)
    p.add_argument("--lags", type=_lags, default=tuple(range(1, 41)),
                   help="a:b (inclusive) or a comma list")
    _add_sweep_common(p)

    p = sub.add_parser("report", help="rebuild aggregates and figures from raw.csv")
    _add_common(p)
    p.add_argument("--raw", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-figures", action="store_true")
    return parser


def _apply_config(parser, sub, argv):
    """Use ``--config`` values as defaults of the chosen subcommand."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    with open(known.config, "rb") as fh:
        conf = tomllib.load(fh)
    actions = {a.dest: a for a in sub._actions}
    by_flag = {s.lstrip("-").replace("-", "_"): a.dest
               for a in sub._actions for s in a.option_strings if s.startswith("--")}
    defaults = {}
    for key, value in conf.items():
        dest = by_flag.get(key.replace("-", "_"))
        if dest is None or dest == "config":
            parser.error(f"{known.config}: unknown key {key!r}")
        action = actions[dest]
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        if action.type is not None and not isinstance(value, bool):
            value = action.type(value)
        defaults[dest] = value
    # a required flag supplied by the config is no longer required
    for dest in defaults:
        actions[dest].required = False
    sub.set_defaults(**defaults)


def _scale(args, desk, full, name):
    v = getattr(args, name)
    if v is not None:
        return v
    return (full if args.full_scale else desk)[name]


def cmd_generate(args):
    overrides = {k: getattr(args, k) for k in (*TASK_PARAMS, "saturate")
                 if getattr(args, k) is not None}
    spec = TaskSpec.default(args.task, args.seed, **overrides)
    x, y = task_series(spec, args.length)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        has_target = TaskKind(args.task) is not TaskKind.NOISE
        w.writerow(["t", "input", "target"] if has_target else ["t", "input"])
        for t in range(x.length):
            rec = [t + 1, report.fmt(x.values[t])]
            if has_target:
                rec.append(report.fmt(y.values[t]))
            w.writerow(rec)


def cmd_hvg(args):
    with open(args.inp, newline="") as fh:
        reader = csv.DictReader(fh)
        if args.column not in (reader.fieldnames or []):
            raise SystemExit(f"{args.inp}: no column {args.column!r}")
        values = np.array([float(r[args.column]) for r in reader])
    write_edges(build_hvg(values, args.mode), args.out)


def cmd_sweep_accuracy(args):
    scale = dict(harness.DESK_SCALE)
    rho_steps = _scale(args, scale, harness.FULL_SCALE, "rho_steps")
    omega_steps = _scale(args, scale, harness.FULL_SCALE, "omega_steps")
    trials = _scale(args, scale, harness.FULL_SCALE, "trials")
    cfg = harness.SweepConfig(
        task=TaskSpec.default(args.task),
        rho_grid=tuple(harness.grid(args.rho_min, args.rho_max, rho_steps)),
        omega_grid=tuple(harness.grid(args.omega_min, args.omega_max, omega_steps)),
        trials=trials, n_r=args.nr, sparsity=args.sparsity, reg=args.reg,
        washout=args.washout, bins=args.bins, length=args.length,
        measures=tuple(args.measures), base_seed=args.seed, threads=args.threads)
    result = harness.run_accuracy_sweep(cfg)
    return report.write_report(result, args.out, figures=not args.no_figures)


def cmd_sweep_memory(args):
    rho_steps = _scale(args, harness.MEMORY_DESK_SCALE, harness.MEMORY_FULL_SCALE, "rho_steps")
    trials = _scale(args, harness.MEMORY_DESK_SCALE, harness.MEMORY_FULL_SCALE, "trials")
    cfg = harness.SweepConfig(
        task=TaskSpec.default(TaskKind.NOISE),
        rho_grid=tuple(harness.grid(args.rho_min, args.rho_max, rho_steps)),
        omega_grid=(args.omega,), trials=trials, n_r=args.nr,
        sparsity=args.sparsity, reg=args.reg, washout=args.washout,
        length=args.length, base_seed=args.seed, lags=tuple(args.lags),
        windows=tuple(args.windows), threads=args.threads)
    result = harness.run_memory_sweep(cfg)
    return report.write_report(result, args.out, figures=not args.no_figures)


def cmd_report(args):
    return report.report_from_raw(args.raw, args.out, figures=not args.no_figures)


COMMANDS = {
    "generate": cmd_generate,
    "hvg": cmd_hvg,
    "sweep-accuracy": cmd_sweep_accuracy,
    "sweep-memory": cmd_sweep_memory,
    "report": cmd_report,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    subparsers = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if a in subparsers), None)
    if command is not None:
        _apply_config(parser, subparsers[command], argv)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        paths = COMMANDS[args.command](args)
    except (harness.SweepAborted, ValueError, OSError) as exc:
        print(f"rmvg: error: {exc}", file=sys.stderr)
        return 1
    for path in paths or []:
        logging.getLogger(__name__).info("wrote %s", path)
    return 0
