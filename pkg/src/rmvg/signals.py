"""Benchmark input/target generators for the accuracy and memory experiments.

All generators are pure functions of their arguments and seed. Time indices
follow the 1-based convention ``t = 1..length`` unless stated otherwise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import IntegrationFailure

# 100 washout + 1500 train + 1000 test
DEFAULT_LENGTH = 2600

MAX_REGEN_ATTEMPTS = 10


class TaskKind(str, enum.Enum):
    SIN = "sin"
    MG = "mg"
    MSO = "mso"
    NARMA = "narma"
    POLY = "poly"
    NOISE = "noise"


@dataclass(frozen=True)
class Signal:
    """A finite univariate series sampled at unit time steps."""

    values: np.ndarray
    forecast_step: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("signal values must be one-dimensional")
        if not np.all(np.isfinite(v)):
            raise ValueError("signal values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def length(self) -> int:
        return self.values.shape[0]

    def __len__(self) -> int:
        return self.length


@dataclass(frozen=True)
class TaskSpec:
    kind: TaskKind
    forecast_step: int
    params: dict = field(default_factory=dict)
    seed: int = 0

    @classmethod
    def default(cls, kind, seed: int = 0, **overrides) -> "TaskSpec":
        kind = TaskKind(kind)
        params = dict(DEFAULT_PARAMS[kind])
        params.update(overrides)
        if kind is TaskKind.SIN:
            tau_f = int(round(2 * np.pi / params["psi"]))
        elif kind is TaskKind.POLY:
            tau_f = int(params["d"])
        else:
            tau_f = int(params.get("forecast_step", 0))
        return cls(kind, tau_f, params, seed)


DEFAULT_PARAMS = {
    TaskKind.SIN: {"psi": 0.2},
    TaskKind.MG: {"tau": 17, "alpha": 0.2, "beta": 0.1, "x0": 1.2, "step": 0.1,
                  "forecast_step": 6},
    TaskKind.MSO: {"forecast_step": 16},
    TaskKind.NARMA: {"r": 20, "forecast_step": 15, "saturate": True},
    TaskKind.POLY: {"p": 7, "d": 10},
    TaskKind.NOISE: {"lo": -1.0, "hi": 1.0},
}


def _check_length(length):
    if int(length) != length or length <= 0:
        raise ValueError(f"length must be a positive integer, got {length!r}")
    return int(length)


def gen_sine(psi: float, length: int, t0: int = 1) -> Signal:
    """``sin(psi * t)`` for ``t = t0 .. t0 + length - 1``."""
    length = _check_length(length)
    if not psi > 0:
        raise ValueError("psi must be positive")
    t = np.arange(t0, t0 + length, dtype=float)
    return Signal(np.sin(psi * t), forecast_step=int(round(2 * np.pi / psi)))


def gen_mso(length: int, t0: int = 1) -> Signal:
    length = _check_length(length)
    t = np.arange(t0, t0 + length, dtype=float)
    y = np.sin(0.2 * t) + np.sin(0.311 * t) + np.sin(0.42 * t)
    return Signal(y, forecast_step=16)


def gen_mackey_glass(tau: int = 17, alpha: float = 0.2, beta: float = 0.1,
                     x0: float = 1.2, step: float = 0.1, length: int = DEFAULT_LENGTH,
                     transient: int = 1000) -> Signal:
    """Integrate the Mackey-Glass delay equation with RK4.

    The history before ``t = 0`` is held constant at ``x0``. The delayed term
    is read from the stored trajectory at integer step offsets; the RK4
    half-step stages use the mean of the two neighbouring stored values.

    Returns ``x(transient + k)`` for ``k = 0 .. length - 1``.
    """
    length = _check_length(length)
    if not step > 0:
        raise ValueError("step must be positive")
    lag_steps = tau / step
    if abs(lag_steps - round(lag_steps)) > 1e-9:
        raise ValueError("tau / step must be an integer")
    lag = int(round(lag_steps))
    sub = int(round(1.0 / step))
    n_steps = (transient + length - 1) * sub

    def rhs(x, xd):
        return alpha * xd / (1.0 + xd ** 10) - beta * x

    # history[k] is x at step k - lag; the first lag + 1 entries are the constant past
    hist = np.empty(n_steps + lag + 1)
    hist[: lag + 1] = x0
    x = x0
    for n in range(n_steps):
        xd0 = hist[n]
        xd1 = hist[n + 1]
        xdm = 0.5 * (xd0 + xd1)
        k1 = rhs(x, xd0)
        k2 = rhs(x + 0.5 * step * k1, xdm)
        k3 = rhs(x + 0.5 * step * k2, xdm)
        k4 = rhs(x + step * k3, xd1)
        x = x + step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not abs(x) <= 1e6:
            raise IntegrationFailure(f"Mackey-Glass trajectory diverged at step {n}")
        hist[n + lag + 1] = x
    samples = hist[lag + transient * sub :: sub]
    return Signal(samples[:length], forecast_step=6)


def narma_response(x: np.ndarray, r: int, saturate: bool = False) -> Optional[np.ndarray]:
    """Output ``y[0..n]`` of the order-``r`` NARMA system driven by ``x`` from
    zero history, or None once ``|y|`` exceeds 1e3. With ``saturate`` the
    update is passed through tanh."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    y = np.zeros(n + 1)
    for t in range(n):
        window = y[max(0, t - r) : t + 1].sum()
        x_lag = x[t - r] if t >= r else 0.0
        v = 0.3 * y[t] + 0.05 * y[t] * window + 1.5 * x_lag * x[t] + 0.1
        y[t + 1] = np.tanh(v) if saturate else v
        if not abs(y[t + 1]) <= 1e3:
            return None
    return y


def gen_narma(r: int = 20, length: int = DEFAULT_LENGTH, seed: int = 0,
              saturate: bool = True):
    """NARMA system of order ``r`` driven by uniform noise on [0, 1].

    Returns ``(input, target)`` where ``target[t] = y[t + 1]``, the output the
    readout must produce after seeing ``input[t]``. Divergent draws are
    regenerated from a derived sub-seed. The unsaturated order-20 system
    has no fixed point for this input range and diverges on practically
    every draw, hence ``saturate`` defaults to True.
    """
    length = _check_length(length)
    if r < 1 or length <= r:
        raise ValueError("need r >= 1 and length > r")
    ss = np.random.SeedSequence(seed)
    for attempt, child in enumerate(ss.spawn(MAX_REGEN_ATTEMPTS)):
        rng = np.random.default_rng(seed if attempt == 0 else child)
        x = rng.uniform(0.0, 1.0, size=length)
        y = narma_response(x, r, saturate)
        if y is not None:
            meta = {"attempts": attempt + 1, "saturate": saturate}
            return Signal(x), Signal(y[1:], forecast_step=15, meta=meta)
    raise IntegrationFailure(f"NARMA-{r} diverged on {MAX_REGEN_ATTEMPTS} draws")


def poly_coefficients(p: int, seed: int) -> np.ndarray:
    """Upper-left triangle (``i + j <= p``) of uniform [0, 1] coefficients."""
    rng = np.random.default_rng([seed, 0x9017])
    c = rng.uniform(0.0, 1.0, size=(p + 1, p + 1))
    i, j = np.indices(c.shape)
    c[i + j > p] = 0.0
    return c


def eval_poly(x: np.ndarray, coeffs: np.ndarray, d: int) -> np.ndarray:
    """``sum c[i, j] x[t]**i x[t-d]**j`` with zero history before the start."""
    x = np.asarray(x, dtype=float)
    xd = np.zeros_like(x)
    if d == 0:
        xd[:] = x
    else:
        xd[d:] = x[:-d]
    p = coeffs.shape[0] - 1
    pow_x = np.vstack([x ** i for i in range(p + 1)])
    pow_d = np.vstack([xd ** j for j in range(p + 1)])
    return np.einsum("ij,it,jt->t", coeffs, pow_x, pow_d)


def gen_poly(p: int = 7, d: int = 10, length: int = DEFAULT_LENGTH, seed: int = 0,
             coeffs: Optional[np.ndarray] = None):
    """Polynomial task on uniform [-1, 1] input.

    ``coeffs`` fixes the target function; when omitted it is drawn from
    ``seed`` and returned in ``target.meta["coeffs"]``.
    """
    length = _check_length(length)
    if p < 1 or d < 0 or length <= d:
        raise ValueError("need p >= 1, d >= 0 and length > d")
    if coeffs is None:
        coeffs = poly_coefficients(p, seed)
    coeffs = np.asarray(coeffs, dtype=float)
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=length)
    y = eval_poly(x, coeffs, d)
    return Signal(x), Signal(y, forecast_step=d, meta={"coeffs": coeffs})


def gen_noise(length: int, lo: float = -1.0, hi: float = 1.0, seed: int = 0) -> Signal:
    length = _check_length(length)
    if not lo < hi:
        raise ValueError("need lo < hi")
    rng = np.random.default_rng(seed)
    return Signal(rng.uniform(lo, hi, size=length))


def delayed(x: Signal, tau: int) -> Signal:
    """Shift ``x`` by ``tau`` steps: output element ``k`` is ``x[k]`` and is
    aligned with original position ``k + tau``. Length shrinks by ``tau``."""
    if not 0 <= tau < x.length:
        raise ValueError(f"delay {tau} out of range for length {x.length}")
    meta = dict(x.meta)
    meta["offset"] = meta.get("offset", 0) + tau
    return Signal(x.values[: x.length - tau], x.forecast_step, meta)


def task_series(spec: TaskSpec, length: int = DEFAULT_LENGTH):
    """Input and aligned readout target, both of ``length`` samples.

    For the self-prediction tasks (SIN, MG, MSO) the target is the input
    ``forecast_step`` samples ahead. For NARMA and POLY the target is the
    system output at the same step.
    """
    kind = TaskKind(spec.kind)
    p = spec.params
    tau_f = spec.forecast_step
    if kind is TaskKind.SIN:
        s = gen_sine(p["psi"], length + tau_f).values
    elif kind is TaskKind.MSO:
        s = gen_mso(length + tau_f).values
    elif kind is TaskKind.MG:
        s = gen_mackey_glass(p["tau"], p["alpha"], p["beta"], p["x0"], p["step"],
                             length + tau_f).values
    elif kind is TaskKind.NARMA:
        x, y = gen_narma(p["r"], length, spec.seed, p.get("saturate", True))
        return x, y
    elif kind is TaskKind.POLY:
        return gen_poly(p["p"], p["d"], length, spec.seed, p.get("coeffs"))
    elif kind is TaskKind.NOISE:
        x = gen_noise(length, p["lo"], p["hi"], spec.seed)
        return x, x
    else:  # pragma: no cover
        raise ValueError(kind)
    return Signal(s[:length]), Signal(s[tau_f : tau_f + length], forecast_step=tau_f)
