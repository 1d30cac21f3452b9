"""Echo state network: reservoir construction, state updates, ridge readout,
prediction accuracy, memory capacity and the Jacobian singular-value baseline.

Single input, single output, tanh neurons, identity readout and no output
feedback.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericFailure, UndefinedCorrelation

DENSE_RADIUS_MAX_N = 200
MAX_INIT_ATTEMPTS = 10
WASHOUT = 100
TRAIN_FRACTION = 0.6
RIDGE = 0.05


@dataclass(frozen=True)
class ReservoirParams:
    n_r: int = 100
    rho: float = 0.9
    omega_i: float = 0.5
    sparsity: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.n_r < 1:
            raise ValueError("n_r must be >= 1")
        if not 0 < self.sparsity <= 1:
            raise ValueError("sparsity must lie in (0, 1]")
        if not self.rho >= 0 or not self.omega_i >= 0:
            raise ValueError("rho and omega_i must be non-negative")


@dataclass(frozen=True, eq=False)
class Reservoir:
    w_rr: np.ndarray  # (n_r, n_r)
    w_ir: np.ndarray  # (n_r, 1)

    @property
    def n_r(self) -> int:
        return self.w_rr.shape[0]


@dataclass(frozen=True, eq=False)
class StateTrajectory:
    """All states ``h[1..t_max]``; rows before ``washout`` are transient."""

    states: np.ndarray  # (t_max, n_r)
    washout: int = 0

    @property
    def h(self) -> np.ndarray:
        """Post-washout states."""
        return self.states[self.washout:]


@dataclass(frozen=True, eq=False)
class Readout:
    w_out: np.ndarray  # (n_r + 2, n_targets): state rows, then input, then bias
    reg: float


def power_iteration_radius(a: np.ndarray, tol: float = 1e-9, max_iter: int = 10_000,
                           seed: int = 0) -> float:
    """Spectral radius by power iteration.

    A real dominant eigenvalue is detected from the Rayleigh residual. For a
    dominant complex pair the iterates settle in a 2-d invariant subspace, so
    ``A^2 v = p A v + q v`` and the radius is the larger root modulus of
    ``z**2 - p z - q``.
    """
    v = np.random.default_rng(seed).standard_normal(a.shape[0])
    v /= np.linalg.norm(v)
    prev = np.inf
    for _ in range(max_iter):
        w1 = a @ v
        n1 = np.linalg.norm(w1)
        if n1 == 0.0:
            return 0.0
        mu = v @ w1
        if np.linalg.norm(w1 - mu * v) <= tol * n1:
            return float(abs(mu))
        w2 = a @ w1
        basis = np.column_stack([w1, v])
        (p, q), *_ = np.linalg.lstsq(basis, w2, rcond=None)
        resid = np.linalg.norm(basis @ np.array([p, q]) - w2)
        est = float(np.max(np.abs(np.roots([1.0, -p, -q]))))
        if resid <= tol * np.linalg.norm(w2) and abs(est - prev) <= tol * est:
            return est
        prev = est
        v = w1 / n1
    raise NumericFailure("power iteration did not converge")


def spectral_radius(a: np.ndarray) -> float:
    if a.shape[0] <= DENSE_RADIUS_MAX_N:
        return float(np.max(np.abs(np.linalg.eigvals(a))))
    return power_iteration_radius(a)


def init_reservoir(params: ReservoirParams) -> Reservoir:
    """Random sparse reservoir rescaled to spectral radius ``rho``.

    Exactly ``round(sparsity * n_r**2)`` recurrent weights are non-zero, drawn
    uniformly on [-1, 1]. Input weights are uniform on [-1, 1] times
    ``omega_i``. The recurrent draw does not depend on ``rho`` or ``omega_i``.
    """
    n = params.n_r
    nnz = int(round(params.sparsity * n * n))
    ss = np.random.SeedSequence(params.seed)
    for attempt, child in enumerate(ss.spawn(MAX_INIT_ATTEMPTS)):
        rng = np.random.default_rng(params.seed if attempt == 0 else child)
        w = np.zeros(n * n)
        pos = rng.choice(n * n, size=nnz, replace=False)
        w[pos] = rng.uniform(-1.0, 1.0, size=nnz)
        w = w.reshape(n, n)
        radius = spectral_radius(w)
        if radius > 0:
            break
    else:
        raise NumericFailure("could not draw a reservoir with non-zero spectral radius")
    w_ir = rng.uniform(-1.0, 1.0, size=(n, 1)) * params.omega_i
    return Reservoir(w * (params.rho / radius), w_ir)


def run(res: Reservoir, x, washout: int = WASHOUT) -> StateTrajectory:
    """Drive the reservoir from ``h[0] = 0``:
    ``h[t] = tanh(W_rr h[t-1] + W_ir x[t])``."""
    x = np.asarray(getattr(x, "values", x), dtype=float)
    if not 0 <= washout < x.shape[0]:
        raise ValueError("washout must be shorter than the input")
    drive = np.outer(x, res.w_ir[:, 0])
    w_t = res.w_rr.T.copy()
    states = np.empty((x.shape[0], res.n_r))
    h = np.zeros(res.n_r)
    for t in range(x.shape[0]):
        h = np.tanh(h @ w_t + drive[t])
        states[t] = h
    if not np.all(np.isfinite(states)):
        raise NumericFailure("non-finite reservoir state")
    return StateTrajectory(states, washout)


def design_matrix(states: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Readout regressors ``[h[t], x[t], 1]`` row by row."""
    return np.column_stack([states, x, np.ones(x.shape[0])])


def split_index(n: int, train_fraction: float = TRAIN_FRACTION) -> int:
    return int(round(n * train_fraction))


def _post(traj: StateTrajectory, seq) -> np.ndarray:
    seq = np.asarray(getattr(seq, "values", seq), dtype=float)
    if seq.shape[0] == traj.states.shape[0]:
        seq = seq[traj.washout:]
    if seq.shape[0] != traj.h.shape[0]:
        raise ValueError("sequence is not aligned with the trajectory")
    return seq


def ridge(xmat: np.ndarray, y: np.ndarray, reg: float) -> np.ndarray:
    """Ridge solution of ``xmat @ w ~ y`` (``y`` may have several columns)."""
    if reg < 0:
        raise ValueError("reg must be non-negative")
    gram = xmat.T @ xmat
    gram[np.diag_indices_from(gram)] += reg
    try:
        if reg == 0 and np.linalg.matrix_rank(gram) < gram.shape[0]:
            raise np.linalg.LinAlgError("singular")
        w = np.linalg.solve(gram, xmat.T @ y)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure("singular normal equations") from exc
    if not np.all(np.isfinite(w)):
        raise NumericFailure("non-finite readout weights")
    return w


def train_readout(traj: StateTrajectory, x, y_target, reg: float = RIDGE,
                  train_fraction: float = TRAIN_FRACTION) -> Readout:
    """Fit the readout on the first ``train_fraction`` of post-washout steps.

    ``x`` and ``y_target`` may be full length (washout rows are dropped) or
    already aligned with the post-washout states.
    """
    xs = _post(traj, x)
    ys = _post(traj, y_target)
    cut = split_index(xs.shape[0], train_fraction)
    a = design_matrix(traj.h[:cut], xs[:cut])
    w = ridge(a, ys[:cut].reshape(cut, -1), reg)
    return Readout(w, reg)


def predict(readout: Readout, states: np.ndarray, x: np.ndarray) -> np.ndarray:
    y = design_matrix(states, x) @ readout.w_out
    return y[:, 0] if y.shape[1] == 1 else y


def nrmse(y: np.ndarray, y_hat: np.ndarray) -> float:
    """Root of mean squared error over the target variance."""
    y = np.asarray(y, dtype=float)
    var = np.mean((y - y.mean()) ** 2)
    if var == 0:
        raise UndefinedCorrelation("NRMSE undefined for a constant target")
    return float(np.sqrt(np.mean((y - y_hat) ** 2) / var))


def accuracy(nrmse_value: float) -> float:
    return max(1.0 - nrmse_value, 0.0)


def evaluate(readout: Readout, traj: StateTrajectory, x, y_target,
             train_fraction: float = TRAIN_FRACTION) -> tuple[float, float]:
    """``(nrmse, gamma)`` on the held-out tail of the post-washout steps."""
    xs = _post(traj, x)
    ys = _post(traj, y_target)
    cut = split_index(xs.shape[0], train_fraction)
    e = nrmse(ys[cut:], predict(readout, traj.h[cut:], xs[cut:]))
    return e, accuracy(e)


def lagged_targets(x: np.ndarray, lags, start: int) -> np.ndarray:
    """Column ``k`` holds ``x[t - lags[k]]`` for ``t = start .. len(x) - 1``."""
    return np.column_stack([x[start - lag : x.shape[0] - lag] for lag in lags])


def squared_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """``cov(a, b)**2 / (var a var b)``, 0 when either side is constant,
    clamped to [0, 1]."""
    da = a - a.mean()
    db = b - b.mean()
    va = da @ da
    vb = db @ db
    if va == 0 or vb == 0:
        return 0.0
    return float(min(max((da @ db) ** 2 / (va * vb), 0.0), 1.0))


def memory_capacity_terms(res: Reservoir, noise, lags=range(1, 41), reg: float = RIDGE,
                          washout: int = WASHOUT,
                          train_fraction: float = TRAIN_FRACTION) -> np.ndarray:
    """Per-lag squared correlation between each delayed input and the output
    of a readout trained to reproduce it."""
    traj = run(res, noise, washout)
    return memory_capacity_terms_from_states(traj, noise, lags, reg, train_fraction)


def memory_capacity_terms_from_states(traj: StateTrajectory, noise, lags=range(1, 41),
                                      reg: float = RIDGE,
                                      train_fraction: float = TRAIN_FRACTION) -> np.ndarray:
    x = np.asarray(getattr(noise, "values", noise), dtype=float)
    lags = [int(lag) for lag in lags]
    if min(lags) < 0:
        raise ValueError("lags must be non-negative")
    start = max(traj.washout, max(lags))
    if start >= x.shape[0] - 2:
        raise ValueError("largest lag leaves no usable samples")
    states = traj.states[start:]
    xs = x[start:]
    targets = lagged_targets(x, lags, start)
    cut = split_index(xs.shape[0], train_fraction)
    # one ridge solve with many right-hand sides == independent readouts
    w = ridge(design_matrix(states[:cut], xs[:cut]), targets[:cut], reg)
    out = design_matrix(states[cut:], xs[cut:]) @ w
    return np.array([squared_correlation(targets[cut:, k], out[:, k])
                     for k in range(len(lags))])


def memory_capacity(res: Reservoir, noise, lags=range(1, 41), reg: float = RIDGE,
                    washout: int = WASHOUT) -> float:
    return float(memory_capacity_terms(res, noise, lags, reg, washout).sum())


def jacobian_lambda(traj, w_rr: np.ndarray, chunk: int = 256) -> float:
    """Time average of the smallest singular value of
    ``diag(1 - h[t]**2) @ W_rr`` over the post-washout states."""
    h = traj.h if isinstance(traj, StateTrajectory) else np.asarray(traj, dtype=float)
    if h.shape[0] == 0:
        raise ValueError("no states")
    total = 0.0
    for lo in range(0, h.shape[0], chunk):
        gain = 1.0 - h[lo : lo + chunk] ** 2
        jac = gain[:, :, None] * w_rr[None, :, :]
        sv = np.linalg.svd(jac, compute_uv=False)
        total += sv[:, -1].sum()
    return float(total / h.shape[0])


def shift_register(m: int, omega_i: float = 0.01) -> Reservoir:
    """Delay-line reservoir of ``m + 1`` neurons: the first neuron receives
    the input and each subsequent neuron copies its predecessor, so the state
    holds ``x[t], x[t-1], .., x[t-m]`` (nearly linearly for small
    ``omega_i``)."""
    n = m + 1
    w = np.zeros((n, n))
    w[np.arange(1, n), np.arange(n - 1)] = 1.0
    w_ir = np.zeros((n, 1))
    w_ir[0, 0] = omega_i
    return Reservoir(w, w_ir)
