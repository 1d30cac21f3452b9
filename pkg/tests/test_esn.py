import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rmvg import esn
from rmvg.errors import NumericFailure, UndefinedCorrelation
from rmvg.signals import gen_noise


def _reservoir(n=30, rho=0.9, omega=0.5, sparsity=0.25, seed=1):
    return esn.init_reservoir(esn.ReservoirParams(n, rho, omega, sparsity, seed))


def test_rho_rescaling_is_linear():
    a = _reservoir(20, rho=0.5, sparsity=1.0, seed=3)
    b = _reservoir(20, rho=1.0, sparsity=1.0, seed=3)
    np.testing.assert_array_equal(b.w_rr, 2 * a.w_rr)
    np.testing.assert_array_equal(a.w_ir, b.w_ir)


def test_exact_nonzero_count():
    r = _reservoir(100, sparsity=0.25, seed=0)
    assert abs(np.count_nonzero(r.w_rr) - 2500) <= 1


@pytest.mark.parametrize("seed", range(5))
def test_spectral_radius_matches_rho(seed):
    r = _reservoir(60, rho=1.1, seed=seed)
    assert abs(np.max(np.abs(np.linalg.eigvals(r.w_rr))) - 1.1) <= 1e-6 * 1.1


def _sparse_random(seed, n=80):
    rng = np.random.default_rng(seed)
    return rng.uniform(-1, 1, (n, n)) * (rng.uniform(size=(n, n)) < 0.25)


@pytest.mark.parametrize("seed", range(1, 8))
def test_power_iteration_against_dense_eig(seed):
    a = _sparse_random(seed)
    want = np.max(np.abs(np.linalg.eigvals(a)))
    assert esn.power_iteration_radius(a, seed=seed) == pytest.approx(want, rel=1e-6)


def test_power_iteration_near_tie_reports_failure():
    # two conjugate pairs with moduli 2.5345 and 2.5315: the gap needs far
    # more than the iteration budget
    a = _sparse_random(0)
    mod = np.sort(np.abs(np.linalg.eigvals(a)))[::-1]
    assert mod[2] / mod[0] > 0.998
    with pytest.raises(NumericFailure):
        esn.power_iteration_radius(a)


def test_power_iteration_complex_pair():
    # rotation by 60 degrees scaled by 0.8 plus a smaller real mode
    c, s = 0.8 * math.cos(math.pi / 3), 0.8 * math.sin(math.pi / 3)
    a = np.array([[c, -s, 0], [s, c, 0], [0, 0, 0.3]])
    assert esn.power_iteration_radius(a) == pytest.approx(0.8, rel=1e-9)


def test_power_iteration_zero_matrix():
    assert esn.power_iteration_radius(np.zeros((4, 4))) == 0.0


def test_rho_zero_reservoir_has_no_recurrence():
    r = _reservoir(20, rho=0.0)
    assert not np.any(r.w_rr)


def test_params_validation():
    with pytest.raises(ValueError):
        esn.ReservoirParams(sparsity=0.0)
    with pytest.raises(ValueError):
        esn.ReservoirParams(rho=-1.0)


def test_zero_input_keeps_zero_state():
    traj = esn.run(_reservoir(), np.zeros(50), washout=10)
    assert not np.any(traj.states)
    assert traj.h.shape == (40, 30)


def test_scalar_step():
    res = esn.Reservoir(np.zeros((1, 1)), np.ones((1, 1)))
    traj = esn.run(res, np.array([0.5]), washout=0)
    assert traj.states[0, 0] == pytest.approx(math.tanh(0.5))
    assert traj.states[0, 0] == pytest.approx(0.46212, abs=1e-5)


def test_run_matches_explicit_loop():
    res = _reservoir(10)
    x = np.random.default_rng(0).uniform(-1, 1, 40)
    h = np.zeros(10)
    want = []
    for v in x:
        h = np.tanh(res.w_rr @ h + res.w_ir[:, 0] * v)
        want.append(h)
    np.testing.assert_allclose(esn.run(res, x, 0).states, want, atol=1e-14)


@given(st.floats(0.1, 3.0), st.floats(0.1, 5.0), st.integers(0, 100))
def test_states_stay_in_open_interval(rho, omega, seed):
    res = _reservoir(15, rho=rho, omega=omega, seed=seed)
    x = np.random.default_rng(seed).uniform(-1, 1, 100)
    assert np.all(np.abs(esn.run(res, x, 0).states) < 1)


def test_zero_target_gives_zero_readout():
    res = _reservoir()
    x = np.random.default_rng(0).uniform(-1, 1, 300)
    traj = esn.run(res, x, 100)
    ro = esn.train_readout(traj, x, np.zeros(300))
    assert not np.any(ro.w_out)


def test_target_in_span_fits_exactly():
    res = _reservoir()
    x = np.random.default_rng(0).uniform(-1, 1, 300)
    traj = esn.run(res, x, 100)
    y = traj.states[:, 4]
    ro = esn.train_readout(traj, x, y, reg=0.0)
    cut = esn.split_index(200)
    fit = esn.predict(ro, traj.h[:cut], x[100 : 100 + cut])
    assert np.max(np.abs(fit - y[100 : 100 + cut])) <= 1e-8


def test_closed_form_least_squares():
    w = esn.ridge(np.array([[1.0], [2.0], [3.0]]), np.array([2.0, 4.0, 6.0]), 0.0)
    assert w[0] == pytest.approx(2.0)


def test_ridge_against_normal_equations(rng):
    a = rng.standard_normal((50, 6))
    y = rng.standard_normal(50)
    want = np.linalg.inv(a.T @ a + 0.3 * np.eye(6)) @ a.T @ y
    np.testing.assert_allclose(esn.ridge(a, y, 0.3), want, rtol=1e-10)
    np.testing.assert_allclose(esn.ridge(a, 2 * y, 0.3), 2 * esn.ridge(a, y, 0.3))


def test_singular_unregularized_raises():
    with pytest.raises(NumericFailure):
        esn.ridge(np.ones((5, 2)), np.ones(5), 0.0)


def test_nrmse_and_gamma():
    y = np.array([1.0, 3.0, 2.0, 5.0])
    assert esn.nrmse(y, y) == 0.0
    assert esn.accuracy(esn.nrmse(y, y)) == 1.0
    assert esn.nrmse(y, np.full(4, y.mean())) == pytest.approx(1.0)
    assert esn.accuracy(1.0) == 0.0
    assert esn.accuracy(1.7) == 0.0
    with pytest.raises(UndefinedCorrelation):
        esn.nrmse(np.ones(3), np.zeros(3))


def test_evaluate_on_learnable_task():
    res = _reservoir(50, rho=0.8)
    x = gen_noise(1200, seed=5).values
    y = np.concatenate([[0.0], x[:-1]])  # one-step memory
    traj = esn.run(res, x)
    e, g = esn.evaluate(esn.train_readout(traj, x, y), traj, x, y)
    assert 0 <= e < 0.3 and g == pytest.approx(1 - e)


def test_memory_capacity_terms_bounded():
    res = _reservoir(40, rho=0.9, omega=0.7)
    terms = esn.memory_capacity_terms(res, gen_noise(1500, seed=2), range(1, 41))
    assert np.all((terms >= 0) & (terms <= 1))
    assert terms.sum() <= 40


def test_squared_correlation_affine_invariant(rng):
    a = rng.standard_normal(100)
    b = a + rng.standard_normal(100)
    assert esn.squared_correlation(a, b) == pytest.approx(esn.squared_correlation(3 * a - 2, b))
    assert esn.squared_correlation(np.ones(5), rng.standard_normal(5)) == 0.0


def test_shift_register_memory():
    noise = gen_noise(2600, seed=1)
    terms = esn.memory_capacity_terms(esn.shift_register(10), noise, range(1, 41))
    assert np.all(terms[:10] > 0.99)
    assert np.all(terms[10:] < 0.05)
    assert abs(terms.sum() - 10) < 0.1


def test_memoryless_reservoir():
    res = _reservoir(100, rho=0.0, omega=0.7)
    terms = esn.memory_capacity_terms(res, gen_noise(2600, seed=1), range(1, 41))
    assert np.all(terms[1:] < 0.02)
    assert terms.sum() < 1.5


def test_lambda_zero_trajectory_is_smallest_singular_value():
    res = _reservoir(40)
    want = np.linalg.svd(res.w_rr, compute_uv=False)[-1]
    assert esn.jacobian_lambda(np.zeros((300, 40)), res.w_rr) == pytest.approx(want, abs=1e-12)


def test_lambda_diagonal():
    w = np.diag([0.5, 0.25])
    assert esn.jacobian_lambda(np.zeros((3, 2)), w) == pytest.approx(0.25)
    # only the second unit saturates: min(0.5, 0.25 (1 - h^2))
    prev = np.inf
    for h2 in [0.0, 0.2, 0.5, 0.9]:
        h = np.array([[0.0, math.sqrt(h2)]] * 4)
        lam = esn.jacobian_lambda(h, w)
        assert lam == pytest.approx(0.25 * (1 - h2))
        assert lam < prev
        prev = lam


def test_lambda_matches_per_step_svd(rng):
    res = _reservoir(12)
    h = np.tanh(rng.standard_normal((37, 12)))
    want = np.mean([np.linalg.svd(np.diag(1 - r ** 2) @ res.w_rr, compute_uv=False)[-1]
                    for r in h])
    assert esn.jacobian_lambda(h, res.w_rr, chunk=5) == pytest.approx(want, rel=1e-12)
