import math

import numpy as np
import pytest

from rmvg.errors import IntegrationFailure
from rmvg.signals import (Signal, TaskKind, TaskSpec, delayed, eval_poly, gen_mackey_glass,
                          gen_mso, gen_narma, narma_response, gen_noise, gen_poly, gen_sine,
                          poly_coefficients, task_series)


def test_sine_quarter_period():
    s = gen_sine(math.pi / 2, 4)
    np.testing.assert_allclose(s.values, [1, 0, -1, 0], atol=1e-15)


def test_sine_default_frequency_first_sample():
    assert gen_sine(0.2, 3).values[0] == pytest.approx(math.sin(0.2), abs=1e-15)
    assert gen_sine(0.2, 3).values[0] == pytest.approx(0.19867, abs=1e-5)


def test_sine_at_pi_is_zero():
    assert np.max(np.abs(gen_sine(math.pi, 50).values)) <= 1e-12


def test_mso_values():
    assert gen_mso(3, t0=0).values[0] == 0.0
    # independent evaluation of the three-term sum at t = 1
    want = math.sin(0.2) + math.sin(0.311) + math.sin(0.42)
    assert gen_mso(3).values[0] == pytest.approx(want, abs=1e-15)
    assert want == pytest.approx(0.9124406, abs=1e-7)
    assert np.all(np.abs(gen_mso(5000).values) <= 3)


def test_mackey_glass_pure_decay():
    s = gen_mackey_glass(alpha=0.0, beta=0.1, x0=1.2, length=11, transient=0)
    assert s.values[10] == pytest.approx(1.2 * math.exp(-1.0), rel=1e-3)
    assert s.values[10] == pytest.approx(0.44146, abs=1e-5)


def test_mackey_glass_attractor_range_and_determinism():
    a = gen_mackey_glass(length=5000)
    b = gen_mackey_glass(length=5000)
    assert np.array_equal(a.values, b.values)
    assert a.values.min() >= 0.2 and a.values.max() <= 1.5


def test_mackey_glass_blowup_raises():
    with pytest.raises(IntegrationFailure):
        gen_mackey_glass(alpha=5.0, beta=-2.0, length=200, transient=0)


def _narma_reference(x, r, squash=lambda v: v):
    # transcription of the recurrence with zero history, r + 1 output terms
    y = [0.0] * (len(x) + 1)
    for t in range(len(x)):
        s = sum(y[t - i] for i in range(r + 1) if t - i >= 0)
        xr = x[t - r] if t - r >= 0 else 0.0
        y[t + 1] = squash(0.3 * y[t] + 0.05 * y[t] * s + 1.5 * xr * x[t] + 0.1)
    return np.array(y)


def test_narma_fixed_point_with_zero_input():
    y = narma_response(np.zeros(400), 20)
    fixed = (0.7 - math.sqrt(0.49 - 0.42)) / 2.1
    assert fixed == pytest.approx(0.2073452, abs=1e-7)
    # the delayed-sum modes contract slowly: ~5e-7 off at step 200
    assert abs(y[400] - fixed) < 1e-9
    np.testing.assert_allclose(y, _narma_reference(np.zeros(400), 20), atol=1e-15)


def test_narma_literal_recurrence_diverges_on_unit_noise():
    x = np.random.default_rng(0).uniform(0, 1, 3000)
    assert narma_response(x, 20) is None
    with pytest.raises(IntegrationFailure):
        gen_narma(20, 3000, seed=4, saturate=False)


def test_narma_saturated_matches_reference_and_stays_bounded():
    x, y = gen_narma(20, 3000, seed=4)
    assert np.all(np.abs(y.values) < 1e3)
    ref = _narma_reference(x.values, 20, math.tanh)
    np.testing.assert_allclose(y.values, ref[1:], rtol=1e-12, atol=1e-12)


def test_narma_first_step_has_no_input_product():
    x, y = gen_narma(20, 50, seed=1)
    assert y.values[0] == pytest.approx(math.tanh(0.1))
    y = narma_response(x.values[:10], 20)
    # only the constant and the (zero) autoregressive terms before r steps
    assert y[1] == pytest.approx(0.1)


def test_poly_degenerate_linear():
    c = np.array([[0.3, 0.5], [0.7, 0.0]])  # c[i, j] multiplies x[t]^i x[t-d]^j
    x = np.array([0.1, -0.4, 0.9])
    y = eval_poly(x, c, 0)
    np.testing.assert_allclose(y, c[0, 0] + (c[1, 0] + c[0, 1]) * x)


def test_poly_zero_input_gives_constant():
    c = poly_coefficients(7, seed=3)
    y = eval_poly(np.zeros(30), c, 10)
    np.testing.assert_allclose(y[10:], c[0, 0])


def test_poly_six_monomials():
    c = np.zeros((3, 3))
    for i in range(3):
        for j in range(3 - i):
            c[i, j] = 1.0
    y = eval_poly(np.array([1.0, -1.0]), c, 1)
    assert y[1] == pytest.approx(2.0)


def test_poly_coefficients_shared_via_meta():
    x, y = gen_poly(7, 10, 200, seed=9)
    c = y.meta["coeffs"]
    np.testing.assert_allclose(y.values, eval_poly(x.values, c, 10))


def test_noise_reproducible_and_unbiased():
    a = gen_noise(100_000, -1, 1, seed=7)
    b = gen_noise(100_000, -1, 1, seed=7)
    assert np.array_equal(a.values, b.values)
    v = a.values
    assert abs(v.mean()) < 0.02
    assert abs(np.corrcoef(v[:-1], v[1:])[0, 1]) < 0.02
    assert v.min() >= -1 and v.max() <= 1


def test_delayed():
    x = Signal(np.array([1.0, 2.0, 3.0, 4.0]))
    assert np.array_equal(delayed(x, 0).values, x.values)
    d = delayed(x, 2)
    assert list(d.values) == [1.0, 2.0]
    assert d.meta["offset"] == 2
    assert np.array_equal(delayed(delayed(x, 1), 1).values, delayed(x, 2).values)
    assert delayed(delayed(x, 1), 1).meta == delayed(x, 2).meta


def test_signal_validation():
    with pytest.raises(ValueError):
        Signal(np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        Signal(np.zeros((2, 2)))
    s = Signal(np.arange(3.0))
    with pytest.raises(ValueError):
        s.values[0] = 5


@pytest.mark.parametrize("kind", [k for k in TaskKind])
def test_task_series_shapes_and_purity(kind):
    spec = TaskSpec.default(kind, seed=2)
    x1, y1 = task_series(spec, 300)
    x2, y2 = task_series(spec, 300)
    assert x1.length == y1.length == 300
    assert np.array_equal(x1.values, x2.values) and np.array_equal(y1.values, y2.values)


def test_self_prediction_target_is_ahead():
    spec = TaskSpec.default(TaskKind.MSO)
    x, y = task_series(spec, 100)
    tau = spec.forecast_step
    np.testing.assert_array_equal(x.values[tau:], y.values[:-tau])
