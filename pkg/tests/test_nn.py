import numpy as np
import pytest

from npi_workbench.errors import ConfigurationError, TrainingError
from npi_workbench.nn.adam import AdamState, adam_step, clip_global_norm
from npi_workbench.nn.gradcheck import grad_check
from npi_workbench.nn.layers import init_affine, init_mlp2, mlp2_backward, mlp2_forward
from npi_workbench.nn.losses import sigmoid_bce, softmax, softmax_xent
from npi_workbench.nn.lstm import (LstmState, init_lstm_stack, lstm_stack_backward, lstm_stack_forward,
                                   zero_state_grads)
from npi_workbench.nn.params import ParamStore


def test_softmax_xent_gradient_sums_to_zero():
    loss, grad = softmax_xent(np.array([1.0, 2.0, 3.0]), 2)
    assert loss == pytest.approx(-np.log(softmax(np.array([1.0, 2.0, 3.0]))[2]))
    assert grad.sum() == pytest.approx(0.0)
    assert grad[2] < 0


def test_softmax_xent_rejects_bad_target():
    with pytest.raises(ConfigurationError):
        softmax_xent(np.zeros(3), 3)


def test_sigmoid_bce_is_finite_for_large_logits():
    for logit in (-1000.0, 1000.0):
        for target in (0, 1):
            loss, grad = sigmoid_bce(logit, target)
            assert np.isfinite(loss) and np.isfinite(grad)
    assert sigmoid_bce(1000.0, 1)[0] == pytest.approx(0.0)


def test_mlp2_gradients(rng):
    params = ParamStore()
    init_mlp2(params, "mlp", 5, 7, 3, rng)
    x = rng.normal(size=5)
    target = rng.normal(size=3)

    def loss_fn(p: ParamStore):
        grads = p.zeros_like()
        y, cache = mlp2_forward(x, p, "mlp")
        mlp2_backward(y - target, cache, p, grads, "mlp")
        return 0.5 * float(np.sum((y - target) ** 2)), grads

    assert grad_check(loss_fn, params, rng=rng) < 1e-5


def test_grad_check_is_exact_on_a_linear_loss(rng):
    params = ParamStore({"w": rng.normal(size=(4, 3)), "b": rng.normal(size=3)})
    slopes = {"w": rng.uniform(0.5, 2.0, size=(4, 3)), "b": rng.uniform(0.5, 2.0, size=3)}

    def loss_fn(p: ParamStore):
        loss = sum(float(np.sum(slopes[name] * p[name])) for name in p)
        return loss, ParamStore(slopes)

    assert grad_check(loss_fn, params, rng=rng) < 1e-8


def test_grad_check_flags_a_wrong_gradient(rng):
    params = ParamStore()
    init_mlp2(params, "mlp", 5, 7, 3, rng)
    x = rng.normal(size=5)
    target = rng.normal(size=3) + 3.0

    def loss_fn(p: ParamStore):
        grads = p.zeros_like()
        y, cache = mlp2_forward(x, p, "mlp")
        mlp2_backward(y - target, cache, p, grads, "mlp")
        grads.scale(-1.0)
        return 0.5 * float(np.sum((y - target) ** 2)), grads

    before = params.copy()
    assert grad_check(loss_fn, params, rng=rng) > 1e-2
    for name, value in before.items():
        assert np.array_equal(params[name], value)


def test_lstm_stack_gradients_through_time(rng):
    params = ParamStore()
    init_lstm_stack(params, "lstm", 4, 5, 2, rng, 1.0)
    xs = [rng.normal(size=4) for _ in range(3)]
    weights = [rng.normal(size=5) for _ in range(3)]

    def loss_fn(p: ParamStore):
        grads = p.zeros_like()
        state = LstmState.zeros(2, 5)
        caches = []
        loss = 0.0
        for x, w in zip(xs, weights):
            h, state, cache = lstm_stack_forward(x, state, p, "lstm")
            caches.append(cache)
            loss += float(w @ h)
        dh_next, dc_next = zero_state_grads(state)
        for cache, w in zip(reversed(caches), reversed(weights)):
            _, dh_next, dc_next = lstm_stack_backward(w, dh_next, dc_next, cache, p, grads, "lstm")
        return loss, grads

    assert grad_check(loss_fn, params, rng=rng) < 1e-5


def test_lstm_forget_bias_and_state_check(rng):
    params = ParamStore()
    init_lstm_stack(params, "lstm", 3, 4, 1, rng, 1.0)
    assert np.all(params["lstm.0.b"][4:8] == 1.0)
    assert np.all(params["lstm.0.b"][:4] == 0.0)
    with pytest.raises(ConfigurationError):
        lstm_stack_forward(np.zeros(3), LstmState.zeros(2, 4), params, "lstm")


def _store(rng: np.random.Generator) -> ParamStore:
    params = ParamStore()
    init_affine(params, "a", 3, 2, rng)
    params.init_uniform("rows", (4, 3), rng)
    return params


def test_adam_skips_blocks_with_zero_gradient(rng):
    params = _store(rng)
    before = params.copy()
    state = AdamState.create(params)
    grads = params.zeros_like()
    grads["a.w"][:] = 1.0
    adam_step(params, grads, state)
    assert not np.array_equal(params["a.w"], before["a.w"])
    assert np.array_equal(params["rows"], before["rows"])
    assert not np.any(state.m["rows"])
    assert "rows" in state.skipped and state.step == 1


def test_adam_trainable_rows_only(rng):
    params = _store(rng)
    before = params.copy()
    state = AdamState.create(params)
    grads = params.zeros_like()
    for name in grads:
        grads[name][:] = 0.5
    adam_step(params, grads, state, trainable={"rows": np.array([3])})
    assert np.array_equal(params["a.w"], before["a.w"])
    assert np.array_equal(params["rows"][:3], before["rows"][:3])
    assert not np.array_equal(params["rows"][3], before["rows"][3])


def test_adam_learning_rate_decay():
    params = ParamStore({"x": np.zeros(1)})
    state = AdamState.create(params, learning_rate=0.1, decay=0.5, decay_interval=2)
    assert state.effective_learning_rate() == pytest.approx(0.1)
    state.step = 5
    assert state.effective_learning_rate() == pytest.approx(0.025)


def test_adam_rejects_non_finite_gradient(rng):
    params = _store(rng)
    grads = params.zeros_like()
    grads["rows"][0, 0] = np.nan
    with pytest.raises(TrainingError, match="rows"):
        adam_step(params, grads, AdamState.create(params))


def test_clip_global_norm():
    grads = ParamStore({"g": np.array([3.0, 4.0])})
    assert clip_global_norm(grads, 1.0) == pytest.approx(5.0)
    assert grads.global_norm() == pytest.approx(1.0)
    assert clip_global_norm(grads, 10.0) == pytest.approx(1.0)


def test_checksum_of_selected_rows(rng):
    params = _store(rng)
    full = params.checksum("rows")
    head = params.checksum("rows", np.arange(3))
    params["rows"][3] += 1.0
    assert params.checksum("rows", np.arange(3)) == head
    assert params.checksum("rows") != full
