"""Adam update rule against a hand-stepped scalar rollout."""

import numpy as np
import pytest

from flowcast.neural import AdamParams, adam_init, adam_step


def wrap(value):
    """One scalar parameter in the layer-structured container."""
    return [{"theta": np.array([float(value)])}]


class TestAdamStep:
    def test_first_step_magnitude_is_learning_rate(self):
        cfg = AdamParams()
        params = wrap(0.0)
        state = adam_init(params)
        grads = wrap(1.0)
        new_params, _ = adam_step(params, grads, state, t=1, cfg=cfg)
        delta = abs(new_params[0]["theta"][0])
        assert delta == pytest.approx(cfg.alpha, rel=1e-6)

    def test_zero_gradient_leaves_parameter_unchanged(self):
        cfg = AdamParams()
        params = wrap(1.5)
        state = adam_init(params)
        new_params, _ = adam_step(params, wrap(0.0), state, t=1, cfg=cfg)
        assert new_params[0]["theta"][0] == 1.5

    def test_ten_steps_on_quadratic_match_scalar_rollout(self):
        cfg = AdamParams(alpha=0.1)
        params = wrap(1.0)
        state = adam_init(params)
        trajectory = []
        for t in range(1, 11):
            grads = wrap(2.0 * params[0]["theta"][0])  # d/dx of x^2
            params, state = adam_step(params, grads, state, t, cfg)
            trajectory.append(params[0]["theta"][0])

        # independent scalar re-implementation
        theta, m, v = 1.0, 0.0, 0.0
        expected = []
        for t in range(1, 11):
            g = 2.0 * theta
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g * g
            m_hat = m / (1.0 - 0.9**t)
            v_hat = v / (1.0 - 0.999**t)
            theta = theta - 0.1 * m_hat / (np.sqrt(v_hat) + 1e-8)
            expected.append(theta)
        # association order differs between the vectorized update and the
        # scalar rollout, so agreement is to rounding, not bit-exact
        assert np.allclose(trajectory, expected, rtol=1e-12, atol=0)
        assert trajectory[-1] < 0.5  # actually descending

    def test_inputs_not_mutated(self):
        cfg = AdamParams()
        params = wrap(2.0)
        state = adam_init(params)
        adam_step(params, wrap(1.0), state, t=1, cfg=cfg)
        assert params[0]["theta"][0] == 2.0
        assert state.m[0]["theta"][0] == 0.0

    def test_step_index_validated(self):
        params = wrap(0.0)
        with pytest.raises(ValueError):
            adam_step(params, wrap(1.0), adam_init(params), t=0, cfg=AdamParams())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            AdamParams(alpha=-1.0)
        with pytest.raises(ValueError):
            AdamParams(beta1=1.0)
        with pytest.raises(ValueError):
            AdamParams(beta2=0.0)
