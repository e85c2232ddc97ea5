import numpy as np
import pytest

import urnet


def test_forward_matches_numpy():
    net = urnet.init_gaussian([3, 5, 2], 0.5, 7)
    x = np.random.default_rng(0).normal(size=(3, 4))
    h = np.maximum(net.weights[0] @ x + net.biases[0][:, None], 0.0)
    y = net.weights[1] @ h + net.biases[1][:, None]
    np.testing.assert_allclose(net.forward(x), y, rtol=1e-12, atol=1e-12)


def test_unrectified_state_is_feasible():
    net = urnet.init_gaussian([4, 6, 6, 3], 0.7, 1)
    x = np.random.default_rng(1).normal(size=(4, 9))
    assert urnet.unrectify_residual(net, x) == 0.0


def test_checkpoint_round_trip(tmp_path):
    net = urnet.init_gaussian([3, 4, 2], 0.3, 2)
    path = tmp_path / "net.urnw"
    net.save(path)
    back = urnet.Network.load(path)
    assert back.layer_dims == [3, 4, 2]
    for a, b in zip(net.weights, back.weights):
        np.testing.assert_array_equal(a, b)


def test_sensing_right_inverse():
    s = urnet.gen_sensing(8, 32, 3)
    assert s.A.shape == (8, 32)
    np.testing.assert_allclose(s.A @ s.A_pinv, np.eye(8), atol=1e-8)
    with pytest.raises(urnet.ConfigError):
        urnet.gen_sensing(32, 32, 3)


def test_metrics():
    x = np.random.default_rng(2).uniform(size=(16, 16))
    assert urnet.mse(x, x) == 0.0
    assert urnet.ssim(x, x) == pytest.approx(1.0)
    assert urnet.psnr(x, x + 0.1) == pytest.approx(20.0)


def test_train_reduces_loss():
    x = urnet.gen_sparse(8, 2, 30, 5)
    s = urnet.gen_sensing(4, 8, 6)
    net0 = urnet.init_gaussian([8, 8, 8], 0.1, 7)
    y = s.A_pinv @ (s.A @ x)
    net, status, trace = urnet.train(net0, y, x, max_outer=3, max_inner_sweeps=200)
    assert status in ("converged", "max_iterations")
    assert len(trace) == 3
    assert set(trace[0]) == {"iter", "L", "loss", "constraint_norm", "kkt", "rho_scale", "omega", "eta"}
    assert urnet.mse(x, urnet.recover(net, s, s.A @ x)) < urnet.mse(x, urnet.recover(net0, s, s.A @ x))


def test_dimension_errors_raise():
    net = urnet.Network([3, 2, 1])
    with pytest.raises(ValueError):
        net.forward(np.zeros((4, 2)))
