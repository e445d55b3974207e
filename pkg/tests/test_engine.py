import numpy as np
import pytest

from kpimage.engine import (
    Adam,
    BatchNorm2D,
    Conv1D,
    Conv2D,
    Dense,
    Flatten,
    GlobalAvgPool,
    MaxPool1D,
    MaxPool2D,
    Network,
    ReLU,
    ResidualBlock,
    TrainConfig,
    checkpoint_bytes,
    count_macs,
    count_params,
    fit_network,
    grad_check,
    layer_table,
    learnable_layer_count,
    load_checkpoint,
    lr_at,
    make_loss,
    mse_loss,
    quantile_loss,
    save_checkpoint,
)
from kpimage.errors import (
    ConfigError,
    EngineStateError,
    ParseError,
    ShapeError,
)


def net64(layers, in_shape, seed=0):
    return Network(layers, in_shape, dtype=np.float64,
                   rng=np.random.default_rng(seed))


def data(shape, seed=0, scale=1.0):
    return np.random.default_rng(seed).standard_normal(shape) * scale


class TestLayerGradients:
    """Finite differences catch errors in both the layer under test and
    everything downstream of whatever parameter is perturbed."""

    def check(self, layers, in_shape, batch=3, seed=0, loss=mse_loss,
              y_shift=0.0, scalar_target=False):
        net = net64(layers, in_shape, seed=seed)
        x = data((batch,) + tuple(in_shape), seed=seed + 1)
        y_shape = (batch,) if scalar_target else (batch,) + net.output_shape
        y = data(y_shape, seed=seed + 2) + y_shift
        report = grad_check(net, x, y, loss, rng=np.random.default_rng(3))
        assert report.ok, report.failures[:3]
        assert report.worst < 1e-4

    def test_dense(self):
        self.check([Dense(8)], (16,))

    def test_dense_no_bias(self):
        self.check([Dense(8, bias=False)], (16,))

    def test_conv2d(self):
        self.check([Conv2D(6, kernel=3, padding=1), Flatten(), Dense(2)],
                   (3, 6, 6))

    def test_conv2d_strided_unpadded(self):
        self.check([Conv2D(6, kernel=3, stride=2), Flatten(), Dense(2)],
                   (3, 7, 7))

    def test_conv1d(self):
        self.check([Conv1D(12, kernel=5, padding=2), Flatten(), Dense(2)],
                   (4, 12))

    def test_maxpool2d(self):
        self.check([Conv2D(6, kernel=3, padding=1), MaxPool2D(2),
                    Flatten(), Dense(3)], (2, 8, 8))

    def test_maxpool1d(self):
        self.check([Conv1D(12, kernel=3, padding=1), MaxPool1D(2),
                    Flatten(), Dense(3)], (3, 12))

    def test_relu(self):
        self.check([Dense(32), ReLU(), Dense(2)], (8,))

    def test_globalavgpool(self):
        self.check([Conv2D(6, kernel=3, padding=1), GlobalAvgPool(),
                    Dense(4)], (2, 5, 5))

    def test_batchnorm2d(self):
        self.check([Conv2D(8, kernel=3, padding=1), BatchNorm2D(),
                    ReLU(), Flatten(), Dense(2)], (2, 4, 4), batch=4)

    def test_residual_identity_shortcut(self):
        self.check([ResidualBlock(8, stride=2, shortcut="identity"),
                    GlobalAvgPool(), Dense(2)], (4, 6, 6), batch=3)

    def test_residual_projection_shortcut(self):
        self.check([ResidualBlock(8, stride=2, shortcut="projection"),
                    GlobalAvgPool(), Dense(2)], (4, 6, 6), batch=3)

    def test_residual_plain(self):
        self.check([ResidualBlock(4, stride=1), GlobalAvgPool(), Dense(2)],
                   (4, 6, 6), batch=3)

    def test_quantile_loss_through_net(self):
        loss = make_loss("quantile", (0.05, 0.5, 0.95))
        # shift targets away from predictions so finite differences
        # never straddle the pinball kink
        self.check([Conv2D(6, kernel=3, padding=1), ReLU(), MaxPool2D(2),
                    Flatten(), Dense(3)], (1, 8, 8), loss=loss, y_shift=5.0,
                   scalar_target=True)

    def test_requires_float64(self):
        net = Network([Dense(4)], (8,))
        with pytest.raises(ConfigError, match="float64"):
            grad_check(net, data((2, 8)), data((2, 4)), mse_loss)

    def test_kink_probes_are_skipped_not_failed(self):
        # batchnorm parks many preactivations near zero, so some probes
        # step across relu kinks where central differences are invalid;
        # those must be skipped while the net still comes out clean
        net = net64([Conv2D(16, 3, padding=1),
                     ResidualBlock(40, stride=2, shortcut="projection"),
                     GlobalAvgPool(), Dense(3)], (4, 8, 8), seed=2)
        x = data((3, 4, 8, 8), seed=12)
        y = data((3,) + net.output_shape, seed=13)
        report = grad_check(net, x, y, mse_loss, samples_per_tensor=100,
                            rng=np.random.default_rng(9))
        assert report.ok, report.failures[:3]
        assert report.skipped > 0
        assert report.checked > 10 * report.skipped

    def test_wrong_gradient_not_masked_by_kink_gate(self):
        def crooked(pred, target):
            loss, grad = mse_loss(pred, target)
            return loss, grad * 1.01

        net = net64([Conv2D(16, 3, padding=1),
                     ResidualBlock(40, stride=2, shortcut="projection"),
                     GlobalAvgPool(), Dense(3)], (4, 8, 8), seed=2)
        x = data((3, 4, 8, 8), seed=12)
        y = data((3,) + net.output_shape, seed=13)
        report = grad_check(net, x, y, crooked, samples_per_tensor=100,
                            rng=np.random.default_rng(9))
        assert not report.ok
        # both step sizes agree with each other and expose the bug
        assert len(report.failures) == report.checked


class TestLosses:
    def test_mse_oracle(self):
        loss, grad = mse_loss(np.array([[1.0], [2.0]]), np.array([0.0, 0.0]))
        assert loss == pytest.approx(2.5)
        np.testing.assert_allclose(grad, [[1.0], [2.0]])

    def test_quantile_above_and_below(self):
        loss, grad = quantile_loss(np.array([[0.0]]), np.array([1.0]), [0.95])
        assert loss == pytest.approx(0.95)
        assert grad[0, 0] == pytest.approx(-0.95)
        loss, grad = quantile_loss(np.array([[2.0]]), np.array([1.0]), [0.95])
        assert loss == pytest.approx(0.05)
        assert grad[0, 0] == pytest.approx(0.05)

    def test_quantile_kink_subgradient_zero(self):
        loss, grad = quantile_loss(np.array([[1.0]]), np.array([1.0]), [0.5])
        assert loss == 0.0
        assert grad[0, 0] == 0.0

    def test_quantile_mean_over_batch_and_heads(self):
        pred = np.zeros((2, 2))
        target = np.array([1.0, 1.0])
        loss, grad = quantile_loss(pred, target, [0.25, 0.75])
        # per-element losses: 0.25 and 0.75 in each row
        assert loss == pytest.approx(0.5)
        np.testing.assert_allclose(grad, [[-0.25 / 4, -0.75 / 4]] * 2)

    def test_quantile_validation(self):
        with pytest.raises(ConfigError):
            quantile_loss(np.zeros((1, 1)), np.zeros(1), [0.0])
        with pytest.raises(ConfigError):
            quantile_loss(np.zeros((1, 1)), np.zeros(1), [1.0])
        with pytest.raises(ShapeError):
            quantile_loss(np.zeros((1, 2)), np.zeros(1), [0.5])

    def test_make_loss(self):
        assert make_loss("mse") is mse_loss
        fn = make_loss("quantile", (0.1, 0.9))
        loss, _ = fn(np.zeros((1, 2)), np.ones(1))
        assert loss == pytest.approx(0.5)
        with pytest.raises(ConfigError):
            make_loss("huber")
        with pytest.raises(ConfigError):
            make_loss("quantile")


class TestOptimizer:
    def one_param_net(self, w0=1.0):
        net = net64([Dense(1, bias=False)], (1,))
        p = net.layers[0].params()["w"]
        p[...] = w0
        return net, p

    def test_adam_first_step_oracle(self):
        net, p = self.one_param_net(1.0)
        x = np.array([[1.0]])
        y = np.array([0.95])  # mse grad wrt w is 2*(w - 0.95) = 0.1
        pred = net.forward(x)
        _, g = mse_loss(pred, y)
        net.backward(g)
        opt = Adam(net)
        opt.step(net, lr=0.1)
        expected = 1.0 - 0.1 * (0.1 / (0.1 + 1e-8))
        assert p[0, 0] == pytest.approx(expected, abs=1e-15)
        assert opt.t == 1

    def test_weight_decay_additive(self):
        net, p = self.one_param_net(2.0)
        x = np.array([[0.0]])  # zero input: pure-decay gradient
        y = np.array([0.0])
        net.backward(mse_loss(net.forward(x), y)[1])
        Adam(net, weight_decay=0.5).step(net, lr=0.1)
        # g = 0 + 0.5*2 = 1; first Adam step is lr * g/(|g| + eps)
        expected = 2.0 - 0.1 * (1.0 / (1.0 + 1e-8))
        assert p[0, 0] == pytest.approx(expected, abs=1e-15)

    def test_steps_shrink_with_vhat(self):
        net, p = self.one_param_net(1.0)
        x, y = np.array([[1.0]]), np.array([0.0])
        opt = Adam(net)
        values = []
        for _ in range(5):
            net.backward(mse_loss(net.forward(x), y)[1])
            opt.step(net, lr=0.01)
            values.append(float(p[0, 0]))
        assert values == sorted(values, reverse=True)  # monotone toward 0
        assert opt.t == 5


class TestSchedule:
    def test_step_schedule_exact(self):
        cfg = TrainConfig()
        assert lr_at(0, cfg) == 0.01
        assert lr_at(49, cfg) == 0.01
        assert lr_at(50, cfg) == 0.001
        assert lr_at(89, cfg) == 0.001
        assert lr_at(90, cfg) == 0.0001
        assert lr_at(119, cfg) == 0.0001

    def test_no_milestones(self):
        cfg = TrainConfig(lr=0.5, lr_milestones=())
        assert lr_at(1000, cfg) == 0.5

    def test_custom_factor(self):
        cfg = TrainConfig(lr=1.0, lr_milestones=(1,), lr_factor=0.5)
        assert lr_at(1, cfg) == 0.5


class TestTrainConfig:
    def test_defaults(self):
        cfg = TrainConfig()
        assert cfg.epochs == 120
        assert cfg.batch_size == 32
        assert cfg.lr == 0.01
        assert cfg.weight_decay == 5e-4
        assert cfg.lr_milestones == (50, 90)
        assert cfg.lr_factor == 0.1
        assert cfg.loss == "quantile"
        assert cfg.quantiles == (0.05, 0.50, 0.95)
        assert cfg.output_heads == 3

    def test_mse_single_head(self):
        assert TrainConfig(loss="mse").output_heads == 1

    def test_problems_collected(self):
        cfg = TrainConfig(epochs=0, lr=-1, loss="huber")
        problems = cfg.problems()
        assert len(problems) == 3
        with pytest.raises(ConfigError, match="epochs"):
            cfg.validate()

    def test_quantiles_must_be_sorted_in_range(self):
        assert TrainConfig(quantiles=(0.9, 0.1)).problems()
        assert TrainConfig(quantiles=(0.0, 0.5)).problems()
        assert not TrainConfig(quantiles=(0.1, 0.5, 0.9)).problems()


class TestFitNetwork:
    def test_mse_converges_to_mean(self):
        rng = np.random.default_rng(0)
        y = rng.standard_normal(64) * 2 + 3
        X = np.ones((64, 1), dtype=np.float64)
        net = net64([Dense(1)], (1,))
        cfg = TrainConfig(epochs=150, batch_size=16, lr=0.05,
                          weight_decay=0.0, lr_milestones=(100,),
                          loss="mse", seed=1)
        record = fit_network(net, X, y, cfg)
        pred = net.forward(X, training=False)[0, 0]
        assert pred == pytest.approx(y.mean(), abs=0.05)
        assert record["history"][-1] < record["history"][0]

    def test_quantile_heads_converge_to_quantiles(self):
        rng = np.random.default_rng(4)
        y = rng.standard_normal(256)
        X = np.ones((256, 1), dtype=np.float64)
        net = net64([Dense(3)], (1,))
        cfg = TrainConfig(epochs=400, batch_size=64, lr=0.05,
                          weight_decay=0.0, lr_milestones=(250, 350),
                          quantiles=(0.05, 0.5, 0.95), seed=2)
        fit_network(net, X, y, cfg)
        heads = net.forward(X[:1], training=False)[0]
        want = np.quantile(y, [0.05, 0.5, 0.95])
        np.testing.assert_allclose(heads, want, atol=0.2)
        assert heads[0] < heads[1] < heads[2]

    def test_deterministic_given_seed(self):
        X = data((40, 6), seed=7)
        y = data(40, seed=8)
        runs = []
        for _ in range(2):
            net = net64([Dense(4), ReLU(), Dense(1)], (6,), seed=5)
            cfg = TrainConfig(epochs=5, batch_size=8, loss="mse", seed=9)
            record = fit_network(net, X, y, cfg,
                                 rng=np.random.default_rng(9))
            runs.append((record["history"], net.copy_state()))
        assert runs[0][0] == runs[1][0]
        for key in runs[0][1]:
            np.testing.assert_array_equal(runs[0][1][key], runs[1][1][key])

    def test_partial_final_batch_kept(self):
        X = data((5, 3), seed=1)
        y = data(5, seed=2)
        net = net64([Dense(1)], (3,))
        cfg = TrainConfig(epochs=2, batch_size=4, loss="mse")
        record = fit_network(net, X, y, cfg)
        assert len(record["history"]) == 2

    def test_early_stopping_restores_best(self):
        # training target and validation target disagree, so validation
        # loss bottoms out early and then climbs
        X = np.ones((16, 1))
        y = np.ones(16)
        X_val = np.ones((4, 1))
        y_val = -np.ones(4)
        net = net64([Dense(1, bias=False)], (1,))
        cfg = TrainConfig(epochs=200, batch_size=16, lr=0.05,
                          weight_decay=0.0, lr_milestones=(), loss="mse",
                          early_stop_patience=5)
        record = fit_network(net, X, y, cfg, X_val=X_val, y_val=y_val)
        assert record["epochs_run"] < 200
        best = min(record["val_history"])
        restored_val, _ = mse_loss(net.forward(X_val, training=False), y_val)
        assert restored_val == pytest.approx(best)
        assert record["best_epoch"] == record["val_history"].index(best)

    def test_bad_inputs(self):
        net = net64([Dense(1)], (2,))
        with pytest.raises(ShapeError):
            fit_network(net, data((3, 2)), data(4), TrainConfig(loss="mse"))
        with pytest.raises(ConfigError):
            fit_network(net, np.zeros((0, 2)), np.zeros(0),
                        TrainConfig(loss="mse"))


class TestNetworkContainer:
    def test_shape_resolution_and_validation(self):
        net = Network([Conv2D(4, kernel=3, padding=1), MaxPool2D(2),
                       Flatten(), Dense(5)], (2, 8, 8))
        assert net.output_shape == (5,)
        with pytest.raises(ShapeError, match="shape"):
            net.forward(np.zeros((3, 2, 9, 9), dtype=np.float32))

    def test_build_error_names_layer(self):
        with pytest.raises(ShapeError, match="layer 1"):
            Network([Flatten(), Conv2D(4)], (2, 8, 8))

    def test_backward_requires_forward(self):
        net = Network([Dense(2)], (3,))
        with pytest.raises(EngineStateError):
            net.backward(np.zeros((1, 2), dtype=np.float32))
        net.forward(np.zeros((1, 3), dtype=np.float32))
        net.backward(np.zeros((1, 2), dtype=np.float32))
        with pytest.raises(EngineStateError):  # consumed by the first call
            net.backward(np.zeros((1, 2), dtype=np.float32))

    def test_parameter_paths(self):
        net = Network([Conv2D(2, kernel=1), ReLU(), Flatten(), Dense(3)],
                      (1, 2, 2))
        paths = [p for p, _, _ in net.parameters()]
        assert paths == ["0.w", "0.b", "3.w", "3.b"]

    def test_residual_parameter_paths(self):
        net = Network([ResidualBlock(4, stride=2, shortcut="projection")],
                      (2, 4, 4))
        paths = [p for p, _, _ in net.parameters()]
        assert "0.conv1.w" in paths and "0.short_conv.w" in paths
        buffers = [p for p, _ in net.state_tensors()]
        assert "0.buffers.bn1.running_mean" in buffers

    def test_state_roundtrip(self):
        net = Network([Dense(4), ReLU(), Dense(1)], (3,))
        state = net.copy_state()
        for _, p, _ in net.parameters():
            p += 1.0
        net.load_state(state)
        for path, arr in net.state_tensors():
            np.testing.assert_array_equal(arr, state[path])

    def test_load_state_shape_mismatch(self):
        net = Network([Dense(4)], (3,))
        bad = {path: np.zeros((1, 1), dtype=np.float32)
               for path, _ in net.state_tensors()}
        with pytest.raises(ShapeError):
            net.load_state(bad)

    def test_counting_oracles(self):
        net = Network([Conv2D(3, kernel=3, padding=1), Flatten(), Dense(2)],
                      (2, 5, 5))
        assert count_params(net) == (3 * 2 * 9 + 3) + (75 * 2 + 2)
        assert count_macs(net) == 5 * 5 * 3 * 2 * 9 + 75 * 2
        assert learnable_layer_count(net) == 2

    def test_layer_table(self):
        net = Network([Conv2D(3, kernel=3, padding=1), Flatten(), Dense(2)],
                      (2, 5, 5))
        rows = layer_table(net)
        assert [r["kind"] for r in rows] == ["conv2d", "flatten", "dense"]
        assert rows[0]["out_shape"] == (3, 5, 5)
        assert rows[1]["params"] == 0 and rows[1]["macs"] == 0


class TestLayerForwardOracles:
    def test_conv2d_matches_naive(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((2, 2, 5, 5))
        net = net64([Conv2D(3, kernel=3, stride=2, padding=1)], (2, 5, 5))
        conv = net.layers[0]
        w, b = conv.params()["w"], conv.params()["b"]
        out = net.forward(x)
        xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
        for n in (0, 1):
            for c in range(3):
                for i in range(out.shape[2]):
                    for j in range(out.shape[3]):
                        patch = xp[n, :, 2 * i:2 * i + 3, 2 * j:2 * j + 3]
                        want = (patch * w[c]).sum() + b[c]
                        assert out[n, c, i, j] == pytest.approx(want)

    def test_conv1d_matches_naive(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((2, 3, 7))
        net = net64([Conv1D(2, kernel=3, padding=1)], (3, 7))
        conv = net.layers[0]
        w, b = conv.params()["w"], conv.params()["b"]
        out = net.forward(x)
        xp = np.pad(x, ((0, 0), (0, 0), (1, 1)))
        for n in (0, 1):
            for c in (0, 1):
                for t in range(7):
                    want = (xp[n, :, t:t + 3] * w[c]).sum() + b[c]
                    assert out[n, c, t] == pytest.approx(want)

    def test_maxpool2d_matches_naive(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((2, 3, 6, 6))
        net = net64([MaxPool2D(2)], (3, 6, 6))
        out = net.forward(x)
        want = x.reshape(2, 3, 3, 2, 3, 2).max(axis=(3, 5))
        np.testing.assert_allclose(out, want)

    def test_maxpool1d_matches_naive(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((2, 3, 8))
        net = net64([MaxPool1D(2)], (3, 8))
        np.testing.assert_allclose(net.forward(x),
                                   x.reshape(2, 3, 4, 2).max(axis=3))

    def test_globalavgpool(self):
        x = data((2, 3, 4, 4), seed=4)
        net = net64([GlobalAvgPool()], (3, 4, 4))
        np.testing.assert_allclose(net.forward(x), x.mean(axis=(2, 3)))

    def test_flatten_shape(self):
        x = data((2, 3, 4, 4), seed=5)
        net = net64([Flatten()], (3, 4, 4))
        np.testing.assert_array_equal(net.forward(x), x.reshape(2, -1))


class TestBatchNorm:
    def test_training_normalizes_batch(self):
        x = data((8, 4, 5, 5), seed=6, scale=3.0) + 2.0
        net = net64([BatchNorm2D()], (4, 5, 5))
        out = net.forward(x, training=True)
        np.testing.assert_allclose(out.mean(axis=(0, 2, 3)), 0.0, atol=1e-9)
        np.testing.assert_allclose(out.var(axis=(0, 2, 3)), 1.0, atol=1e-4)

    def test_running_stats_momentum(self):
        x = data((8, 4, 5, 5), seed=7, scale=2.0) + 1.0
        net = net64([BatchNorm2D()], (4, 5, 5))
        bn = net.layers[0]
        net.forward(x, training=True)
        mu = x.mean(axis=(0, 2, 3))
        var = x.var(axis=(0, 2, 3))
        np.testing.assert_allclose(bn.buffers()["running_mean"], 0.1 * mu)
        np.testing.assert_allclose(bn.buffers()["running_var"],
                                   0.9 * 1.0 + 0.1 * var)

    def test_eval_uses_running_stats(self):
        x = data((4, 2, 3, 3), seed=8)
        net = net64([BatchNorm2D()], (2, 3, 3))
        bn = net.layers[0]
        bn.buffers()["running_mean"][...] = [1.0, -1.0]
        bn.buffers()["running_var"][...] = [4.0, 9.0]
        out = net.forward(x, training=False)
        want = (x - np.array([1.0, -1.0])[None, :, None, None]) \
            / np.sqrt(np.array([4.0, 9.0])[None, :, None, None] + 1e-5)
        np.testing.assert_allclose(out, want)


class TestResidualWiring:
    def test_zeroed_main_branch_leaves_shortcut(self):
        # with bn2 gamma and beta forced to zero the main branch
        # contributes nothing, so the block reduces to relu(x)
        net = net64([ResidualBlock(4, stride=1)], (4, 6, 6))
        block = net.layers[0]
        block.bn2.params()["gamma"][...] = 0.0
        block.bn2.params()["beta"][...] = 0.0
        x = data((2, 4, 6, 6), seed=9)
        np.testing.assert_allclose(net.forward(x, training=True),
                                   np.maximum(x, 0.0))

    def test_pad_shortcut_subsamples_and_pads(self):
        net = net64([ResidualBlock(8, stride=2, shortcut="identity")],
                    (4, 6, 6))
        block = net.layers[0]
        block.bn2.params()["gamma"][...] = 0.0
        block.bn2.params()["beta"][...] = 0.0
        x = data((2, 4, 6, 6), seed=10)
        out = net.forward(x, training=True)
        assert out.shape == (2, 8, 3, 3)
        # channels 2..5 carry the subsampled input, 0..1 and 6..7 are pad
        np.testing.assert_allclose(out[:, 2:6],
                                   np.maximum(x[:, :, ::2, ::2], 0.0))
        np.testing.assert_allclose(out[:, :2], 0.0)
        np.testing.assert_allclose(out[:, 6:], 0.0)

    def test_unknown_shortcut(self):
        with pytest.raises(ShapeError):
            ResidualBlock(8, shortcut="zeropad")


class TestCheckpoint:
    def build_and_train(self, dtype=np.float32):
        net = Network([Conv2D(3, kernel=3, padding=1), BatchNorm2D(),
                       ReLU(), Flatten(), Dense(2)], (1, 4, 4),
                      dtype=dtype, rng=np.random.default_rng(0))
        X = data((8, 1, 4, 4), seed=1).astype(dtype)
        y = data((8, 2), seed=2).astype(dtype)
        for _ in range(3):
            _, g = mse_loss(net.forward(X), y)
            net.backward(g)
            Adam(net).step(net, 0.01)
        return net, X

    def test_roundtrip(self, tmp_path):
        net, X = self.build_and_train()
        path = tmp_path / "model.k5gc"
        save_checkpoint(net, path, extra={"note": "hello", "levels": [1, 2]})
        loaded, header = load_checkpoint(path)
        assert header["note"] == "hello"
        assert header["levels"] == [1, 2]
        assert header["dtype"] == "float32"
        for (p1, a1), (p2, a2) in zip(net.state_tensors(),
                                      loaded.state_tensors()):
            assert p1 == p2
            np.testing.assert_array_equal(a1, a2)
        np.testing.assert_array_equal(net.forward(X, training=False),
                                      loaded.forward(X, training=False))

    def test_float64_roundtrip(self, tmp_path):
        net, X = self.build_and_train(dtype=np.float64)
        path = tmp_path / "model64.k5gc"
        save_checkpoint(net, path)
        loaded, header = load_checkpoint(path)
        assert header["dtype"] == "float64"
        np.testing.assert_array_equal(net.forward(X, training=False),
                                      loaded.forward(X, training=False))

    def test_deterministic_bytes(self):
        net, _ = self.build_and_train()
        assert checkpoint_bytes(net, {"a": 1}) == \
            checkpoint_bytes(net, {"a": 1})

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk.k5gc"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(ParseError, match="magic"):
            load_checkpoint(path)

    def test_truncated_payload(self, tmp_path):
        net, _ = self.build_and_train()
        blob = checkpoint_bytes(net)
        path = tmp_path / "cut.k5gc"
        path.write_bytes(blob[:-8])
        with pytest.raises(ParseError, match="truncated"):
            load_checkpoint(path)

    def test_trailing_bytes(self, tmp_path):
        net, _ = self.build_and_train()
        path = tmp_path / "long.k5gc"
        path.write_bytes(checkpoint_bytes(net) + b"\x00\x00")
        with pytest.raises(ParseError, match="trailing"):
            load_checkpoint(path)

    def test_extra_key_collision(self):
        net, _ = self.build_and_train()
        with pytest.raises(ShapeError, match="collide"):
            checkpoint_bytes(net, extra={"layers": []})
