import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from kpimage.engine import (
    count_macs,
    count_params,
    learnable_layer_count,
)
from kpimage.errors import ConfigError, ShapeError
from kpimage.models import (
    HATAMI_WIDTHS,
    MODEL_KINDS,
    RESNET_WIDTHS,
    build_cnn1d,
    build_hatami,
    build_model,
    build_resnet20,
    default_train_config,
)
from kpimage.regressor import ConvImageRegressor


class TestHatami:
    def test_frozen_accounting(self):
        net = build_hatami(1, 3)
        assert count_params(net) == 10947
        assert count_macs(net) == 1333248
        assert learnable_layer_count(net) == 3

    def test_three_channel_input(self):
        net = build_hatami(3, 3)
        out = net.forward(np.zeros((2, 3, 32, 32), dtype=np.float32))
        assert out.shape == (2, 3)

    def test_single_output_head(self):
        net = build_hatami(1, 1, image_size=16)
        assert net.output_shape == (1,)

    def test_default_widths(self):
        assert HATAMI_WIDTHS == (16, 32)
        net = build_hatami(1, 1, widths=(4, 8))
        assert count_params(net) < 10947


class TestResNet20:
    def test_frozen_accounting_identity(self):
        net = build_resnet20(3, 3)
        assert count_params(net) == 269267
        assert count_macs(net) == 40550592
        assert learnable_layer_count(net) == 20

    def test_within_published_budgets(self):
        net = build_resnet20(3, 3)
        assert abs(count_params(net) - 269.2e3) / 269.2e3 < 0.02
        assert abs(count_macs(net) - 40.9e6) / 40.9e6 < 0.02

    def test_projection_variant(self):
        net = build_resnet20(3, 3, shortcut="projection")
        assert count_params(net) == 272019
        assert learnable_layer_count(net) == 22

    def test_stage_widths(self):
        assert RESNET_WIDTHS == (16, 32, 64)
        net = build_resnet20(1, 1)
        out = net.forward(np.zeros((1, 1, 32, 32), dtype=np.float32),
                          training=True)
        assert out.shape == (1, 1)


class TestCnn1d:
    def test_frozen_accounting(self):
        net = build_cnn1d(1, 1)
        assert count_params(net) == 1889
        assert count_macs(net) == 26368
        assert learnable_layer_count(net) == 3

    def test_forward_shape(self):
        net = build_cnn1d(1, 3)
        out = net.forward(np.zeros((4, 1, 32), dtype=np.float32))
        assert out.shape == (4, 3)


class TestBuildModel:
    def test_dispatch(self):
        assert MODEL_KINDS == ("hatami", "resnet20", "cnn1d")
        for kind, channels in (("hatami", 1), ("resnet20", 3),
                               ("cnn1d", 1)):
            net = build_model(kind, channels, 1)
            assert net.output_shape == (1,)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError, match="model"):
            build_model("lstm", 1, 1)

    def test_init_determinism(self):
        a = build_model("hatami", 1, 1, image_size=16,
                        rng=np.random.default_rng(7))
        b = build_model("hatami", 1, 1, image_size=16,
                        rng=np.random.default_rng(7))
        for (pa, ta), (pb, tb) in zip(a.state_tensors(), b.state_tensors()):
            assert pa == pb
            np.testing.assert_array_equal(ta, tb)


class TestDefaultTrainConfig:
    def test_image_models_share_one_recipe(self):
        for kind in ("hatami", "resnet20"):
            cfg = default_train_config(kind)
            assert cfg.epochs == 120
            assert cfg.batch_size == 32
            assert cfg.lr == 0.01
            assert cfg.weight_decay == 5e-4
            assert cfg.lr_milestones == (50, 90)

    def test_cnn1d_recipe(self):
        cfg = default_train_config("cnn1d")
        assert cfg.epochs == 300
        assert cfg.batch_size == 128
        assert cfg.lr == 0.001
        assert cfg.weight_decay == 0.0
        assert cfg.val_ratio == pytest.approx(0.2)
        assert cfg.early_stop_patience == 20

    def test_loss_carried_through(self):
        assert default_train_config("hatami", loss="mse").loss == "mse"


def tiny_images(n=48, channels=1, size=8, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, channels, size, size)).astype(np.float32)
    y = X.mean(axis=(1, 2, 3)) * 3.0
    return X, y.astype(np.float32)


def fast_params(**over):
    params = dict(architecture="hatami", epochs=8, batch_size=16,
                  lr=0.003, weight_decay=0.0, lr_milestones=(), seed=0)
    params.update(over)
    return params


class TestConvImageRegressor:
    def test_fit_predict_shapes(self):
        X, y = tiny_images()
        reg = ConvImageRegressor(**fast_params())
        reg.fit(X, y)
        pred = reg.predict(X)
        assert pred.shape == (len(X),)
        assert pred.dtype == np.float64
        assert reg.input_shape_ == (1, 8, 8)
        assert len(reg.loss_history_) == 8

    def test_learns_signal(self):
        X, y = tiny_images(n=128)
        reg = ConvImageRegressor(**fast_params(loss="mse", epochs=40))
        reg.fit(X, y)
        resid = reg.predict(X) - y
        assert np.sqrt(np.mean(resid ** 2)) < 0.5 * np.std(y)

    def test_quantile_interface(self):
        X, y = tiny_images()
        reg = ConvImageRegressor(**fast_params())
        reg.fit(X, y)
        q = reg.predict_quantiles(X)
        assert q.shape == (len(X), 3)
        lo, hi = reg.predict_interval(X)
        np.testing.assert_array_equal(lo, q[:, 0])
        np.testing.assert_array_equal(hi, q[:, 2])
        np.testing.assert_array_equal(reg.predict(X), q[:, 1])

    def test_quantile_api_rejected_for_mse(self):
        X, y = tiny_images()
        reg = ConvImageRegressor(**fast_params(loss="mse"))
        reg.fit(X, y)
        with pytest.raises(ConfigError):
            reg.predict_quantiles(X)

    def test_median_head_used_even_without_half(self):
        X, y = tiny_images()
        reg = ConvImageRegressor(**fast_params(quantiles=(0.1, 0.5, 0.9)))
        reg.fit(X, y)
        q = reg.predict_quantiles(X)
        np.testing.assert_array_equal(reg.predict(X), q[:, 1])

    def test_not_fitted(self):
        reg = ConvImageRegressor()
        with pytest.raises(NotFittedError):
            reg.predict(np.zeros((1, 1, 8, 8), dtype=np.float32))

    def test_input_validation(self):
        X, y = tiny_images()
        reg = ConvImageRegressor(**fast_params())
        with pytest.raises(ShapeError):
            reg.fit(X[:, 0], y)  # 3-D input for an image model
        with pytest.raises(ShapeError):
            reg.fit(X[:, :, :4, :], y)  # non-square images
        with pytest.raises(ShapeError):
            reg.fit(X, y[:-1])
        reg.fit(X, y)
        with pytest.raises(ShapeError):
            reg.predict(np.zeros((2, 1, 6, 6), dtype=np.float32))

    def test_cnn1d_takes_3d(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((32, 1, 16)).astype(np.float32)
        y = X[:, 0].mean(axis=1)
        reg = ConvImageRegressor(**fast_params(architecture="cnn1d"))
        reg.fit(X, y)
        assert reg.predict(X).shape == (32,)
        with pytest.raises(ShapeError):
            reg.fit(X[:, None], y)

    def test_seed_determinism(self):
        X, y = tiny_images()
        a = ConvImageRegressor(**fast_params()).fit(X, y)
        b = ConvImageRegressor(**fast_params()).fit(X, y)
        np.testing.assert_array_equal(a.predict(X), b.predict(X))
        c = ConvImageRegressor(**fast_params(seed=1)).fit(X, y)
        assert not np.array_equal(a.predict(X), c.predict(X))

    def test_sklearn_clone_and_params(self):
        reg = ConvImageRegressor(architecture="resnet20", epochs=3)
        cloned = clone(reg)
        assert cloned.get_params()["architecture"] == "resnet20"
        assert cloned.get_params()["epochs"] == 3
        reg.set_params(epochs=5)
        assert reg.epochs == 5

    def test_bad_architecture(self):
        X, y = tiny_images()
        with pytest.raises(ConfigError):
            ConvImageRegressor(architecture="vgg").fit(X, y)

    def test_bad_train_settings_collected(self):
        X, y = tiny_images()
        with pytest.raises(ConfigError):
            ConvImageRegressor(epochs=0, lr=-1.0).fit(X, y)

    def test_validation_split_and_early_stop(self):
        X, y = tiny_images(n=64)
        reg = ConvImageRegressor(**fast_params(
            epochs=60, val_ratio=0.25, early_stop_patience=3, loss="mse"))
        reg.fit(X, y)
        assert reg.epochs_run_ <= 60
        assert len(reg.val_history_) == reg.epochs_run_
