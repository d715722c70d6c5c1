import numpy as np
import pytest

from vineseg.net.network import NetworkConfig, TrainConfig, build_network
from vineseg.net.train import (patches_to_arrays, sgd_step, train,
                               write_cost_history)
from vineseg.patching import Patch


def make_patches(n, side=64, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        img = np.full((side, side, 3), 200, dtype=np.uint8)
        mask = np.zeros((side, side), dtype=bool)
        cy, cx = rng.integers(8, side - 8, size=2)
        mask[cy - 4:cy + 4, cx - 4:cx + 4] = True
        img[mask] = 40
        out.append(Patch(0, 0, img, mask))
    return out


class TestSgdStep:
    def test_single_update(self):
        w = np.array([1.0])
        g = np.array([2.0])
        sgd_step([("w", w, g)], [np.zeros(1)], 0.1, 0.0)
        assert w[0] == pytest.approx(0.8)

    def test_momentum_accumulates(self):
        w = np.array([0.0])
        g = np.array([1.0])
        v = np.zeros(1)
        sgd_step([("w", w, g)], [v], 0.1, 0.9)
        assert w[0] == pytest.approx(-0.1)
        sgd_step([("w", w, g)], [v], 0.1, 0.9)
        # v = 0.9*(-0.1) - 0.1 = -0.19; w = -0.1 - 0.19
        assert w[0] == pytest.approx(-0.29)

    def test_zero_gradient_no_change(self):
        w = np.array([3.0])
        sgd_step([("w", w, np.zeros(1))], [np.zeros(1)], 0.5, 0.0)
        assert w[0] == 3.0


class TestPatchesToArrays:
    def test_scaling_and_targets(self):
        patches = make_patches(2)
        x, y = patches_to_arrays(patches)
        assert x.shape == (2, 64, 64, 3)
        assert y.shape == (2, 64, 64)
        assert 0.0 <= x.min() and x.max() <= 1.0
        assert set(np.unique(y)) <= {0, 1}
        # object pixels are class 0
        assert (y[0][patches[0].mask] == 0).all()
        assert (y[0][~patches[0].mask] == 1).all()

    def test_missing_mask_rejected(self):
        p = Patch(0, 0, np.zeros((8, 8, 3), dtype=np.uint8), None)
        with pytest.raises(ValueError):
            patches_to_arrays([p])


class TestTrainLoop:
    def test_cost_decreases(self):
        net = build_network(NetworkConfig.toy(), seed=0)
        patches = make_patches(6)
        cfg = TrainConfig(batch_size=3, learning_rate=1e-3, epochs=4,
                          momentum=0.9)
        history = train(net, patches, cfg)
        assert len(history) == 4
        assert history[-1] < history[0]
        assert net.epochs_run == 4
        assert net.final_cost == history[-1]

    def test_full_batch_equals_batch_size_n(self):
        patches = make_patches(4, seed=3)
        results = []
        for bs in (4, 7):   # both cover the whole set in one batch
            net = build_network(NetworkConfig.toy(), seed=2)
            history = train(net, patches, TrainConfig(
                batch_size=bs, learning_rate=1e-3, epochs=2))
            results.append((history, [w.copy() for _, w, _ in net.params()]))
        assert results[0][0] == results[1][0]
        for a, b in zip(results[0][1], results[1][1]):
            assert np.array_equal(a, b)

    def test_bitwise_deterministic(self):
        patches = make_patches(5, seed=7)
        weights = []
        for _ in range(2):
            net = build_network(NetworkConfig.toy(), seed=11)
            train(net, patches, TrainConfig(batch_size=2, learning_rate=1e-3,
                                            epochs=2, shuffle_seed=5))
            weights.append([w.copy() for _, w, _ in net.params()])
        for a, b in zip(*weights):
            assert np.array_equal(a, b)

    def test_shuffle_seed_changes_order(self):
        patches = make_patches(5, seed=7)
        nets = []
        for seed in (0, 1):
            net = build_network(NetworkConfig.toy(), seed=11)
            train(net, patches, TrainConfig(batch_size=2, learning_rate=1e-2,
                                            epochs=1, shuffle_seed=seed))
            nets.append(net)
        diffs = [not np.array_equal(a, b) for (_, a, _), (_, b, _) in
                 zip(nets[0].params(), nets[1].params())]
        assert any(diffs)

    def test_empty_set_rejected(self):
        net = build_network(NetworkConfig.toy(), seed=0)
        with pytest.raises(ValueError, match="empty"):
            train(net, [], TrainConfig())

    def test_bad_hyperparameters_rejected(self):
        net = build_network(NetworkConfig.toy(), seed=0)
        patches = make_patches(2)
        with pytest.raises(ValueError):
            train(net, patches, TrainConfig(batch_size=0))
        with pytest.raises(ValueError):
            train(net, patches, TrainConfig(learning_rate=0.0))

    def test_progress_callback(self):
        net = build_network(NetworkConfig.toy(), seed=0)
        seen = []
        train(net, make_patches(2), TrainConfig(batch_size=2, learning_rate=1e-3,
                                                epochs=3),
              progress=lambda e, c: seen.append((e, c)))
        assert [e for e, _ in seen] == [0, 1, 2]


class TestCostHistory:
    def test_csv_format(self, tmp_path):
        path = tmp_path / "cost.csv"
        write_cost_history([0.7, 0.5, 0.25], path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "epoch,mean_cost"
        assert lines[1].startswith("1,0.7")
        assert lines[3].startswith("3,0.25")
        assert len(lines) == 4
