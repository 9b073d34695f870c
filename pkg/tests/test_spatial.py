import numpy as np
import pytest
import torch
from sklearn.base import clone

from evsr import SensorGeometry, SpatialConfig, SpatialSuperResolver, SynthConfig, VoxelGrid, decode, encode, infer_spatial, simulate, train_spatial
from evsr import nn
from evsr.exceptions import GridTooSmall, ScaleMismatch
from evsr.resample import apply_transform
from evsr.spatial import training_pairs
from evsr.voxel import decoded_lengths

FAST = dict(hidden=8, n_conv=4)


@pytest.fixture(scope="module")
def bar_grid():
    cfg = SynthConfig("bar", SensorGeometry(16, 16), (6.0, 0.0), 1.5, dt=5.0, size=4.0)
    return encode(simulate(cfg))


def test_identity_scale_learns_identity(bar_grid):
    model = train_spatial(bar_grid, SpatialConfig(scale=1, iterations=50))
    x = torch.as_tensor(bar_grid.data[None, None], dtype=model.net.dtype)
    with torch.no_grad():
        out = nn.forward(model.net, x)[0, 0].double().numpy()
    assert np.abs(out - bar_grid.data).mean() < 0.01
    sr = infer_spatial(model, bar_grid, 1)
    same = np.mean([decode(sr).get(k) == v for k, v in decode(bar_grid).items()])
    assert same >= 0.99


def test_pair_counts(bar_grid):
    assert len(training_pairs(bar_grid.data, SpatialConfig(augment=False))) == 1
    pairs = training_pairs(bar_grid.data, SpatialConfig())
    assert len(pairs) == 6
    assert all(lr.shape == hr.shape for lr, hr in pairs)


def test_training_reduces_loss(bar_grid):
    model = train_spatial(bar_grid, SpatialConfig(iterations=60, lr=3e-3, **FAST))
    losses = model.losses
    assert len(losses) == 60
    assert losses[-1] < losses[0]
    best = np.minimum.accumulate(losses)
    assert np.all(np.diff(best) <= 0)


def test_callback_and_tol(bar_grid):
    seen = []
    model = train_spatial(bar_grid, SpatialConfig(iterations=10, tol=1.0, **FAST), seen.append)
    assert len(model.history) == 1 and seen == model.history


def test_infer_shapes_and_range(bar_grid):
    model = train_spatial(bar_grid, SpatialConfig(iterations=5, **FAST))
    sr = infer_spatial(model, bar_grid)
    assert sr.data.shape == (bar_grid.L, 32, 32)
    assert sr.geometry == SensorGeometry(32, 32)
    assert sr.data.min() >= 0.25 and sr.data.max() <= 0.75
    assert np.array_equal(sr.data, infer_spatial(model, bar_grid).data)
    with pytest.raises(ScaleMismatch):
        infer_spatial(model, bar_grid, 3)


def test_all_padding_stays_empty(bar_grid):
    model = train_spatial(bar_grid, SpatialConfig(iterations=30, **FAST))
    blank = VoxelGrid(np.full((bar_grid.L, 16, 16), 0.5), bar_grid.geometry)
    sr = infer_spatial(model, blank)
    assert (decoded_lengths(sr.data, sr.coding) > 0).mean() <= 0.01


def test_grid_too_small():
    g = encode(simulate(SynthConfig(geometry=SensorGeometry(6, 6), velocity=(0.5, 0.0), duration=4.0, size=2)))
    with pytest.raises(GridTooSmall):
        train_spatial(g, SpatialConfig(scale=2, iterations=1))
    empty = VoxelGrid(np.zeros((0, 16, 16)), SensorGeometry(16, 16))
    with pytest.raises(GridTooSmall):
        train_spatial(empty, SpatialConfig(iterations=1))


def test_rotation_equivariance_smoke(bar_grid):
    cfg = SpatialConfig(iterations=40, **FAST)
    sr = infer_spatial(train_spatial(bar_grid, cfg), bar_grid)
    rot = VoxelGrid(apply_transform(bar_grid.data, "rot180"), bar_grid.geometry)
    sr_rot = infer_spatial(train_spatial(rot, cfg), rot)
    back = apply_transform(sr_rot.data, "rot180")
    n, m = decoded_lengths(sr.data, sr.coding).sum(), decoded_lengths(back, sr.coding).sum()
    assert abs(int(n) - int(m)) <= 0.1 * n


def test_estimator_api(bar_grid):
    est = SpatialSuperResolver(iterations=3, hidden=4, n_conv=3)
    assert est.get_params()["iterations"] == 3
    assert clone(est).get_params() == est.get_params()
    sr = est.fit(bar_grid).predict(bar_grid)
    assert sr.geometry == SensorGeometry(32, 32)
    assert len(est.loss_history_) == 3


def test_bad_config():
    with pytest.raises(ValueError):
        SpatialConfig(scale=0)
    with pytest.raises(ValueError):
        SpatialConfig(iterations=0)
