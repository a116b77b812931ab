"""Surrogate training and exact derivative extraction."""

import warnings

import numpy as np
import pytest

from conftest import fd_axis_derivative, fd_mixed_xt
from meshfree_sindy.network import (SurrogateParams, TrainConfig,
                                    TrainingDivergenceError,
                                    UnsupportedDerivativeError, batch_bundles,
                                    derivative_table, domain_normalization,
                                    forward, init_params, input_derivatives,
                                    load_checkpoint, save_checkpoint, train)
from meshfree_sindy.pde_data import DomainSpec, ScatteredDataset
from meshfree_sindy.presets import get_problem


def _toy_dataset(n=200, seed=0):
    dom = DomainSpec(((0.0, 2.0),), (0.0, 1.0))
    rng = np.random.default_rng(seed)
    pts = np.column_stack([rng.uniform(0, 2, n), rng.uniform(0, 1, n)])
    vals = np.sin(2 * pts[:, 0]) * np.exp(-pts[:, 1])
    return ScatteredDataset(points=pts, values=vals, domain=dom)


def _random_params(seed=5, sizes=(2, 8, 8, 1)):
    dom = DomainSpec(((0.0, 2.0),), (0.0, 1.0))
    return init_params(sizes, dom, seed=seed)


# --------------------------------------------------------------------------
# construction and forward pass
# --------------------------------------------------------------------------

def test_normalization_maps_domain_to_unit_box():
    dom = DomainSpec(((0.0, 4.0), (-1.0, 1.0)), (0.0, 2.0))
    scale, shift = domain_normalization(dom)
    lo = np.array([0.0, -1.0, 0.0]) * scale + shift
    hi = np.array([4.0, 1.0, 2.0]) * scale + shift
    np.testing.assert_allclose(lo, -1.0)
    np.testing.assert_allclose(hi, 1.0)


def test_params_invariants():
    dom = DomainSpec(((0.0, 1.0),), (0.0, 1.0))
    p = init_params((2, 4, 1), dom, seed=0)
    with pytest.raises(ValueError):
        SurrogateParams(p.layer_sizes, p.weights, p.biases,
                        p.input_scale, p.input_shift, activation="relu")
    with pytest.raises(ValueError):
        init_params((3, 4, 1), dom, seed=0)   # wrong input width


def test_forward_scalar_and_batch_agree():
    p = _random_params()
    pts = np.array([[0.3, 0.7], [1.5, 0.2]])
    batch = forward(p, pts)
    singles = [forward(p, pts[i]) for i in range(2)]
    np.testing.assert_allclose(batch, singles)


# --------------------------------------------------------------------------
# training
# --------------------------------------------------------------------------

def test_training_reduces_loss_and_is_deterministic():
    ds = _toy_dataset()
    cfg = TrainConfig(optimizer="adam", learning_rate=3e-3, weight_decay=0.0,
                      batch_size=32, epochs=60, seed=3)
    p1, trace1, _ = train(ds, (2, 16, 16, 1), cfg)
    p2, trace2, _ = train(ds, (2, 16, 16, 1), cfg)
    assert trace1.train_mse[-1] < 0.25 * trace1.train_mse[0]
    assert trace1.train_mse == trace2.train_mse
    for w1, w2 in zip(p1.weights, p2.weights):
        np.testing.assert_array_equal(w1, w2)
    assert len(trace1.holdout_mse) == cfg.epochs


def test_training_divergence_raises():
    ds = _toy_dataset()
    # decoupled weight decay at this learning rate multiplies the weights
    # geometrically each step, so the loss overflows within a few epochs
    cfg = TrainConfig(optimizer="adamw", learning_rate=1e18, weight_decay=1.0,
                      batch_size=None, epochs=50, seed=0)
    with pytest.raises(TrainingDivergenceError):
        train(ds, (2, 8, 1), cfg)


def test_checkpoint_snapshots_track_epochs():
    ds = _toy_dataset()
    cfg = TrainConfig(optimizer="adam", learning_rate=3e-3, weight_decay=0.0,
                      batch_size=None, epochs=30, seed=1)
    final, _, snaps = train(ds, (2, 8, 1), cfg, checkpoint_epochs=(10, 30))
    assert set(snaps) == {10, 30}
    for w_final, w_snap in zip(final.weights, snaps[30].weights):
        np.testing.assert_array_equal(w_final, w_snap)
    assert any(not np.array_equal(a, b)
               for a, b in zip(snaps[10].weights, snaps[30].weights))


def test_invalid_configs_rejected():
    with pytest.raises(ValueError):
        TrainConfig(optimizer="sgd")
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        TrainConfig(holdout_fraction=1.0)


# --------------------------------------------------------------------------
# derivatives: jets vs the FD oracle
# --------------------------------------------------------------------------

def test_derivative_table_matches_fd_1d():
    p = _random_params()
    pts = np.column_stack([np.linspace(0.2, 1.8, 15), np.linspace(0.1, 0.9, 15)])
    request = {"u", "u_x", "u_xx", "u_xxx", "u_t", "u_tt", "u_xt"}
    table = derivative_table(p, pts, request)
    fn = lambda q: forward(p, q)
    np.testing.assert_allclose(table["u"], fn(pts), rtol=1e-12)
    cases = [("u_x", 0, 1, 1e-3, 1e-8), ("u_xx", 0, 2, 1e-3, 1e-6),
             ("u_xxx", 0, 3, 5e-3, 1e-4), ("u_t", 1, 1, 1e-3, 1e-8),
             ("u_tt", 1, 2, 1e-3, 1e-6)]
    for name, axis, order, h, tol in cases:
        fd = fd_axis_derivative(fn, pts, axis, order, h)
        np.testing.assert_allclose(table[name], fd, atol=tol, rtol=1e-6)
    fd_xt = fd_mixed_xt(fn, pts, 0, 1, 1e-3)
    np.testing.assert_allclose(table["u_xt"], fd_xt, atol=1e-6, rtol=1e-6)


def test_derivative_table_matches_fd_2d():
    dom = DomainSpec(((0.0, 1.0), (0.0, 1.0)), (0.0, 1.0))
    p = init_params((3, 10, 10, 1), dom, seed=8)
    rng = np.random.default_rng(0)
    pts = rng.uniform(0.2, 0.8, size=(12, 3))
    request = {"u_x", "u_y", "u_xx", "u_yy", "u_t"}
    table = derivative_table(p, pts, request)
    fn = lambda q: forward(p, q)
    for name, axis, order in [("u_x", 0, 1), ("u_y", 1, 1), ("u_xx", 0, 2),
                              ("u_yy", 1, 2), ("u_t", 2, 1)]:
        fd = fd_axis_derivative(fn, pts, axis, order, 1e-3)
        np.testing.assert_allclose(table[name], fd, atol=1e-6, rtol=1e-6)


def test_input_derivatives_and_batch_bundles_agree():
    p = _random_params()
    pts = np.array([[0.4, 0.5], [1.1, 0.3]])
    request = {"u", "u_x", "u_t"}
    bundles = batch_bundles(p, pts, request)
    single = input_derivatives(p, pts[1], request)
    assert bundles[1].orders_present == frozenset(request)
    for k in request:
        assert bundles[1][k] == pytest.approx(single[k], rel=1e-12)


def test_unsupported_derivatives_rejected():
    p = _random_params()
    pts = np.array([[0.5, 0.5]])
    with pytest.raises(UnsupportedDerivativeError):
        derivative_table(p, pts, {"u_xxxx"})
    with pytest.raises(UnsupportedDerivativeError):
        derivative_table(p, pts, {"u_ttt"})
    with pytest.raises(ValueError):
        derivative_table(p, pts, {"u_z"})


def test_presets_support_their_own_requests():
    for name in ("burgers", "heat", "kdv", "advdiff"):
        prob = get_problem(name)
        p = init_params(prob.layer_sizes, prob.domain, seed=0)
        lo = np.array([b[0] for b in prob.domain.bounds])
        hi = np.array([b[1] for b in prob.domain.bounds])
        pts = (0.25 * lo + 0.75 * hi)[None, :]
        table = derivative_table(p, pts, prob.request)
        assert set(table) == set(prob.request)


# --------------------------------------------------------------------------
# checkpoint I/O
# --------------------------------------------------------------------------

def test_checkpoint_roundtrip_bit_exact(tmp_path):
    ds = _toy_dataset(n=60)
    cfg = TrainConfig(optimizer="adamw", learning_rate=1e-3, weight_decay=0.01,
                      batch_size=16, epochs=5, seed=2)
    p, _, _ = train(ds, (2, 8, 1), cfg)
    path = tmp_path / "ckpt.json"
    save_checkpoint(p, path)
    q = load_checkpoint(path)
    assert q.layer_sizes == p.layer_sizes
    for a, b in zip(p.weights, q.weights):
        np.testing.assert_array_equal(a, b)
    for a, b in zip(p.biases, q.biases):
        np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(p.input_scale, q.input_scale)
