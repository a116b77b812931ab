"""Fully-connected tanh surrogate: training and exact input derivatives.

The network is a plain numpy MLP trained by Adam/AdamW on mean squared
error.  Inputs are affinely mapped to [-1, 1] per axis before the first
layer; derivative extraction seeds the input jets with the map's slope so
every reported derivative is already in physical units.

Derivatives of the fitted surface are computed by propagating truncated
multivariate Taylor jets through the layers (see `taylor`), never by
finite differences.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import taylor
from .pde_data import DomainSpec, ScatteredDataset, derivative_orders

SUPPORTED_ORDERS = {"x": 3, "y": 2, "t": 2}
MAX_MIXED = {"u_xt", "u_tx"}  # mixed requests beyond pure-axis orders


class UnsupportedDerivativeError(ValueError):
    pass


class TrainingDivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class SurrogateParams:
    """Weights, biases and the input normalization of a tanh MLP."""

    layer_sizes: tuple[int, ...]
    weights: tuple[np.ndarray, ...]      # each (out, in)
    biases: tuple[np.ndarray, ...]       # each (out,)
    input_scale: np.ndarray              # per-axis slope of x -> [-1, 1]
    input_shift: np.ndarray
    activation: str = "tanh"

    def __post_init__(self):
        if self.activation != "tanh":
            raise ValueError(
                "hidden activation must be tanh (smooth derivatives required)"
            )
        sizes = self.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ValueError("layer count mismatch")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[i + 1], sizes[i]) or b.shape != (sizes[i + 1],):
                raise ValueError(f"layer {i} has inconsistent shapes")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {i} has non-finite entries")

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]


@dataclass(frozen=True)
class TrainConfig:
    optimizer: str = "adamw"             # adam | adamw
    learning_rate: float = 5e-4
    weight_decay: float = 0.01
    batch_size: int | None = 20          # None = full batch
    epochs: int = 200
    seed: int = 0
    holdout_fraction: float = 0.1
    full_data: bool = False              # train on all points, holdout kept for diagnostics

    def __post_init__(self):
        if self.optimizer not in ("adam", "adamw"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be >= 1 or None for full batch")
        if not 0.0 <= self.holdout_fraction < 1.0:
            raise ValueError("holdout_fraction must be in [0, 1)")


@dataclass
class LossTrace:
    train_mse: list[float] = field(default_factory=list)
    holdout_mse: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class DerivativeBundle:
    """Surrogate value and requested partial derivatives at one point."""

    values: dict[str, float]

    def __getitem__(self, descriptor: str) -> float:
        return self.values[descriptor]

    @property
    def orders_present(self) -> frozenset[str]:
        return frozenset(self.values)


# --------------------------------------------------------------------------
# initialization and forward pass
# --------------------------------------------------------------------------

def domain_normalization(domain: DomainSpec) -> tuple[np.ndarray, np.ndarray]:
    bounds = np.asarray(domain.bounds)
    scale = 2.0 / (bounds[:, 1] - bounds[:, 0])
    shift = -(bounds[:, 1] + bounds[:, 0]) / (bounds[:, 1] - bounds[:, 0])
    return scale, shift


def init_params(layer_sizes, domain: DomainSpec, seed: int,
                output_bias: float = 0.0) -> SurrogateParams:
    """Symmetric uniform init scaled by 1/sqrt(fan_in), seeded."""
    sizes = tuple(layer_sizes)
    if sizes[0] != domain.spatial_dim + 1:
        raise ValueError("input layer width must equal spatial_dim + 1")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    biases[-1] = biases[-1] + output_bias
    scale, shift = domain_normalization(domain)
    return SurrogateParams(sizes, tuple(weights), tuple(biases), scale, shift)


def forward(params: SurrogateParams, points: np.ndarray) -> np.ndarray:
    """Surrogate value at one point (d+1,) or a batch (N, d+1)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != params.input_dim:
        raise ValueError(
            f"point dimension {pts.shape[1]} does not match input layer {params.input_dim}"
        )
    a = pts * params.input_scale + params.input_shift
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        a = a @ w.T + b
        if i < last:                     # linear head
            a = np.tanh(a)
    out = a[:, 0]
    return out if np.ndim(points) == 2 else float(out[0])


# --------------------------------------------------------------------------
# training
# --------------------------------------------------------------------------

def _mse(params, points, values) -> float:
    return float(np.mean((forward(params, points) - values) ** 2))


def _eval_mse(weights, biases, x, y) -> float:
    """Forward-only MSE on normalized inputs x (N, d)."""
    a = x
    last = len(weights) - 1
    for i, (w, b) in enumerate(zip(weights, biases)):
        a = a @ w.T + b
        if i < last:
            a = np.tanh(a)
    return float(np.mean((a[:, 0] - y) ** 2))


def _forward_backward(weights, biases, x, y):
    """MSE loss and gradients for normalized inputs x (N, d)."""
    n = len(x)
    acts = [x]
    pre = []
    a = x
    last = len(weights) - 1
    for i, (w, b) in enumerate(zip(weights, biases)):
        z = a @ w.T + b
        pre.append(z)
        a = np.tanh(z) if i < last else z
        acts.append(a)
    resid = acts[-1][:, 0] - y
    loss = float(np.mean(resid ** 2))
    grad_w = [None] * len(weights)
    grad_b = [None] * len(weights)
    delta = (2.0 / n) * resid[:, None]
    for i in range(last, -1, -1):
        grad_w[i] = delta.T @ acts[i]
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i]) * (1.0 - np.tanh(pre[i - 1]) ** 2)
    return loss, grad_w, grad_b


def train(ds: ScatteredDataset, layer_sizes, cfg: TrainConfig,
          checkpoint_epochs: tuple[int, ...] = (),
          ) -> tuple[SurrogateParams, LossTrace, dict[int, SurrogateParams]]:
    """Fit the surrogate by seeded mini-batch Adam/AdamW on MSE.

    Returns the final parameters, the per-epoch loss trace, and parameter
    snapshots at each requested checkpoint epoch.
    """
    rng = np.random.default_rng(cfg.seed)
    n = len(ds)
    perm = rng.permutation(n)
    n_hold = int(round(cfg.holdout_fraction * n))
    hold_idx = perm[:n_hold]
    train_idx = perm if cfg.full_data else perm[n_hold:]
    if len(train_idx) == 0:
        raise ValueError("holdout split left no training points")

    params = init_params(layer_sizes, ds.domain, cfg.seed,
                         output_bias=float(np.mean(ds.values[train_idx])))
    weights = [w.copy() for w in params.weights]
    biases = [b.copy() for b in params.biases]

    x_all = ds.points * params.input_scale + params.input_shift
    x_train, y_train = x_all[train_idx], ds.values[train_idx]
    x_hold, y_hold = x_all[hold_idx], ds.values[hold_idx]

    m_w = [np.zeros_like(w) for w in weights]
    v_w = [np.zeros_like(w) for w in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    lr, wd = cfg.learning_rate, cfg.weight_decay
    step = 0
    batch = len(x_train) if cfg.batch_size is None else min(cfg.batch_size, len(x_train))

    trace = LossTrace()
    snapshots: dict[int, SurrogateParams] = {}

    def current_params() -> SurrogateParams:
        return replace(params, weights=tuple(w.copy() for w in weights),
                       biases=tuple(b.copy() for b in biases))

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(x_train))
        for start in range(0, len(x_train), batch):
            idx = order[start:start + batch]
            loss, gw, gb = _forward_backward(weights, biases, x_train[idx], y_train[idx])
            if not np.isfinite(loss):
                raise TrainingDivergenceError(
                    f"non-finite loss at epoch {epoch}, step {step}"
                )
            step += 1
            c1 = 1.0 - beta1 ** step
            c2 = 1.0 - beta2 ** step
            for arrs, grads, ms, vs, decay in (
                (weights, gw, m_w, v_w, True),
                (biases, gb, m_b, v_b, False),
            ):
                for a, g, m, v in zip(arrs, grads, ms, vs):
                    m *= beta1
                    m += (1 - beta1) * g
                    v *= beta2
                    v += (1 - beta2) * g * g
                    update = (m / c1) / (np.sqrt(v / c2) + eps)
                    if cfg.optimizer == "adamw" and decay:
                        update = update + wd * a
                    a -= lr * update
        if batch == len(x_train):
            train_loss = loss        # full batch: the step loss is the epoch loss
        else:
            train_loss = _eval_mse(weights, biases, x_train, y_train)
        trace.train_mse.append(train_loss)
        if len(x_hold):
            trace.holdout_mse.append(_eval_mse(weights, biases, x_hold, y_hold))
        if epoch in checkpoint_epochs:
            snapshots[epoch] = current_params()

    if trace.holdout_mse and trace.train_mse[-1] > 0:
        ratio = trace.holdout_mse[-1] / trace.train_mse[-1]
        if ratio > 5.0:
            warnings.warn(
                f"holdout/train loss ratio {ratio:.2f} exceeds 5x at final epoch",
                RuntimeWarning, stacklevel=2,
            )
    return current_params(), trace, snapshots


# --------------------------------------------------------------------------
# exact input derivatives via Taylor jets
# --------------------------------------------------------------------------

def _axes_for(params: SurrogateParams) -> tuple[str, ...]:
    return ("x", "t") if params.input_dim == 2 else ("x", "y", "t")


def _validate_request(request, axes) -> dict[str, tuple[int, ...]]:
    orders = {}
    for name in request:
        per_axis = derivative_orders(name, axes)  # raises on unknown descriptor
        for ax, order in zip(axes, per_axis):
            if order > SUPPORTED_ORDERS[ax]:
                raise UnsupportedDerivativeError(
                    f"{name!r}: order {order} in {ax} exceeds supported "
                    f"{SUPPORTED_ORDERS[ax]}"
                )
        if sum(1 for o in per_axis if o) > 1 and name not in MAX_MIXED:
            raise UnsupportedDerivativeError(f"unsupported mixed derivative {name!r}")
        orders[name] = per_axis
    return orders


def derivative_table(params: SurrogateParams, points: np.ndarray,
                     request: set[str]) -> dict[str, np.ndarray]:
    """Exact derivatives of forward() at a batch of points, as arrays."""
    axes = _axes_for(params)
    orders = _validate_request(request, axes)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != params.input_dim:
        raise ValueError("point dimension does not match input layer")
    caps = tuple(
        max((o[i] for o in orders.values()), default=0) for i in range(len(axes))
    )
    norm = pts * params.input_scale + params.input_shift
    jets = [
        taylor.variable(norm[:, i], i, caps, scale=params.input_scale[i])
        for i in range(len(axes))
    ]
    # stack per-variable jets into one (N, d, box) activation jet
    a = taylor.Jet(np.stack([j.coeffs for j in jets], axis=1), caps)
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = np.einsum("vw,nw...->nv...", w, a.coeffs)
        z[(slice(None), slice(None), *([0] * len(caps)))] += b
        a = taylor.Jet(z, caps)
        if i < last:
            a = taylor.tanh(a)
    out = taylor.Jet(a.coeffs[:, 0], caps)
    return {name: out.derivative(per_axis) for name, per_axis in orders.items()}


def input_derivatives(params: SurrogateParams, point, request) -> DerivativeBundle:
    table = derivative_table(params, np.asarray(point, dtype=float)[None, :], set(request))
    values = {k: float(v[0]) for k, v in table.items()}
    for v in values.values():
        if not np.isfinite(v):
            raise ValueError("non-finite derivative value")
    return DerivativeBundle(values)


def batch_bundles(params: SurrogateParams, points, request) -> list[DerivativeBundle]:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) == 0:
        return []
    table = derivative_table(params, points, set(request))
    bundles = []
    for i in range(len(points)):
        vals = {k: float(v[i]) for k, v in table.items()}
        for name, v in vals.items():
            if not np.isfinite(v):
                raise ValueError(f"non-finite {name} at point index {i}")
        bundles.append(DerivativeBundle(vals))
    return bundles


# --------------------------------------------------------------------------
# checkpoint I/O
# --------------------------------------------------------------------------

def save_checkpoint(params: SurrogateParams, path: str | Path):
    doc = {
        "layer_sizes": list(params.layer_sizes),
        "input_scale": [repr(float(v)) for v in params.input_scale],
        "input_shift": [repr(float(v)) for v in params.input_shift],
        "weights": [[repr(float(v)) for v in w.ravel()] for w in params.weights],
        "biases": [[repr(float(v)) for v in b] for b in params.biases],
        "activation": params.activation,
    }
    Path(path).write_text(json.dumps(doc))


def load_checkpoint(path: str | Path) -> SurrogateParams:
    doc = json.loads(Path(path).read_text())
    sizes = tuple(doc["layer_sizes"])
    weights = tuple(
        np.asarray([float(v) for v in w]).reshape(sizes[i + 1], sizes[i])
        for i, w in enumerate(doc["weights"])
    )
    biases = tuple(np.asarray([float(v) for v in b]) for b in doc["biases"])
    return SurrogateParams(
        layer_sizes=sizes, weights=weights, biases=biases,
        input_scale=np.asarray([float(v) for v in doc["input_scale"]]),
        input_shift=np.asarray([float(v) for v in doc["input_shift"]]),
        activation=doc.get("activation", "tanh"),
    )
