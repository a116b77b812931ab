"""Per-equation problem presets: domain, exact field, ground truth,
candidate library, surrogate architecture, and solver configuration.

Hyperparameters follow the discovery experiments for each equation; the
2D advection-diffusion surrogate is scaled down from the original eight
60-unit layers to a desk-scale network that trains in seconds with the
same full-batch regime.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import sympy as sp

from . import pde_data
from .dictionary import TermDescriptor, preset_terms, required_primitives
from .network import TrainConfig
from .pde_data import DomainSpec, PdeTruth
from .solvers import SolverSpec


@dataclass(frozen=True)
class EnsembleConfig:
    n_replicates: int = 100
    subsample_fraction: float = 0.8
    inclusion_cutoff: float = 0.6

    def subsample_size(self, n: int) -> int:
        return min(n, max(1, int(np.ceil(self.subsample_fraction * n))))


@dataclass(frozen=True)
class PdeProblem:
    name: str
    domain: DomainSpec
    parameters: dict
    truth: PdeTruth
    terms: tuple[TermDescriptor, ...]
    hidden_layers: tuple[int, ...]
    train: TrainConfig
    solver: SolverSpec
    ensemble: EnsembleConfig = EnsembleConfig()

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.domain.spatial_dim + 1, *self.hidden_layers, 1)

    @property
    def request(self) -> frozenset[str]:
        return required_primitives(self.terms) | {"u_t"}

    @property
    def labels(self) -> list[str]:
        return [t.label for t in self.terms]

    def field(self, points: np.ndarray) -> np.ndarray:
        """Exact solution values at (N, d+1) scattered points."""
        points = np.atleast_2d(points)
        return _field_fn(self.name, _param_key(self.parameters))(points)

    def expr(self):
        return _problem_expr(self.name, _param_key(self.parameters))

    def analytic_table(self, points: np.ndarray, request) -> dict[str, np.ndarray]:
        """Exact derivatives of the closed-form field (sympy oracle)."""
        expr, symbols = self.expr()
        points = np.atleast_2d(points)
        cols = [points[:, i] for i in range(points.shape[1])]
        out = {}
        for name in sorted(request):
            fn = _lambdified(self.name, _param_key(self.parameters), name)
            out[name] = np.asarray(fn(*cols), dtype=float)
        return out


def _param_key(parameters: dict) -> tuple:
    return tuple(sorted(parameters.items()))


def _field_fn(name: str, key: tuple):
    p = dict(key)
    if name == "burgers":
        return lambda pts: pde_data.burgers_exact(pts[:, 0], pts[:, 1], p["nu"])
    if name == "heat":
        return lambda pts: pde_data.heat_exact(pts[:, 0], pts[:, 1], p["nu"], p["q_max"])
    if name == "kdv":
        return lambda pts: pde_data.kdv_two_soliton(
            pts[:, 0], pts[:, 1], p["c1"], p["c2"], p["a1"], p["a2"])
    if name == "advdiff":
        return lambda pts: pde_data.advdiff_exact(
            pts[:, 0], pts[:, 1], pts[:, 2],
            (p["cx"], p["cy"]), p["K"], (p["x0"], p["y0"]), p["t0"], p["A"])
    raise ValueError(f"unknown problem {name!r}")


@lru_cache(maxsize=None)
def _problem_expr(name: str, key: tuple):
    p = dict(key)
    if name == "burgers":
        return pde_data.burgers_expr(p["nu"])
    if name == "heat":
        return pde_data.heat_expr(p["nu"], p["q_max"])
    if name == "kdv":
        return pde_data.kdv_expr(p["c1"], p["c2"], p["a1"], p["a2"])
    if name == "advdiff":
        return pde_data.advdiff_expr(
            (p["cx"], p["cy"]), p["K"], (p["x0"], p["y0"]), p["t0"], p["A"])
    raise ValueError(f"unknown problem {name!r}")


@lru_cache(maxsize=None)
def _lambdified(name: str, key: tuple, descriptor: str):
    expr, symbols = _problem_expr(name, key)
    axes = tuple(str(s) for s in symbols)
    orders = pde_data.derivative_orders(descriptor, axes)
    deriv = expr
    for sym, order in zip(symbols, orders):
        if order:
            deriv = sp.diff(deriv, sym, order)
    return sp.lambdify(symbols, deriv, modules="numpy", cse=True)


# --------------------------------------------------------------------------
# the four presets
# --------------------------------------------------------------------------

def _burgers() -> PdeProblem:
    nu = 0.5
    return PdeProblem(
        name="burgers",
        domain=DomainSpec(((0.0, 2 * np.pi),), (0.0, 1.0)),
        parameters={"nu": nu},
        truth=PdeTruth("burgers", ("u*u_x", "u_xx"), (-1.0, nu), {"nu": nu}),
        terms=tuple(preset_terms("burgers")),
        hidden_layers=(32, 32),
        train=TrainConfig(optimizer="adamw", learning_rate=5e-4, weight_decay=0.01,
                          batch_size=20, epochs=200),
        solver=SolverSpec("stlsq", {"threshold": 0.14, "alpha": 0.05}),
    )


def _heat() -> PdeProblem:
    nu, q_max = 1.0, 32
    return PdeProblem(
        name="heat",
        domain=DomainSpec(((0.0, np.pi),), (0.0, 0.5)),
        parameters={"nu": nu, "q_max": q_max},
        truth=PdeTruth("heat", ("u_xx",), (nu,), {"nu": nu, "q_max": q_max}),
        terms=tuple(preset_terms("heat")),
        hidden_layers=(128, 128, 128, 128),
        train=TrainConfig(optimizer="adam", learning_rate=2e-4, weight_decay=0.0,
                          batch_size=20, epochs=300),
        solver=SolverSpec("best_subset", {"alpha": 0.05, "max_support": 5}),
    )


def _kdv() -> PdeProblem:
    params = {"c1": 5.0, "c2": 2.0, "a1": -2.0, "a2": 2.0}
    return PdeProblem(
        name="kdv",
        domain=DomainSpec(((-10.0, 10.0),), (0.0, 1.0)),
        parameters=params,
        truth=PdeTruth("kdv", ("u*u_x", "u_xxx"), (-6.0, -1.0), params),
        terms=tuple(preset_terms("kdv")),
        hidden_layers=(30, 30, 30, 30),
        train=TrainConfig(optimizer="adam", learning_rate=1e-3, weight_decay=0.0,
                          batch_size=None, epochs=10000),
        solver=SolverSpec("best_subset", {"alpha": 0.05, "max_support": 5}),
    )


def _advdiff() -> PdeProblem:
    # Amplitude and width are chosen so the initial Gaussian has unit peak
    # and spans a few widths of the sampling box; the governing-equation
    # coefficients depend only on c and K.
    params = {"cx": 0.25, "cy": 0.5, "K": 0.5, "x0": 1.0, "y0": 1.0,
              "t0": 2.0, "A": 4 * np.pi}
    return PdeProblem(
        name="advdiff",
        domain=DomainSpec(((-5.0, 6.0), (-5.0, 6.0)), (0.0, 2.0)),
        parameters=params,
        truth=PdeTruth(
            "advdiff", ("u_x", "u_y", "u_xx", "u_yy"),
            (-params["cx"], -params["cy"], params["K"], params["K"]), params),
        terms=tuple(preset_terms("advdiff")),
        hidden_layers=(40, 40, 40),
        train=TrainConfig(optimizer="adam", learning_rate=1e-3, weight_decay=0.0,
                          batch_size=None, epochs=3000),
        solver=SolverSpec("best_subset",
                          {"alpha": 5e-4, "max_support": 5,
                           "penalty_scale": 0.02}),
    )


_BUILDERS = {"burgers": _burgers, "heat": _heat, "kdv": _kdv, "advdiff": _advdiff}
PRESETS = tuple(_BUILDERS)


@lru_cache(maxsize=None)
def get_problem(name: str) -> PdeProblem:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; expected one of {PRESETS}") from None


def with_overrides(problem: PdeProblem, overrides: dict | None) -> PdeProblem:
    """Apply preset overrides (architecture, epochs, solver and ensemble
    hyperparameters) to a problem definition."""
    if not overrides:
        return problem
    allowed = {"hidden_layers", "train", "solver", "ensemble"}
    unknown = set(overrides) - allowed
    if unknown:
        raise ValueError(f"unknown preset overrides {sorted(unknown)}; "
                         f"allowed: {sorted(allowed)}")
    out = problem
    if "hidden_layers" in overrides:
        out = replace(out, hidden_layers=tuple(overrides["hidden_layers"]))
    if "train" in overrides:
        out = replace(out, train=replace(out.train, **overrides["train"]))
    if "solver" in overrides:
        spec = overrides["solver"]
        if isinstance(spec, SolverSpec):
            out = replace(out, solver=spec)
        else:
            kind = spec.get("kind", out.solver.kind)
            params = {**out.solver.params, **{k: v for k, v in spec.items() if k != "kind"}}
            if kind != out.solver.kind:
                params = {k: v for k, v in spec.items() if k != "kind"}
            out = replace(out, solver=SolverSpec(kind, params))
    if "ensemble" in overrides:
        out = replace(out, ensemble=replace(out.ensemble, **overrides["ensemble"]))
    return out
