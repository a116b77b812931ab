"""Discovery error metrics and the binary success judgment.

Five mean-squared error metrics compare the pipeline against ground
truth; success requires recovering the exact true support with matching
coefficient signs (no magnitude tolerance, matching how heavily biased
but structurally correct recoveries are still counted as successes).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .dictionary import Dictionary
from .network import SurrogateParams, forward
from .pde_data import PdeTruth, ScatteredDataset
from .solvers import SparseModel


@dataclass(frozen=True)
class MetricReport:
    e_pde: float
    e_nn: float
    e_dudt: float
    e_sindy: float
    e_field: float
    n_points: int

    def __post_init__(self):
        for name, v in asdict(self).items():
            if name != "n_points" and (v < 0 or not np.isfinite(v)):
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")

    def as_dict(self) -> dict:
        return asdict(self)


def _mean_sq(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def e_pde(true_dudt: np.ndarray, model: SparseModel, theta: np.ndarray) -> float:
    """Mean squared residual of the discovered model against the true u_t."""
    return _mean_sq(true_dudt, model.predict(theta))


def e_nn(ds: ScatteredDataset, params: SurrogateParams) -> float:
    """MSE of the surrogate against the (possibly noisy) observed values."""
    if len(ds) == 0:
        raise ValueError("empty dataset")
    return _mean_sq(ds.values, forward(params, ds.points))


def e_dudt(true_dudt: np.ndarray, surrogate_dudt: np.ndarray) -> float:
    """MSE between analytic u_t and the surrogate's u_t."""
    return _mean_sq(true_dudt, surrogate_dudt)


def e_sindy(surrogate_dudt: np.ndarray, model: SparseModel, theta: np.ndarray) -> float:
    """MSE between the surrogate's u_t and the sparse model's prediction."""
    return _mean_sq(surrogate_dudt, model.predict(theta))


def e_field(ds_clean: ScatteredDataset, params: SurrogateParams) -> float:
    """MSE of the surrogate against noise-free ground-truth values."""
    if len(ds_clean) == 0:
        raise ValueError("empty dataset")
    return _mean_sq(ds_clean.values, forward(params, ds_clean.points))


def full_report(ds_noisy: ScatteredDataset, ds_clean: ScatteredDataset,
                params: SurrogateParams, model: SparseModel,
                dictionary: Dictionary, true_dudt: np.ndarray) -> MetricReport:
    return MetricReport(
        e_pde=e_pde(true_dudt, model, dictionary.theta),
        e_nn=e_nn(ds_noisy, params),
        e_dudt=e_dudt(true_dudt, dictionary.target),
        e_sindy=e_sindy(dictionary.target, model, dictionary.theta),
        e_field=e_field(ds_clean, params),
        n_points=dictionary.point_count,
    )


def judge_success(model: SparseModel, truth: PdeTruth, labels) -> bool:
    """True iff the recovered support matches the true support exactly and
    every recovered coefficient has the true coefficient's sign."""
    labels = list(labels)
    recovered = {labels[j] for j in model.support_indices}
    if recovered != set(truth.true_support):
        return False
    for label, true_coef in zip(truth.true_support, truth.true_coefficients):
        j = labels.index(label)
        if np.sign(model.coefficients[j]) != np.sign(true_coef):
            return False
    return True


def metrics_table(reports: dict[str, MetricReport], columns: list[str]) -> str:
    """Aligned text table: metric rows x named columns."""
    rows = ["e_pde", "e_nn", "e_dudt", "e_sindy", "e_field"]
    width = max(10, *(len(c) + 2 for c in columns))
    lines = ["metric".ljust(10) + "".join(c.rjust(width) for c in columns)]
    for r in rows:
        cells = "".join(
            f"{getattr(reports[c], r):{width}.4g}" for c in columns
        )
        lines.append(r.ljust(10) + cells)
    return "\n".join(lines)
