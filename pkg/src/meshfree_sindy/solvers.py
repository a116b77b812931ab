"""Sparse solvers: sequentially thresholded ridge, exhaustive best-subset,
and bootstrap ensembling with inclusion probabilities.

Both solvers select a support using ridge-regularized fits, then report
coefficients from an unpenalized least-squares refit on the selected
columns, so exact data yields exact coefficients.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np
from scipy import linalg

ENUMERATION_GUARD = 20


class RankDeficiencyError(ValueError):
    pass


@dataclass(frozen=True)
class SparseModel:
    coefficients: np.ndarray             # (K,), exact zeros off-support
    support: np.ndarray                  # (K,) bool
    solver: str
    hyperparams: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.coefficients.shape != self.support.shape:
            raise ValueError("coefficient/support shape mismatch")
        if np.any(self.coefficients[~self.support] != 0.0):
            raise ValueError("coefficients outside the support must be exactly 0")

    @property
    def support_indices(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.support))

    def predict(self, theta: np.ndarray) -> np.ndarray:
        return theta @ self.coefficients


@dataclass(frozen=True)
class EnsembleResult:
    replicates: tuple[SparseModel, ...]
    inclusion_probability: np.ndarray    # (K,)
    coefficient_samples: np.ndarray      # (M, K)
    subsample_size: int
    seed: int

    def __post_init__(self):
        m = len(self.replicates)
        if m < 1 or self.coefficient_samples.shape[0] != m:
            raise ValueError("replicate count mismatch")


def ridge_solve(theta: np.ndarray, y: np.ndarray, alpha: float,
                active: np.ndarray) -> np.ndarray:
    """Ridge fit on the active columns via SPD normal equations; inactive
    entries are zero-filled."""
    if alpha < 0:
        raise ValueError("ridge weight must be nonnegative")
    active = np.asarray(active, dtype=bool)
    if not active.any():
        raise ValueError("active set must be nonempty")
    sub = theta[:, active]
    gram = sub.T @ sub + alpha * np.eye(sub.shape[1])
    try:
        coef = linalg.solve(gram, sub.T @ y, assume_a="pos")
    except linalg.LinAlgError as exc:
        if alpha == 0:
            raise RankDeficiencyError(
                "singular normal equations with alpha=0; columns are rank-deficient"
            ) from exc
        raise
    if not np.all(np.isfinite(coef)):
        raise RankDeficiencyError("ridge solve produced non-finite coefficients")
    out = np.zeros(theta.shape[1])
    out[active] = coef
    return out


def _refit(theta: np.ndarray, y: np.ndarray, active: np.ndarray) -> np.ndarray:
    """Unpenalized least-squares refit on the active set (lstsq is tolerant
    of near-collinearity)."""
    out = np.zeros(theta.shape[1])
    if active.any():
        coef = linalg.lstsq(theta[:, active], y)[0]
        out[active] = coef
    return out


def stlsq(theta: np.ndarray, y: np.ndarray, threshold: float, alpha: float,
          max_iter: int = 20, initial_active: np.ndarray | None = None) -> SparseModel:
    """Sequentially thresholded ridge least squares.

    Alternates ridge fitting on the active set with deactivating columns
    whose |coefficient| falls below the threshold, until a fixed point.
    An all-deactivated result is returned as a valid empty-support model.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    k = theta.shape[1]
    active = (np.ones(k, dtype=bool) if initial_active is None
              else np.asarray(initial_active, dtype=bool).copy())
    hyper = {"threshold": threshold, "alpha": alpha, "max_iter": max_iter}
    for _ in range(max_iter):
        if not active.any():
            break
        coef = ridge_solve(theta, y, alpha, active)
        keep = np.abs(coef) >= threshold
        new_active = active & keep
        if np.array_equal(new_active, active):
            break
        active = new_active
    coefficients = _refit(theta, y, active)
    return SparseModel(coefficients=coefficients, support=active,
                       solver="stlsq", hyperparams=hyper)


def default_subset_penalty(theta: np.ndarray, y: np.ndarray, alpha: float) -> float:
    """BIC-style complexity weight: 2 * sigma^2 * log(N) / N, with sigma^2
    from the full ridge fit and a small variance floor so exact data still
    prefers smaller supports."""
    n, k = theta.shape
    try:
        coef = ridge_solve(theta, y, alpha, np.ones(k, dtype=bool))
        rss = float(np.sum((y - theta @ coef) ** 2))
    except RankDeficiencyError:
        rss = float(np.sum(y ** 2))
    dof = max(n - k, 1)
    var = max(rss / dof, 1e-12 * float(np.var(y)) + 1e-300)
    return 2.0 * var * np.log(n) / n


def best_subset(theta: np.ndarray, y: np.ndarray, alpha: float,
                max_support: int, penalty: float | None = None,
                penalty_scale: float | None = None) -> SparseModel:
    """Exhaustive l0 best-subset selection.

    Scores every support of size <= max_support by RSS/N + penalty * |S|
    (ridge-fit coefficients), keeping the first strict minimizer in
    size-then-lexicographic enumeration order, which breaks exact ties
    toward smaller supports and earlier library columns.

    When `penalty` is not given, `penalty_scale` sets it to a fraction of
    var(y): each extra term must explain at least that fraction of target
    variance.  This is the right scale when residuals are dominated by
    smooth surrogate error rather than i.i.d. noise, where the BIC-style
    default badly under-penalizes.  If both are None the BIC-style
    estimate is used.
    """
    n, k = theta.shape
    if penalty is not None and penalty_scale is not None:
        raise ValueError("give at most one of penalty and penalty_scale")
    if penalty is None and penalty_scale is not None:
        if penalty_scale <= 0:
            raise ValueError("penalty_scale must be positive")
        penalty = penalty_scale * float(np.var(y))
    if k > ENUMERATION_GUARD:
        raise ValueError(
            f"library size {k} exceeds the enumeration guard "
            f"({ENUMERATION_GUARD}); use stlsq for large libraries"
        )
    if not 0 <= max_support <= k:
        raise ValueError("max_support must be in [0, K]")
    if penalty is None:
        penalty = default_subset_penalty(theta, y, alpha)
    gram = theta.T @ theta
    xty = theta.T @ y
    yty = float(y @ y)
    best_score = yty / n                     # empty support
    best_support: tuple[int, ...] = ()
    for size in range(1, max_support + 1):
        pen = penalty * size
        for idx in combinations(range(k), size):
            sub = gram[np.ix_(idx, idx)] + alpha * np.eye(size)
            try:
                coef = linalg.solve(sub, xty[list(idx)], assume_a="pos")
            except linalg.LinAlgError:
                continue
            rss = yty - 2.0 * coef @ xty[list(idx)] + coef @ gram[np.ix_(idx, idx)] @ coef
            score = rss / n + pen
            if score < best_score:
                best_score = score
                best_support = idx
    support = np.zeros(k, dtype=bool)
    support[list(best_support)] = True
    coefficients = _refit(theta, y, support)
    hyper = {"alpha": alpha, "max_support": max_support, "penalty": penalty}
    return SparseModel(coefficients=coefficients, support=support,
                       solver="best_subset", hyperparams=hyper)


# --------------------------------------------------------------------------
# solver specs and ensembling
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverSpec:
    """Named base solver plus its hyperparameters."""

    kind: str                             # stlsq | best_subset
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("stlsq", "best_subset"):
            raise ValueError(f"unknown solver kind {self.kind!r}")

    def solve(self, theta: np.ndarray, y: np.ndarray) -> SparseModel:
        if self.kind == "stlsq":
            return stlsq(theta, y, **self.params)
        return best_subset(theta, y, **self.params)


def ensemble_discover(theta: np.ndarray, y: np.ndarray, base: SolverSpec,
                      n_replicates: int, subsample_size: int,
                      seed: int) -> EnsembleResult:
    """Bootstrap without replacement: solve on seeded row-subsamples and
    collect replicate models, inclusion probabilities, and coefficient
    samples."""
    n, k = theta.shape
    if n_replicates < 1:
        raise ValueError("replicate count must be >= 1")
    if not 1 <= subsample_size <= n:
        raise ValueError(f"subsample size {subsample_size} not in [1, {n}]")
    child_seeds = np.random.SeedSequence(seed).spawn(n_replicates)
    replicates = []
    samples = np.zeros((n_replicates, k))
    for m, child in enumerate(child_seeds):
        rng = np.random.default_rng(child)
        rows = (rng.choice(n, size=subsample_size, replace=False)
                if subsample_size < n else np.arange(n))
        model = base.solve(theta[rows], y[rows])
        replicates.append(model)
        samples[m] = model.coefficients
    inclusion = np.mean([m.support for m in replicates], axis=0)
    return EnsembleResult(
        replicates=tuple(replicates), inclusion_probability=inclusion,
        coefficient_samples=samples, subsample_size=subsample_size, seed=seed,
    )


def aggregate(ens: EnsembleResult, inclusion_cutoff: float) -> SparseModel:
    """Keep terms whose inclusion probability reaches the cutoff; each kept
    coefficient is the median over the replicates where it was active."""
    if not 0 < inclusion_cutoff <= 1:
        raise ValueError("inclusion cutoff must be in (0, 1]")
    k = len(ens.inclusion_probability)
    support = ens.inclusion_probability >= inclusion_cutoff
    coefficients = np.zeros(k)
    active_mask = np.stack([m.support for m in ens.replicates])
    for j in np.flatnonzero(support):
        vals = ens.coefficient_samples[active_mask[:, j], j]
        coefficients[j] = float(np.median(vals))
    base = ens.replicates[0]
    return SparseModel(coefficients=coefficients, support=support,
                       solver=f"ensemble[{base.solver}]",
                       hyperparams={**base.hyperparams,
                                    "n_replicates": len(ens.replicates),
                                    "subsample_size": ens.subsample_size,
                                    "inclusion_cutoff": inclusion_cutoff})


# --------------------------------------------------------------------------
# model serialization
# --------------------------------------------------------------------------

def model_to_dict(model: SparseModel, labels: list[str],
                  ensemble: EnsembleResult | None = None) -> dict:
    doc = {
        "solver": model.solver,
        "hyperparams": model.hyperparams,
        "terms": labels,
        "coefficients": [float(c) for c in model.coefficients],
        "support": [bool(s) for s in model.support],
    }
    if ensemble is not None:
        doc["inclusion_probability"] = [float(p) for p in ensemble.inclusion_probability]
        doc["coefficient_samples"] = {
            label: [float(v) for v in ensemble.coefficient_samples[:, j]]
            for j, label in enumerate(labels)
        }
    return doc


def save_model(model: SparseModel, labels, path: str | Path,
               ensemble: EnsembleResult | None = None):
    Path(path).write_text(json.dumps(model_to_dict(model, list(labels), ensemble), indent=2))
