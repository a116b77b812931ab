"""Closed-form PDE solution fields, scattered sampling, and noise injection.

All four benchmark fields are exact solutions of their PDEs:

* viscous Burgers via the Cole-Hopf two-Gaussian form (width 4*nu*(t+1)),
* heat with a truncated sine series matching u(x,0) = x^2 sin(x),
* KdV via the two-soliton tau function (a plain sum of sech^2 profiles is
  *not* a solution where the solitons overlap, the tau form is),
* 2D advection-diffusion via the translated spreading Gaussian.

Each field also exposes exact partial derivatives through sympy
(`analytic_table`), used as the ground-truth oracle for metrics and for
dictionary assembly without a surrogate.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np
import sympy as sp
from scipy.integrate import simpson


# --------------------------------------------------------------------------
# domain types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DomainSpec:
    """Closed space-time box. ``spatial_bounds`` is one (lo, hi) per axis."""

    spatial_bounds: tuple[tuple[float, float], ...]
    time_bounds: tuple[float, float]

    def __post_init__(self):
        for lo, hi in (*self.spatial_bounds, self.time_bounds):
            if not lo < hi:
                raise ValueError(f"degenerate interval [{lo}, {hi}]")

    @property
    def spatial_dim(self) -> int:
        return len(self.spatial_bounds)

    @property
    def bounds(self) -> tuple[tuple[float, float], ...]:
        return (*self.spatial_bounds, self.time_bounds)

    def contains(self, points: np.ndarray) -> bool:
        points = np.atleast_2d(points)
        for axis, (lo, hi) in enumerate(self.bounds):
            if np.any(points[:, axis] < lo) or np.any(points[:, axis] > hi):
                return False
        return True


@dataclass(frozen=True)
class ScatteredDataset:
    """N rows of (spatial coords..., time) with observed state values."""

    points: np.ndarray          # (N, spatial_dim + 1), time last
    values: np.ndarray          # (N,)
    domain: DomainSpec
    noise_level: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if len(self.points) != len(self.values) or len(self.points) < 1:
            raise ValueError("points and values must have equal positive length")
        if self.points.shape[1] != self.domain.spatial_dim + 1:
            raise ValueError("point dimension does not match domain")
        if not self.domain.contains(self.points):
            raise ValueError("dataset contains points outside the domain")
        if self.noise_level < 0:
            raise ValueError("noise_level must be nonnegative")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class PdeTruth:
    """Ground-truth support and coefficients of the right-hand side of u_t = ..."""

    name: str
    true_support: tuple[str, ...]
    true_coefficients: tuple[float, ...]
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.true_support:
            raise ValueError("true_support must be nonempty")
        if len(self.true_support) != len(self.true_coefficients):
            raise ValueError("support/coefficient length mismatch")
        for c in self.true_coefficients:
            if not np.isfinite(c) or c == 0.0:
                raise ValueError("true coefficients must be finite and nonzero")


# --------------------------------------------------------------------------
# closed-form fields
# --------------------------------------------------------------------------

def burgers_exact(x, t, nu: float):
    """Cole-Hopf closed form u = 4 - 2*nu*phi_x/phi, exact for
    u_t + u u_x = nu u_xx."""
    if nu <= 0:
        raise ValueError("viscosity nu must be positive")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    width = 4.0 * nu * (t + 1.0)
    z1 = x - 4.0 * t
    z2 = x - 4.0 * t - 2.0 * np.pi
    e1 = np.exp(-z1 ** 2 / width)
    e2 = np.exp(-z2 ** 2 / width)
    phi = e1 + e2
    phi_x = (-2.0 * z1 / width) * e1 + (-2.0 * z2 / width) * e2
    return 4.0 - 2.0 * nu * phi_x / phi


@lru_cache(maxsize=None)
def heat_series_coefficients(q_max: int, panels: int = 2048) -> tuple[float, ...]:
    """Sine-series coefficients of x^2 sin(x) on [0, pi], composite Simpson."""
    if q_max < 1:
        raise ValueError("series truncation Q must be >= 1")
    xs = np.linspace(0.0, np.pi, panels + 1)
    base = xs ** 2 * np.sin(xs)
    return tuple(
        (2.0 / np.pi) * simpson(base * np.sin(q * xs), x=xs)
        for q in range(1, q_max + 1)
    )


def heat_exact(x, t, nu: float, q_max: int = 32):
    """Truncated sine-series solution of u_t = nu u_xx with u(x,0)=x^2 sin x."""
    if nu <= 0:
        raise ValueError("diffusivity nu must be positive")
    if q_max < 1:
        raise ValueError("series truncation Q must be >= 1")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    q = np.arange(1, q_max + 1)
    d = np.asarray(heat_series_coefficients(q_max))
    modes = d * np.exp(-nu * np.multiply.outer(t, q ** 2)) * np.sin(np.multiply.outer(x, q))
    return modes.sum(axis=-1)


def kdv_two_soliton(x, t, c1: float, c2: float, a1: float, a2: float):
    """Exact two-soliton solution of u_t + 6 u u_x + u_xxx = 0.

    u = 2 d^2/dx^2 log(tau) with the standard two-soliton tau function;
    far from the interaction region this reduces to the sum of the two
    (c/2) sech^2(sqrt(c)/2 (x - c t - a)) profiles.
    """
    if c1 <= 0 or c2 <= 0:
        raise ValueError("soliton speeds must be positive")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    k1, k2 = np.sqrt(c1), np.sqrt(c2)
    mix = ((k1 - k2) / (k1 + k2)) ** 2
    e1 = np.exp(k1 * (x - c1 * t - a1))
    e2 = np.exp(k2 * (x - c2 * t - a2))
    tau = 1.0 + e1 + e2 + mix * e1 * e2
    tau_x = k1 * e1 + k2 * e2 + mix * (k1 + k2) * e1 * e2
    tau_xx = k1 ** 2 * e1 + k2 ** 2 * e2 + mix * (k1 + k2) ** 2 * e1 * e2
    return 2.0 * (tau_xx * tau - tau_x ** 2) / tau ** 2


def kdv_soliton(x, t, c: float, a: float):
    """Single sech^2 soliton of u_t + 6 u u_x + u_xxx = 0."""
    if c <= 0:
        raise ValueError("soliton speed must be positive")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    arg = 0.5 * np.sqrt(c) * (x - c * t - a)
    return 0.5 * c / np.cosh(arg) ** 2


def advdiff_exact(x, y, t, velocity: tuple[float, float], diffusivity: float,
                  center: tuple[float, float], t0: float, amplitude: float = 1.0):
    """Free-space spreading Gaussian, exact for u_t + c.grad(u) = K lap(u)."""
    if diffusivity <= 0:
        raise ValueError("diffusivity K must be positive")
    if t0 <= 0:
        raise ValueError("spreading offset t0 must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    s = 4.0 * diffusivity * (t + t0)
    dx = x - center[0] - velocity[0] * t
    dy = y - center[1] - velocity[1] * t
    return amplitude / (np.pi * s) * np.exp(-(dx ** 2 + dy ** 2) / s)


# --------------------------------------------------------------------------
# sampling and noise
# --------------------------------------------------------------------------

def sample_scattered(solution, domain: DomainSpec, n: int, seed: int) -> ScatteredDataset:
    """Draw n points uniformly over the space-time box and evaluate the field."""
    if n < 1:
        raise ValueError("sample count must be >= 1")
    rng = np.random.default_rng(seed)
    bounds = np.asarray(domain.bounds)
    points = rng.uniform(bounds[:, 0], bounds[:, 1], size=(n, len(bounds)))
    values = np.asarray(solution(points), dtype=float)
    return ScatteredDataset(points=points, values=values, domain=domain, seed=seed)


def inject_noise(ds: ScatteredDataset, level: float, seed: int) -> ScatteredDataset:
    """Add Gaussian noise with std = level * std(clean values)."""
    if level < 0:
        raise ValueError("noise level must be nonnegative")
    if level == 0:
        return replace(ds, noise_level=0.0)
    rng = np.random.default_rng(seed)
    sigma = level * float(np.std(ds.values))
    noisy = ds.values + rng.normal(0.0, sigma, size=len(ds))
    return replace(ds, values=noisy, noise_level=level)


# --------------------------------------------------------------------------
# analytic derivative oracle (sympy)
# --------------------------------------------------------------------------

def burgers_expr(nu: float):
    x, t = sp.symbols("x t")
    width = 4 * nu * (t + 1)
    phi = sp.exp(-(x - 4 * t) ** 2 / width) + sp.exp(-(x - 4 * t - 2 * sp.pi) ** 2 / width)
    return 4 - 2 * nu * sp.diff(phi, x) / phi, (x, t)


def heat_expr(nu: float, q_max: int = 32):
    x, t = sp.symbols("x t")
    coeffs = heat_series_coefficients(q_max)
    expr = sum(
        sp.Float(d, 17) * sp.exp(-nu * q ** 2 * t) * sp.sin(q * x)
        for q, d in enumerate(coeffs, start=1)
    )
    return expr, (x, t)


def kdv_expr(c1: float, c2: float, a1: float, a2: float):
    x, t = sp.symbols("x t")
    k1, k2 = sp.sqrt(sp.Float(c1, 17)), sp.sqrt(sp.Float(c2, 17))
    mix = ((k1 - k2) / (k1 + k2)) ** 2
    e1 = sp.exp(k1 * (x - c1 * t - a1))
    e2 = sp.exp(k2 * (x - c2 * t - a2))
    tau = 1 + e1 + e2 + mix * e1 * e2
    tau_x = sp.diff(tau, x)
    tau_xx = sp.diff(tau_x, x)
    # rational form of 2 * d^2/dx^2 log(tau); cheaper to differentiate further
    return 2 * (tau_xx * tau - tau_x ** 2) / tau ** 2, (x, t)


def advdiff_expr(velocity, diffusivity: float, center, t0: float, amplitude: float = 1.0):
    x, y, t = sp.symbols("x y t")
    s = 4 * diffusivity * (t + t0)
    dx = x - center[0] - velocity[0] * t
    dy = y - center[1] - velocity[1] * t
    expr = amplitude / (sp.pi * s) * sp.exp(-(dx ** 2 + dy ** 2) / s)
    return expr, (x, y, t)


def derivative_orders(descriptor: str, axes: tuple[str, ...]) -> tuple[int, ...]:
    """Map a descriptor like 'u_xxt' to per-axis derivative orders."""
    if descriptor == "u":
        return tuple(0 for _ in axes)
    if not descriptor.startswith("u_"):
        raise ValueError(f"unknown derivative descriptor {descriptor!r}")
    suffix = descriptor[2:]
    if not suffix or any(ch not in axes for ch in suffix):
        raise ValueError(f"unknown derivative descriptor {descriptor!r}")
    return tuple(suffix.count(ax) for ax in axes)


def analytic_table(expr, symbols, points: np.ndarray,
                   request: set[str]) -> dict[str, np.ndarray]:
    """Exact derivative values of a closed-form field at scattered points."""
    axes = tuple(str(s) for s in symbols)
    points = np.atleast_2d(points)
    cols = [points[:, i] for i in range(points.shape[1])]
    out = {}
    for name in sorted(request):
        orders = derivative_orders(name, axes)
        deriv = expr
        for sym, order in zip(symbols, orders):
            if order:
                deriv = sp.diff(deriv, sym, order)
        fn = sp.lambdify(symbols, deriv, modules="numpy", cse=True)
        out[name] = np.asarray(fn(*cols), dtype=float)
    return out


# --------------------------------------------------------------------------
# dataset file I/O
# --------------------------------------------------------------------------

def dataset_columns(spatial_dim: int) -> list[str]:
    return (["x", "y"] if spatial_dim == 2 else ["x"]) + ["t", "u"]


def save_dataset(ds: ScatteredDataset, path: str | Path, metadata: dict | None = None):
    """CSV with header x[,y],t,u plus a sidecar .json metadata file."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset_columns(ds.domain.spatial_dim))
        for row, value in zip(ds.points, ds.values):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(value))])
    meta = {
        "spatial_bounds": [list(b) for b in ds.domain.spatial_bounds],
        "time_bounds": list(ds.domain.time_bounds),
        "noise_level": ds.noise_level,
        "seed": ds.seed,
    }
    if metadata:
        meta.update(metadata)
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2))


def load_dataset(path: str | Path) -> tuple[ScatteredDataset, dict]:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    if header not in (["x", "t", "u"], ["x", "y", "t", "u"]):
        raise ValueError(f"unexpected dataset header {header}")
    data = np.asarray(rows)
    meta = json.loads(path.with_suffix(".json").read_text())
    domain = DomainSpec(
        spatial_bounds=tuple(tuple(b) for b in meta["spatial_bounds"]),
        time_bounds=tuple(meta["time_bounds"]),
    )
    ds = ScatteredDataset(
        points=data[:, :-1], values=data[:, -1], domain=domain,
        noise_level=meta.get("noise_level", 0.0), seed=meta.get("seed"),
    )
    return ds, meta
