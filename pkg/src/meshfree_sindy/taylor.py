"""Truncated multivariate Taylor-jet arithmetic.

A jet stores the Taylor coefficients of a function of a few input
variables, truncated to a per-variable order box (e.g. up to order 3 in x
and order 2 in t).  Propagating jets through a network layer by layer
yields exact partial derivatives of the output with respect to the
inputs in a single forward pass, with no nested first-order passes and
no finite differencing.

Coefficient layout: ``coeffs[..., i1, i2, ..., iv]`` is the Taylor
coefficient of the monomial ``e1**i1 * e2**i2 * ...``, i.e. the partial
derivative of multi-order (i1, ..., iv) divided by i1! * ... * iv!.
Leading axes are free batch axes; all operations broadcast over them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np


@dataclass(frozen=True)
class Jet:
    """Truncated Taylor polynomial with per-variable order caps."""

    coeffs: np.ndarray
    caps: tuple[int, ...]

    def __post_init__(self):
        shape = tuple(c + 1 for c in self.caps)
        if self.coeffs.shape[-len(self.caps):] != shape:
            raise ValueError(
                f"coefficient block {self.coeffs.shape} does not match caps {self.caps}"
            )

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[: -len(self.caps)]

    @property
    def constant(self) -> np.ndarray:
        return self.coeffs[(..., *([0] * len(self.caps)))]

    def __add__(self, other):
        if isinstance(other, Jet):
            _check_caps(self, other)
            return Jet(self.coeffs + other.coeffs, self.caps)
        return Jet(_add_to_constant(self.coeffs, self.caps, other), self.caps)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            _check_caps(self, other)
            return Jet(self.coeffs - other.coeffs, self.caps)
        return Jet(_add_to_constant(self.coeffs, self.caps, -other), self.caps)

    def __rsub__(self, other):
        return (-1.0) * self + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            _check_caps(self, other)
            return Jet(_conv_truncated(self.coeffs, other.coeffs, self.caps), self.caps)
        return Jet(self.coeffs * other, self.caps)

    __rmul__ = __mul__

    def derivative(self, orders: tuple[int, ...]) -> np.ndarray:
        """Partial derivative of the given per-variable orders (physical units)."""
        if len(orders) != len(self.caps):
            raise ValueError("order tuple length does not match variable count")
        if any(o > c for o, c in zip(orders, self.caps)):
            raise ValueError(f"orders {orders} exceed jet caps {self.caps}")
        fact = 1.0
        for o in orders:
            fact *= math.factorial(o)
        return self.coeffs[(..., *orders)] * fact


def _check_caps(a: Jet, b: Jet):
    if a.caps != b.caps:
        raise ValueError(f"jet caps mismatch: {a.caps} vs {b.caps}")


def _add_to_constant(coeffs, caps, value):
    out = coeffs.copy()
    out[(..., *([0] * len(caps)))] += value
    return out


def _conv_truncated(a: np.ndarray, b: np.ndarray, caps) -> np.ndarray:
    """Product of two truncated polynomials, cropped to the cap box."""
    nvar = len(caps)
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
    boxes = [range(c + 1) for c in caps]
    for ia in product(*boxes):
        av = a[(..., *ia)]
        for ib in product(*(range(c - i + 1) for c, i in zip(caps, ia))):
            idx = tuple(i + j for i, j in zip(ia, ib))
            out[(..., *idx)] += av * b[(..., *ib)]
    return out


def variable(values: np.ndarray, var_index: int, caps: tuple[int, ...],
             scale: float = 1.0) -> Jet:
    """Jet seeding input variable ``var_index`` at the given values.

    ``scale`` is the linear coefficient; seeding a normalized coordinate
    a*x + b with scale a makes all downstream derivatives come out with
    respect to the physical variable x.
    """
    values = np.asarray(values, dtype=float)
    shape = values.shape + tuple(c + 1 for c in caps)
    coeffs = np.zeros(shape)
    coeffs[(..., *([0] * len(caps)))] = values
    if caps[var_index] >= 1:
        lin = [0] * len(caps)
        lin[var_index] = 1
        coeffs[(..., *lin)] = scale
    return Jet(coeffs, caps)


def constant(values: np.ndarray, caps: tuple[int, ...]) -> Jet:
    values = np.asarray(values, dtype=float)
    coeffs = np.zeros(values.shape + tuple(c + 1 for c in caps))
    coeffs[(..., *([0] * len(caps)))] = values
    return Jet(coeffs, caps)


def _tanh_series(c: np.ndarray, nterms: int) -> list[np.ndarray]:
    """Taylor coefficients a_k of tanh(c + eps) from s' = 1 - s**2."""
    a = [np.tanh(c)]
    for k in range(nterms - 1):
        conv = sum(a[j] * a[k - j] for j in range(k + 1))
        rhs = (1.0 if k == 0 else 0.0) - conv
        a.append(rhs / (k + 1))
    return a


def tanh(jet: Jet) -> Jet:
    """tanh of a jet via series composition about the constant term.

    The non-constant part has zero constant term, so powers beyond the
    total cap degree vanish and the composition is exact on the box.
    """
    degree = sum(jet.caps)
    c = jet.constant
    series = _tanh_series(c, degree + 1)
    hat = jet - c
    # Horner evaluation of sum_k a_k * hat**k
    result = constant(series[degree], jet.caps)
    for k in range(degree - 1, -1, -1):
        result = result * hat + series[k]
    return result
