"""Candidate-term libraries and design-matrix assembly.

A term is a product of primitive features (the surrogate value and its
partial derivatives) with integer powers.  Presets reproduce the
per-equation libraries used in the discovery experiments; the regression
target is always the first time derivative u_t.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

PRIMITIVES = ("u", "u_x", "u_xx", "u_xxx", "u_y", "u_yy", "u_t", "u_tt", "u_xt")

PRESET_NAMES = ("burgers", "heat", "kdv", "advdiff")


class AssemblyError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class TermDescriptor:
    """Product of primitive features with integer powers; () is the constant 1."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        for name, power in self.factors:
            if name not in PRIMITIVES:
                raise ValueError(f"unknown primitive {name!r}")
            if power < 1:
                raise ValueError("factor powers must be positive")
        names = [name for name, _ in self.factors]
        if names != sorted(set(names), key=PRIMITIVES.index):
            raise ValueError("factors must be unique and in canonical order")

    @property
    def label(self) -> str:
        if not self.factors:
            return "1"
        return "*".join(
            name if power == 1 else f"{name}^{power}"
            for name, power in self.factors
        )

    @property
    def degree(self) -> int:
        return sum(power for _, power in self.factors)

    @property
    def primitives(self) -> frozenset[str]:
        return frozenset(name for name, _ in self.factors)


def term(*primitives: str) -> TermDescriptor:
    """Build a term from a multiset of primitives, e.g. term('u', 'u_x')."""
    counts: dict[str, int] = {}
    for p in primitives:
        counts[p] = counts.get(p, 0) + 1
    factors = tuple(sorted(counts.items(), key=lambda kv: PRIMITIVES.index(kv[0])))
    return TermDescriptor(factors)


def preset_terms(pde: str) -> list[TermDescriptor]:
    """Candidate library for a named equation preset."""
    if pde == "burgers":
        # 20 terms: 5 base features plus all 15 pairwise products with repetition
        base = ("u", "u_x", "u_xx", "u_tt", "u_xt")
        linear = [term(b) for b in base]
        pairs = [term(a, b) for a, b in combinations_with_replacement(base, 2)]
        return linear + pairs
    if pde in ("heat", "kdv"):
        derivs = ("u_x", "u_xx", "u_xxx")
        terms = [term(), term("u")]
        terms += [term(d) for d in derivs]
        terms += [term("u", "u")]
        terms += [term("u", d) for d in derivs]
        terms += [term("u", "u", d) for d in derivs]
        return terms
    if pde == "advdiff":
        return [
            term(), term("u"), term("u", "u"), term("u", "u", "u"),
            term("u_x"), term("u_y"), term("u_xx"), term("u_yy"),
            term("u", "u_x"), term("u", "u_y"),
        ]
    raise ValueError(f"unknown preset {pde!r}; expected one of {PRESET_NAMES}")


def required_primitives(terms) -> frozenset[str]:
    out: set[str] = set()
    for t in terms:
        out |= t.primitives
    return frozenset(out)


def evaluate_term(t: TermDescriptor, bundle) -> float:
    """Product of primitive values raised to their powers."""
    value = 1.0
    for name, power in t.factors:
        try:
            v = bundle[name]
        except KeyError:
            raise AssemblyError(f"bundle is missing primitive {name!r}") from None
        value *= v ** power
    return value


@dataclass(frozen=True)
class Dictionary:
    """Design matrix theta (N x K), ordered terms, and the u_t target."""

    terms: tuple[TermDescriptor, ...]
    theta: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        if self.theta.shape != (len(self.target), len(self.terms)):
            raise ValueError("theta shape inconsistent with terms/target")

    @property
    def point_count(self) -> int:
        return len(self.target)

    @property
    def labels(self) -> list[str]:
        return [t.label for t in self.terms]


def assemble(bundles, terms) -> Dictionary:
    """Evaluate every term on every bundle; fails loudly on non-finite entries."""
    bundles = list(bundles)
    if not bundles:
        raise AssemblyError("cannot assemble a dictionary from zero bundles")
    terms = tuple(terms)
    theta = np.empty((len(bundles), len(terms)))
    target = np.empty(len(bundles))
    for n, bundle in enumerate(bundles):
        try:
            target[n] = bundle["u_t"]
        except KeyError:
            raise AssemblyError(f"bundle {n} is missing the u_t target") from None
        for k, t in enumerate(terms):
            theta[n, k] = evaluate_term(t, bundle)
    if not np.all(np.isfinite(target)):
        n = int(np.argmax(~np.isfinite(target)))
        raise AssemblyError(f"non-finite u_t target at point {n}")
    if not np.all(np.isfinite(theta)):
        n, k = np.argwhere(~np.isfinite(theta))[0]
        raise AssemblyError(
            f"non-finite entry at point {n}, term {terms[k].label!r}"
        )
    return Dictionary(terms=terms, theta=theta, target=target)


def assemble_from_table(table: dict[str, np.ndarray], terms) -> Dictionary:
    """Vectorized assembly from a descriptor -> values-array table."""
    terms = tuple(terms)
    if "u_t" not in table:
        raise AssemblyError("derivative table is missing the u_t target")
    target = np.asarray(table["u_t"], dtype=float)
    cols = []
    for t in terms:
        col = np.ones_like(target)
        for name, power in t.factors:
            if name not in table:
                raise AssemblyError(f"derivative table is missing {name!r}")
            col = col * table[name] ** power
        cols.append(col)
    theta = np.column_stack(cols) if cols else np.empty((len(target), 0))
    if not np.all(np.isfinite(theta)) or not np.all(np.isfinite(target)):
        bad = np.argwhere(~np.isfinite(np.column_stack([theta, target[:, None]])))
        n, k = bad[0]
        what = "u_t" if k == len(terms) else terms[k].label
        raise AssemblyError(f"non-finite entry at point {n}, term {what!r}")
    return Dictionary(terms=terms, theta=theta, target=target)


def dump_csv(d: Dictionary, path):
    """Debug dump: one column per term label plus the u_t target."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(d.labels + ["u_t"])
        for row, y in zip(d.theta, d.target):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(y))])
