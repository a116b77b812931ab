"""Shared test oracles and reporting.

The finite-difference helpers here are deliberately independent of the
package's Taylor-jet engine: they are the oracle the engine is judged
against.  Stencils are classical 4th-order central differences, validated
on monomials in test_taylor.py.
"""

from __future__ import annotations

import numpy as np
import pytest

# one line per acceptance criterion, printed in the terminal summary
CRITERION_LINES: dict[object, str] = {}


@pytest.fixture
def criterion_report():
    def record(key, ok: bool, detail: str):
        CRITERION_LINES[key] = (
            f"[criterion {key}] {'PASS' if ok else 'FAIL'} — {detail}"
        )

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    order = sorted(CRITERION_LINES, key=lambda k: (isinstance(k, str), str(k)))
    for key in order:
        terminalreporter.write_line(CRITERION_LINES[key])


# --------------------------------------------------------------------------
# finite-difference oracle (4th-order central stencils)
# --------------------------------------------------------------------------

_STENCILS = {
    1: ((-2, -1, 1, 2), (1.0, -8.0, 8.0, -1.0), 12.0),
    2: ((-2, -1, 0, 1, 2), (-1.0, 16.0, -30.0, 16.0, -1.0), 12.0),
    3: ((-3, -2, -1, 1, 2, 3), (1.0, -8.0, 13.0, -13.0, 8.0, -1.0), 8.0),
}


def fd_axis_derivative(fn, points: np.ndarray, axis: int, order: int,
                       h: float) -> np.ndarray:
    """4th-order central FD of fn (maps (N, d) -> (N,)) along one axis."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    offsets, weights, denom = _STENCILS[order]
    acc = np.zeros(len(points))
    for off, w in zip(offsets, weights):
        if w == 0.0:
            continue
        shifted = points.copy()
        shifted[:, axis] += off * h
        acc += w * np.asarray(fn(shifted), dtype=float)
    return acc / (denom * h ** order)


def fd_mixed_xt(fn, points: np.ndarray, x_axis: int, t_axis: int,
                h: float) -> np.ndarray:
    """Mixed second derivative d2/dxdt by nesting two 4th-order stencils."""

    def ddx(pts):
        return fd_axis_derivative(fn, pts, x_axis, 1, h)

    return fd_axis_derivative(ddx, points, t_axis, 1, h)


def interior_points(domain, n: int, seed: int, margin: float = 0.08) -> np.ndarray:
    """Random points shrunk away from the domain boundary so FD stencils
    stay inside smooth territory."""
    rng = np.random.default_rng(seed)
    cols = []
    for lo, hi in domain.bounds:
        pad = margin * (hi - lo)
        cols.append(rng.uniform(lo + pad, hi - pad, size=n))
    return np.column_stack(cols)
