"""Experiment harness: seeding, trial execution, grids, and reports."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meshfree_sindy.harness import (ExperimentConfig, emit_report,
                                    format_equation, parse_equation, run_grid,
                                    run_trial, trial_seed)
from meshfree_sindy.solvers import SparseModel

TINY = {"train": {"epochs": 3}, "ensemble": {"n_replicates": 5}}


# --------------------------------------------------------------------------
# seeds
# --------------------------------------------------------------------------

def test_trial_seed_deterministic_and_distinct():
    base = trial_seed(0, "burgers", 100, 0.01, 0)
    assert base == trial_seed(0, "burgers", 100, 0.01, 0)
    variants = {
        trial_seed(0, "burgers", 100, 0.01, 1),
        trial_seed(0, "burgers", 200, 0.01, 0),
        trial_seed(0, "burgers", 100, 0.02, 0),
        trial_seed(0, "heat", 100, 0.01, 0),
        trial_seed(1, "burgers", 100, 0.01, 0),
    }
    assert base not in variants
    assert len(variants) == 5


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

def test_experiment_config_from_dict():
    cfg = ExperimentConfig.from_dict({
        "pde": "burgers", "sample_sizes": [100], "noise_levels": [0.0],
        "trials_per_cell": 2,
    })
    assert cfg.sample_sizes == (100,)
    with pytest.raises(ValueError, match="unknown config keys"):
        ExperimentConfig.from_dict({"pde": "burgers", "sample_sizes": [10],
                                    "noise_levels": [0.0], "bogus": 1})
    with pytest.raises(ValueError):
        ExperimentConfig(pde="burgers", sample_sizes=(0,), noise_levels=(0.0,))
    with pytest.raises(ValueError):
        ExperimentConfig(pde="burgers", sample_sizes=(10,), noise_levels=(-0.1,))


# --------------------------------------------------------------------------
# trials
# --------------------------------------------------------------------------

def test_run_trial_reproducible():
    seed = trial_seed(0, "burgers", 150, 0.0, 0)
    a = run_trial("burgers", 150, 0.0, seed, overrides=TINY)
    b = run_trial("burgers", 150, 0.0, seed, overrides=TINY)
    assert a.equation == b.equation
    assert a.success == b.success
    np.testing.assert_array_equal(a.model.coefficients, b.model.coefficients)
    assert a.report is not None and a.report.n_points == 150


def test_run_trial_records_divergence_as_failure():
    seed = trial_seed(0, "burgers", 100, 0.0, 0)
    bad = {"train": {"epochs": 30, "learning_rate": 1e18, "batch_size": None}}
    r = run_trial("burgers", 100, 0.0, seed, overrides=bad)
    assert not r.success
    assert r.model is None
    assert "Divergence" in r.error


def test_run_trial_unknown_override_rejected():
    with pytest.raises(ValueError):
        run_trial("burgers", 50, 0.0, 1, overrides={"optimizer": "adam"})


# --------------------------------------------------------------------------
# grids and reports
# --------------------------------------------------------------------------

@pytest.fixture(scope="module")
def tiny_grid():
    cfg = ExperimentConfig(pde="burgers", sample_sizes=(60, 120),
                           noise_levels=(0.0,), trials_per_cell=2,
                           base_seed=0, overrides=TINY)
    return run_grid(cfg)


def test_run_grid_shape_and_counts(tiny_grid):
    assert set(tiny_grid.cells) == {(60, 0.0), (120, 0.0)}
    for cell in tiny_grid.cells.values():
        assert cell.trials == 2
        assert 0 <= cell.successes <= 2
        assert cell.rate == cell.successes / 2
        assert len(cell.per_trial) == 2


def test_emit_report_formats(tiny_grid):
    doc = json.loads(emit_report(tiny_grid, "json"))
    assert doc["pde"] == "burgers"
    assert len(doc["cells"]) == 2
    assert {c["samples"] for c in doc["cells"]} == {60, 120}

    csv_text = emit_report(tiny_grid, "csv")
    lines = csv_text.strip().splitlines()
    assert lines[0] == "pde,samples,noise,successes,trials,rate,mean_seconds"
    assert len(lines) == 3

    md = emit_report(tiny_grid, "markdown")
    assert "| Samples |" in md
    assert "Recovered equations" in md

    with pytest.raises(ValueError):
        emit_report(tiny_grid, "yaml")


# --------------------------------------------------------------------------
# equation round-trip
# --------------------------------------------------------------------------

def test_format_equation_examples():
    model = SparseModel(coefficients=np.array([0.0, -1.0, 0.49]),
                        support=np.array([False, True, True]), solver="stlsq")
    text = format_equation(model, ["u", "u*u_x", "u_xx"])
    assert text == "u_t = -1.00*u*u_x +0.49*u_xx"
    empty = SparseModel(coefficients=np.zeros(1),
                        support=np.zeros(1, dtype=bool), solver="stlsq")
    assert format_equation(empty, ["u"]) == "u_t = 0"


@given(coefs=st.lists(
    st.floats(min_value=-50, max_value=50, allow_nan=False).filter(
        lambda v: abs(v) >= 0.005),
    min_size=1, max_size=4))
@settings(max_examples=40, deadline=None)
def test_equation_roundtrip(coefs):
    labels = ["u", "u*u_x", "u_xx", "u^2*u_xxx"][: len(coefs)]
    arr = np.asarray(coefs)
    model = SparseModel(coefficients=arr, support=np.ones(len(arr), dtype=bool),
                        solver="stlsq")
    parsed = parse_equation(format_equation(model, labels))
    rounded = {l: float(f"{c:+.2f}") for l, c in zip(labels, arr)}
    # terms that round to exactly 0.00 keep their sign in the text form
    assert set(parsed) == set(labels)
    for l in labels:
        assert parsed[l] == pytest.approx(rounded[l], abs=1e-9)


def test_parse_equation_rejects_garbage():
    with pytest.raises(ValueError):
        parse_equation("du/dt = things")
