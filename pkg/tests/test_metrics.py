"""Error metrics and the success judgment."""

import numpy as np
import pytest

from meshfree_sindy.dictionary import Dictionary, term
from meshfree_sindy.metrics import (MetricReport, e_dudt, e_field, e_nn, e_pde,
                                    e_sindy, full_report, judge_success,
                                    metrics_table)
from meshfree_sindy.network import init_params, forward
from meshfree_sindy.pde_data import DomainSpec, PdeTruth, ScatteredDataset
from meshfree_sindy.solvers import SparseModel


def _model(coefs):
    coefs = np.asarray(coefs, dtype=float)
    return SparseModel(coefficients=coefs, support=coefs != 0, solver="stlsq")


def test_mean_squared_metrics_hand_computed():
    theta = np.array([[1.0, 2.0], [3.0, 4.0]])
    model = _model([1.0, 0.0])
    true_dudt = np.array([2.0, 2.0])
    # predictions (1, 3): mean((1,1)^2... ) = ((2-1)^2 + (2-3)^2)/2 = 1
    assert e_pde(true_dudt, model, theta) == pytest.approx(1.0)
    assert e_dudt(np.array([1.0, 1.0]), np.array([0.0, 3.0])) == pytest.approx(2.5)
    assert e_sindy(np.array([1.0, 3.0]), model, theta) == pytest.approx(0.0)


def test_field_metrics_use_surrogate_forward():
    dom = DomainSpec(((0.0, 1.0),), (0.0, 1.0))
    params = init_params((2, 4, 1), dom, seed=0, output_bias=0.5)
    pts = np.array([[0.2, 0.3], [0.8, 0.9]])
    pred = forward(params, pts)
    ds = ScatteredDataset(points=pts, values=pred + 0.1, domain=dom)
    assert e_nn(ds, params) == pytest.approx(0.01)
    assert e_field(ds, params) == pytest.approx(0.01)


def test_report_invariants():
    with pytest.raises(ValueError):
        MetricReport(e_pde=-1.0, e_nn=0.0, e_dudt=0.0, e_sindy=0.0,
                     e_field=0.0, n_points=1)
    with pytest.raises(ValueError):
        MetricReport(e_pde=np.nan, e_nn=0.0, e_dudt=0.0, e_sindy=0.0,
                     e_field=0.0, n_points=1)
    r = MetricReport(1.0, 2.0, 3.0, 4.0, 5.0, 10)
    assert r.as_dict()["e_sindy"] == 4.0


def test_full_report_consistency():
    dom = DomainSpec(((0.0, 1.0),), (0.0, 1.0))
    params = init_params((2, 6, 1), dom, seed=1)
    pts = np.array([[0.1, 0.2], [0.5, 0.5], [0.9, 0.7]])
    clean_vals = forward(params, pts)
    clean = ScatteredDataset(points=pts, values=clean_vals, domain=dom)
    noisy = ScatteredDataset(points=pts, values=clean_vals + 0.2, domain=dom,
                             noise_level=0.1)
    theta = np.column_stack([clean_vals, clean_vals ** 2])
    d = Dictionary(terms=(term("u"), term("u", "u")), theta=theta,
                   target=2.0 * clean_vals)
    model = _model([2.0, 0.0])
    rep = full_report(noisy, clean, params, model, d, true_dudt=2.0 * clean_vals)
    assert rep.e_pde == pytest.approx(0.0)
    assert rep.e_sindy == pytest.approx(0.0)
    assert rep.e_nn == pytest.approx(0.04)
    assert rep.e_field == pytest.approx(0.0, abs=1e-15)
    assert rep.n_points == 3


def test_judge_success_support_and_signs():
    labels = ["u", "u*u_x", "u_xx"]
    truth = PdeTruth("burgers", ("u*u_x", "u_xx"), (-1.0, 0.5))
    assert judge_success(_model([0.0, -0.8, 0.3]), truth, labels)
    # magnitude is deliberately not judged
    assert judge_success(_model([0.0, -37.0, 0.01]), truth, labels)
    # wrong sign
    assert not judge_success(_model([0.0, 1.0, 0.5]), truth, labels)
    # extra term
    assert not judge_success(_model([0.1, -1.0, 0.5]), truth, labels)
    # missing term
    assert not judge_success(_model([0.0, -1.0, 0.0]), truth, labels)


def test_metrics_table_layout():
    r = MetricReport(1.0, 2.0, 3.0, 4.0, 5.0, 10)
    text = metrics_table({"run_a": r, "run_b": r}, ["run_a", "run_b"])
    lines = text.splitlines()
    assert lines[0].split() == ["metric", "run_a", "run_b"]
    assert len(lines) == 6
    assert lines[3].startswith("e_dudt")
