"""Mesh-free PDE discovery: neural response surface + exact forward-mode
derivatives + ensemble sparse regression over a candidate-term library."""

from .dictionary import Dictionary, TermDescriptor, assemble, evaluate_term, preset_terms
from .harness import (ExperimentConfig, epoch_evolution, emit_report,
                      format_equation, parse_equation, run_grid, run_trial)
from .metrics import MetricReport, judge_success
from .network import (DerivativeBundle, SurrogateParams, TrainConfig,
                      batch_bundles, forward, input_derivatives, train)
from .pde_data import (DomainSpec, PdeTruth, ScatteredDataset, advdiff_exact,
                       burgers_exact, heat_exact, inject_noise,
                       kdv_soliton, kdv_two_soliton, sample_scattered)
from .presets import get_problem
from .solvers import (EnsembleResult, SolverSpec, SparseModel, aggregate,
                      best_subset, ensemble_discover, ridge_solve, stlsq)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
