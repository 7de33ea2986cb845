"""Data-constrained scaling-law laboratory.

Thin python surface over the C++ core: law evaluation, compute-optimal
allocation, two-stage fitting, diffusion/AR crossover analysis, parameter
accounting, and the desk-scale toy trainer.
"""

try:
    from dcsl import _core
except ImportError:  # in-tree build: _core.so on PYTHONPATH next to build dir
    import _core

ConvergenceError = _core.ConvergenceError
DomainError = _core.DomainError
InfeasibleError = _core.InfeasibleError
InputError = _core.InputError
LawParams = _core.LawParams
NumericError = _core.NumericError
__version__ = _core.__version__
base_params = _core.base_params
best_loss_at = _core.best_loss_at
compute_flops = _core.compute_flops
critical_compute = _core.critical_compute
effective_data = _core.effective_data
effective_data_geometric = _core.effective_data_geometric
effective_fraction = _core.effective_fraction
effective_params = _core.effective_params
ffn_hidden = _core.ffn_hidden
fit_crit_powerlaw = _core.fit_crit_powerlaw
fit_two_stage = _core.fit_two_stage
goodness = _core.goodness
grad_check_toy = _core.grad_check_toy
load_runs = _core.load_runs
loss_gap = _core.loss_gap
optimal_allocation = _core.optimal_allocation
param_count = _core.param_count
pareto_frontier = _core.pareto_frontier
predict_loss = _core.predict_loss
repetition_tradeoff = _core.repetition_tradeoff
synth_runs = _core.synth_runs
train_toy = _core.train_toy

__all__ = [
    "ConvergenceError", "DomainError", "InfeasibleError", "InputError",
    "LawParams", "NumericError", "__version__", "base_params", "best_loss_at",
    "compute_flops", "critical_compute", "effective_data",
    "effective_data_geometric", "effective_fraction", "effective_params",
    "ffn_hidden", "fit_crit_powerlaw", "fit_two_stage", "goodness",
    "grad_check_toy", "load_runs", "loss_gap", "optimal_allocation",
    "param_count", "pareto_frontier", "predict_loss", "repetition_tradeoff",
    "synth_runs", "train_toy",
]
