from ._fedtd import (
    BoundParams,
    ExperimentConfig,
    Mrp,
    PerturbedEnsemble,
    __version__,
    build_ensemble,
    evaluate_bound,
    fed_bound_terms,
    figure_ids,
    generate_random_mrp,
    mixing_time,
    perturb_kernel,
    project_row_to_simplex,
    run_fedtd,
    run_single_agent,
    run_sweep,
    server_aggregate,
    solve_true_value,
    spectral_norm,
    stationary_distribution,
    td_step,
)

__all__ = [
    "BoundParams",
    "ExperimentConfig",
    "Mrp",
    "PerturbedEnsemble",
    "__version__",
    "build_ensemble",
    "evaluate_bound",
    "fed_bound_terms",
    "figure_ids",
    "generate_random_mrp",
    "mixing_time",
    "perturb_kernel",
    "project_row_to_simplex",
    "run_fedtd",
    "run_single_agent",
    "run_sweep",
    "server_aggregate",
    "solve_true_value",
    "spectral_norm",
    "stationary_distribution",
    "td_step",
]
