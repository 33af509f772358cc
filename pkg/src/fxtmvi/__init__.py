"""Fixed-time solver for mixed variational inequalities.

Solves problems of the form: find ``x*`` with
``<F(x*), x - x*> + g(x) - g(x*) >= 0`` for all ``x``, by forward-Euler
discretization of a residual-rescaled prox-gradient flow whose convergence
time admits a bound independent of the initial condition.  Ships the
matching closed-form certificates (contraction factor, exponent windows,
settling-time bounds, fixed step budgets, error envelopes) and a benchmark
harness with two stock experiments.
"""

from .analysis import (
    ConvergenceCertificate,
    certificate,
    certificate_from_constants,
    continuous_envelope,
    contraction_factor,
    discrete_envelope,
    exponents_from_xi,
    settle_time_bound,
    settle_time_bound_xi,
    step_budget,
    xi_from_exponents,
)
from .bench import (
    ExperimentConfig,
    ExperimentPreset,
    ExperimentResult,
    build_example1,
    build_example2,
    reference_solution,
    run_experiment,
    with_reference,
)
from .core import (
    DiscretizationParams,
    FlowParams,
    IterateRecord,
    MviProblem,
    RunLog,
    as_vector,
    euclidean_norm,
    validate_problem,
)
from .flow import ModifiedRhs, NominalRhs, prox_grad_map, residual_gain, solve
from .operators import (
    Dataset,
    elasticnet_logistic_operator,
    example1_operator,
    generate_dataset,
    saddle_operator,
)
from .prox import (
    ball_indicator,
    box_indicator,
    l1_penalty,
    project_ball,
    project_box,
    prox_l1,
    prox_oracle_separable,
    prox_zero,
    zero_function,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceCertificate",
    "Dataset",
    "DiscretizationParams",
    "ExperimentConfig",
    "ExperimentPreset",
    "ExperimentResult",
    "FlowParams",
    "IterateRecord",
    "ModifiedRhs",
    "MviProblem",
    "NominalRhs",
    "RunLog",
    "as_vector",
    "ball_indicator",
    "box_indicator",
    "build_example1",
    "build_example2",
    "certificate",
    "certificate_from_constants",
    "continuous_envelope",
    "contraction_factor",
    "discrete_envelope",
    "elasticnet_logistic_operator",
    "euclidean_norm",
    "example1_operator",
    "exponents_from_xi",
    "generate_dataset",
    "l1_penalty",
    "project_ball",
    "project_box",
    "prox_grad_map",
    "prox_l1",
    "prox_oracle_separable",
    "prox_zero",
    "reference_solution",
    "residual_gain",
    "run_experiment",
    "saddle_operator",
    "settle_time_bound",
    "settle_time_bound_xi",
    "solve",
    "step_budget",
    "validate_problem",
    "with_reference",
    "xi_from_exponents",
    "zero_function",
]
