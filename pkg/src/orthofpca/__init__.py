"""Bayesian functional PCA with adaptive orthogonality priors."""

from .basis import (
    KIND_BSPLINE,
    KIND_ORTHONORMAL,
    BasisSpec,
    BasisSystem,
    GramMatrix,
    build_basis,
    design_matrix,
    evaluate_basis,
    function_norm_sq,
    inner_product,
)
from .errors import (
    ConfigurationError,
    DataError,
    DegenerateConstraintError,
    DimensionError,
    DomainError,
    NumericalError,
    OrthoFpcaError,
)
from .metrics import (
    DEFAULT_EPSILON,
    MetricReport,
    compute_metrics,
    effective_components,
    inner_product_matrix,
    orthogonality_measure,
)
from .prior import (
    AopConfig,
    CoefficientSet,
    ConstraintMatrix,
    build_h_matrix,
    conditional_prior_params,
    conditional_trace_variance,
    figure1_density_grid,
    log_joint_prior_density,
    sample_sequential_prior,
)
from .sampler import (
    FunctionalDataset,
    GibbsConfig,
    GibbsState,
    PosteriorDraws,
    beta_full_conditional,
    initial_state,
    run_gibbs,
    score_full_conditional,
    update_beta,
    update_horseshoe,
    update_lambda,
    update_scores,
    update_sigma,
    update_tau,
)
from .simulation import (
    SCENARIOS,
    STUDY_METHODS,
    CellResult,
    ScenarioSpec,
    StudyReport,
    generate_dataset,
    run_study,
    true_functions,
)

__version__ = "0.1.0"

__all__ = [
    "AopConfig",
    "BasisSpec",
    "BasisSystem",
    "CellResult",
    "CoefficientSet",
    "ConfigurationError",
    "ConstraintMatrix",
    "DEFAULT_EPSILON",
    "DataError",
    "DegenerateConstraintError",
    "DimensionError",
    "DomainError",
    "FunctionalDataset",
    "GibbsConfig",
    "GibbsState",
    "GramMatrix",
    "KIND_BSPLINE",
    "KIND_ORTHONORMAL",
    "MetricReport",
    "NumericalError",
    "OrthoFpcaError",
    "PosteriorDraws",
    "SCENARIOS",
    "STUDY_METHODS",
    "ScenarioSpec",
    "StudyReport",
    "beta_full_conditional",
    "build_basis",
    "build_h_matrix",
    "compute_metrics",
    "conditional_prior_params",
    "conditional_trace_variance",
    "design_matrix",
    "effective_components",
    "evaluate_basis",
    "figure1_density_grid",
    "function_norm_sq",
    "generate_dataset",
    "initial_state",
    "inner_product",
    "inner_product_matrix",
    "log_joint_prior_density",
    "orthogonality_measure",
    "run_gibbs",
    "run_study",
    "sample_sequential_prior",
    "score_full_conditional",
    "true_functions",
    "update_beta",
    "update_horseshoe",
    "update_lambda",
    "update_scores",
    "update_sigma",
    "update_tau",
]
