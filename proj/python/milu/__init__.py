"""Modified incomplete LU preconditioners and localized condition-number estimates."""

from ._core import (
    AdaptiveTree,
    ConfigError,
    MiluError,
    MiluFactorization,
    Preconditioner,
    SpdMSystem,
    VertexOrdering,
    build_system,
    condition_number,
    dense_eigen_oracle,
    fvm_matrix,
    lexicographic_order,
    milu_factor,
    pcg,
    residual_rowsums,
    run_experiment,
    sector_order,
    tau_direct,
    tau_recursive,
    theoretical_bound,
    tree_order,
    validate_ordering,
)

__all__ = [
    "AdaptiveTree",
    "ConfigError",
    "MiluError",
    "MiluFactorization",
    "Preconditioner",
    "SpdMSystem",
    "VertexOrdering",
    "build_system",
    "condition_number",
    "dense_eigen_oracle",
    "fvm_matrix",
    "lexicographic_order",
    "milu_factor",
    "pcg",
    "residual_rowsums",
    "run_experiment",
    "sector_order",
    "tau_direct",
    "tau_recursive",
    "theoretical_bound",
    "tree_order",
    "validate_ordering",
]
