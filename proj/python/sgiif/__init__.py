"""Sparse grid IPDG discretisation with Krylov IIF time stepping."""

from ._sgiif import (
    NumericalError,
    ValidationError,
    converge,
    count_local_maxima,
    diffusion_matrix,
    dof_count,
    find_cfl,
    iif_coefficients,
    run,
    spectrum,
)

__all__ = [
    "NumericalError",
    "ValidationError",
    "converge",
    "count_local_maxima",
    "diffusion_matrix",
    "dof_count",
    "find_cfl",
    "iif_coefficients",
    "run",
    "spectrum",
]
