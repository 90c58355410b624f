"""Residual-recombination acceleration for fixed-point iterations.

Wraps an existing iteration x_{k+1} = x_k + B r_k without modifying it:
at active iterations the residual is replaced by a recombination of stored
residual differences, chosen by a small least-squares problem. The robust
variant maintains the window through an updated/downdated skinny QR
factorization and discards numerically dependent columns, which keeps the
recombination well conditioned and can recover convergence of otherwise
diverging schemes.
"""

from .accelerators import (
    AcceleratorConfig,
    AlreadyConvergedError,
    AndersonAcceleration,
    PlainBoostConv,
    RobustBoostConv,
    broyden_form_step,
    kappa_f_diag,
    make_accelerator,
    multisecant_check,
    xi_initial,
)
from .harness import ConvergenceHistory, EvaluationError, FixedPointProblem, RunConfig, is_active, run
from .kernels import backend_name
from .linalg import (
    SparseMatrixCSR,
    back_solve,
    csr_from_triplets,
    orth_append,
    power_iteration,
    qr_downdate_first,
    spmv,
)
from .mmio import MatrixMarketError, mm_read_matrix, mm_read_vector
from .problems import Burgers1DProblem, LinearStationaryProblem, spectral_radius

__version__ = "0.1.0"

__all__ = [
    "AcceleratorConfig",
    "AlreadyConvergedError",
    "AndersonAcceleration",
    "Burgers1DProblem",
    "ConvergenceHistory",
    "EvaluationError",
    "FixedPointProblem",
    "LinearStationaryProblem",
    "MatrixMarketError",
    "PlainBoostConv",
    "RobustBoostConv",
    "RunConfig",
    "SparseMatrixCSR",
    "back_solve",
    "backend_name",
    "broyden_form_step",
    "csr_from_triplets",
    "is_active",
    "kappa_f_diag",
    "make_accelerator",
    "mm_read_matrix",
    "mm_read_vector",
    "multisecant_check",
    "orth_append",
    "power_iteration",
    "qr_downdate_first",
    "run",
    "spectral_radius",
    "spmv",
    "xi_initial",
    "__version__",
]
