"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

The backend is chosen once at import time: numba is used when it imports
cleanly, unless the environment variable ``BOOSTCONV_NUMBA`` is set to
``0``/``false``/``off``. Both implementations are kept importable so the
``bench`` CLI subcommand can time them against each other; they produce
bit-identical results (same per-element expressions, same accumulation
order).
"""

import os

import numpy as np

_ENV_FLAG = "BOOSTCONV_NUMBA"


def _numba_wanted() -> bool:
    return os.environ.get(_ENV_FLAG, "1").strip().lower() not in ("0", "false", "off")


def _csr_matvec_loops(row_ptr, col_idx, values, x, out):
    # Row-sequential accumulation; do not reorder (determinism contract).
    for i in range(out.shape[0]):
        acc = 0.0
        for jj in range(row_ptr[i], row_ptr[i + 1]):
            acc += values[jj] * x[col_idx[jj]]
        out[i] = acc


def _burgers_rhs_loops(u, dx, nu, out):
    n = u.shape[0]
    half = 1.0 / (2.0 * dx)
    lap = nu / (dx * dx)
    out[0] = 0.0
    out[n - 1] = 0.0
    for i in range(1, n - 1):
        out[i] = -u[i] * (u[i + 1] - u[i - 1]) * half + (u[i + 1] - 2.0 * u[i] + u[i - 1]) * lap


def csr_matvec_numpy(row_ptr, col_idx, values, x, out):
    """CSR matrix-vector product, vectorized numpy path."""
    n_rows = out.shape[0]
    rows = np.repeat(np.arange(n_rows), np.diff(row_ptr))
    # bincount accumulates in input order, matching the loop backend bit for bit
    out[:] = np.bincount(rows, weights=values * x[col_idx], minlength=n_rows)


def burgers_rhs_numpy(u, dx, nu, out):
    """Semi-discrete Burgers right-hand side, vectorized numpy path."""
    half = 1.0 / (2.0 * dx)
    lap = nu / (dx * dx)
    out[0] = 0.0
    out[-1] = 0.0
    out[1:-1] = -u[1:-1] * (u[2:] - u[:-2]) * half + (u[2:] - 2.0 * u[1:-1] + u[:-2]) * lap


csr_matvec_numba = None
burgers_rhs_numba = None

if _numba_wanted():
    try:
        from numba import njit
    except ImportError:
        njit = None
    if njit is not None:
        csr_matvec_numba = njit(cache=True)(_csr_matvec_loops)
        burgers_rhs_numba = njit(cache=True)(_burgers_rhs_loops)

if csr_matvec_numba is not None:
    BACKEND = "numba"
    csr_matvec = csr_matvec_numba
    burgers_rhs = burgers_rhs_numba
else:
    BACKEND = "numpy"
    csr_matvec = csr_matvec_numpy
    burgers_rhs = burgers_rhs_numpy


def backend_name() -> str:
    """Name of the kernel backend selected at import time."""
    return BACKEND
