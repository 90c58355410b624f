"""Test problems: stationary linear iterations and the 1D viscous Burgers march."""

import numpy as np

from . import kernels
from .linalg import SparseMatrixCSR, power_iteration, spmv

__all__ = [
    "LinearStationaryProblem",
    "Burgers1DProblem",
    "spectral_radius",
]


class LinearStationaryProblem:
    """F(x) = A x - b driven by a stationary scheme.

    richardson: B = I. jacobi: B = D^-1 with D the diagonal of A (every
    diagonal entry must be nonzero).
    """

    def __init__(self, A: SparseMatrixCSR, b, scheme: str = "richardson"):
        if A.n_rows != A.n_cols:
            raise ValueError("matrix must be square")
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (A.n_rows,):
            raise ValueError(f"right-hand side has shape {b.shape}, expected ({A.n_rows},)")
        if scheme not in ("richardson", "jacobi"):
            raise ValueError(f"unknown scheme {scheme!r}")
        self.A = A
        self.b = b
        self.scheme = scheme
        self.n = A.n_rows
        self._diag_inv = None
        if scheme == "jacobi":
            d = A.diagonal()
            if np.any(d == 0.0):
                raise ValueError("jacobi scheme needs a nonzero diagonal")
            self._diag_inv = 1.0 / d

    def residual(self, x: np.ndarray) -> np.ndarray:
        return self.b - spmv(self.A, x)

    def apply_B(self, v: np.ndarray) -> np.ndarray:
        if self.scheme == "richardson":
            return v
        return v * self._diag_inv

    def iteration_matrix_apply(self, v: np.ndarray) -> np.ndarray:
        """Action of I - B A, whose spectral radius drives the plain scheme."""
        return v - self.apply_B(spmv(self.A, v))


def spectral_radius(problem: LinearStationaryProblem, max_it: int = 20000,
                    tol: float = 1e-12, seed: int = 1234):
    """Power-iteration estimate of rho(I - B A) for a stationary problem."""
    return power_iteration(problem.iteration_matrix_apply, problem.n,
                           max_it=max_it, tol=tol, seed=seed)


class Burgers1DProblem:
    """Semi-discrete 1D viscous Burgers equation on [0, 1], marched by
    explicit Euler.

    Central second-order differences for both convection (non-conservative
    u u_x) and diffusion; homogeneous Dirichlet values pinned to exact
    zeros at both ends, with zero residual rows there. The Euler update is
    the basic iteration with B = dt * I.
    """

    def __init__(self, nx: int = 200, nu: float = 0.01, dt: float = 1e-4):
        if nx < 3:
            raise ValueError("nx must be >= 3")
        if nu < 0.0:
            raise ValueError("nu must be nonnegative")
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        self.nx = int(nx)
        self.nu = float(nu)
        self.dt = float(dt)
        self.dx = 1.0 / (nx - 1)
        self.n = self.nx

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nx)

    def initial_condition(self) -> np.ndarray:
        """sin(2 pi x) with the boundary entries forced to exact zeros."""
        u = np.sin(2.0 * np.pi * self.grid())
        u[0] = 0.0
        u[-1] = 0.0
        return u

    def residual(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        if u.shape != (self.nx,):
            raise ValueError(f"field has shape {u.shape}, expected ({self.nx},)")
        if u[0] != 0.0 or u[-1] != 0.0:
            raise ValueError("boundary entries must be exactly zero")
        r = np.empty(self.nx)
        kernels.burgers_rhs(u, self.dx, self.nu, r)
        return r

    def apply_B(self, v: np.ndarray) -> np.ndarray:
        return self.dt * v

    def energy_l2(self, u: np.ndarray) -> float:
        """L2 norm of the field via trapezoidal quadrature on the grid."""
        u = np.asarray(u, dtype=np.float64)
        s = float(u @ u) - 0.5 * float(u[0] * u[0] + u[-1] * u[-1])
        return float(np.sqrt(self.dx * s))
