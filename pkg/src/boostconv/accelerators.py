"""Residual-recombination accelerators for fixed-point iterations.

Three interchangeable accelerators share one protocol: feed them the
residual of the current iterate (or, for Anderson, the iterate and the
function value) once per active iteration and they return the vector the
underlying solver should step with.

``PlainBoostConv`` keeps a sliding window of residual differences and
update directions and solves a fresh least-squares problem per step,
O(n N^2). ``RobustBoostConv`` maintains the same window through an
incrementally updated/downdated skinny QR factorization and discards new
columns that are numerically dependent on the stored ones, O(n N + N^2)
per step. ``AndersonAcceleration`` is the stabilized Anderson mixing
reference the robust scheme is equivalent to when the underlying operator
is a negative multiple of the identity.
"""

import math

import numpy as np

from .linalg import back_solve, orth_append, qr_downdate_first

__all__ = [
    "AcceleratorConfig",
    "AlreadyConvergedError",
    "xi_initial",
    "RobustBoostConv",
    "PlainBoostConv",
    "AndersonAcceleration",
    "broyden_form_step",
    "multisecant_check",
    "kappa_f_diag",
    "make_accelerator",
]

KINDS = ("none", "plain_boostconv", "robust_boostconv", "anderson")


class AlreadyConvergedError(ValueError):
    """Raised when an accelerator is fed an exactly zero initial residual."""


class AcceleratorConfig:
    """Knobs shared by all accelerator kinds.

    window_n   maximum number of stored residual-difference columns, >= 1
    tau        relative dependency threshold for discarding columns, > 0
    period_p   acceleration is applied at iterations k with k % p == 0
    kind       one of "none", "plain_boostconv", "robust_boostconv", "anderson"
    beta       mixing parameter (Anderson only; sign convention B = -beta*I)
    unaccelerated_first_step
               when True the very first active step passes the residual
               through unchanged instead of doubling it
    """

    def __init__(self, kind="robust_boostconv", window_n=5, tau=1e-10, period_p=1,
                 beta=-1.0, unaccelerated_first_step=False):
        if kind not in KINDS:
            raise ValueError(f"unknown accelerator kind {kind!r}")
        if window_n < 1:
            raise ValueError("window_n must be >= 1")
        if tau <= 0.0:
            raise ValueError("tau must be positive")
        if period_p < 1:
            raise ValueError("period_p must be >= 1")
        self.kind = kind
        self.window_n = int(window_n)
        self.tau = float(tau)
        self.period_p = int(period_p)
        self.beta = float(beta)
        self.unaccelerated_first_step = bool(unaccelerated_first_step)


def xi_initial(r0: np.ndarray, unaccelerated: bool = False) -> np.ndarray:
    """Recombined residual for the very first active step.

    The one-column window holding the initial residual forces a unit
    least-squares coefficient, so the recombined residual is twice the
    input. Raises :class:`AlreadyConvergedError` on a zero residual.
    """
    r0 = np.asarray(r0, dtype=np.float64)
    if float(np.linalg.norm(r0)) == 0.0:
        raise AlreadyConvergedError("initial residual is zero")
    return r0.copy() if unaccelerated else 2.0 * r0


def kappa_f_diag(R: np.ndarray) -> float:
    """Frobenius-norm condition number ||R||_F * ||R^-1||_F of a triangle."""
    R = np.asarray(R, dtype=np.float64)
    m = R.shape[0]
    if m == 0:
        raise ValueError("kappa_f_diag: empty factor")
    inv_cols = np.empty((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = 1.0
        inv_cols[:, j] = back_solve(R, e)
    return float(np.linalg.norm(R) * np.linalg.norm(inv_cols))


def _check_residual(r, n):
    r = np.asarray(r, dtype=np.float64)
    if n is not None and r.shape != (n,):
        raise ValueError(f"residual has shape {r.shape}, expected ({n},)")
    if not np.all(np.isfinite(r)):
        raise ValueError("residual contains non-finite entries")
    return r


class RobustBoostConv:
    """Windowed residual recombination with QR-based dependency screening.

    State per step: the direction matrix ``dirs`` (one column per stored
    residual difference), the QR factors ``Q``, ``R`` of those residual
    differences, and the residual/recombined-residual pair of the previous
    active step. A full window is downdated (oldest column dropped) before
    a new column is tried; if the new column fails the dependency test the
    pre-downdate factors are kept unchanged.
    """

    def __init__(self, cfg: AcceleratorConfig):
        self.cfg = cfg
        self.dirs = None
        self.Q = None
        self.R = np.zeros((0, 0))
        self.prev_res = None
        self.prev_recombined = None
        self.active_count = 0
        self.last_accepted = False

    @property
    def m(self) -> int:
        return 0 if self.Q is None else self.Q.shape[1]

    def kappa_f(self) -> float:
        """Condition diagnostic of the current triangle, NaN when empty."""
        if self.m == 0:
            return math.nan
        return kappa_f_diag(self.R)

    def step(self, r: np.ndarray) -> np.ndarray:
        """Consume the residual of the current active iteration, return xi."""
        r = _check_residual(r, None if self.prev_res is None else self.prev_res.shape[0])
        if self.active_count == 0:
            xi = xi_initial(r, self.cfg.unaccelerated_first_step)
            self.dirs = np.zeros((r.shape[0], 0))
            self.Q = np.zeros((r.shape[0], 0))
            self.last_accepted = False
        else:
            v = self.prev_res - r
            if self.m == self.cfg.window_n:
                dirs_c = self.dirs[:, 1:]
                if self.m >= 2:
                    Q_c, R_c = qr_downdate_first(self.Q, self.R)
                else:
                    Q_c = np.zeros((r.shape[0], 0))
                    R_c = np.zeros((0, 0))
            else:
                dirs_c, Q_c, R_c = self.dirs, self.Q, self.R
            grown = orth_append(Q_c, R_c, v, self.cfg.tau)
            if grown is None:
                # dependent column: keep the factors from the previous step,
                # including the column a full window would have dropped
                self.last_accepted = False
            else:
                new_dir = self.prev_recombined + r - self.prev_res
                self.dirs = np.column_stack([dirs_c, new_dir])
                self.Q, self.R = grown
                self.last_accepted = True
            if self.m == 0:
                xi = r.copy()
            else:
                coeff = back_solve(self.R, self.Q.T @ r)
                xi = r + self.dirs @ coeff
        self.prev_res = r.copy()
        self.prev_recombined = xi.copy()
        self.active_count += 1
        return xi


class PlainBoostConv:
    """Sliding-window recombination with a fresh least-squares solve per step.

    No dependency screening: every residual difference enters the window,
    the oldest column is dropped once the window is full, and rank-deficient
    windows fall back to the minimum-norm solution.
    """

    def __init__(self, cfg: AcceleratorConfig):
        self.cfg = cfg
        self.res_diffs = None
        self.dirs = None
        self.prev_res = None
        self.prev_recombined = None
        self.active_count = 0
        self.last_accepted = False

    @property
    def m(self) -> int:
        return 0 if self.res_diffs is None else self.res_diffs.shape[1]

    def kappa_f(self) -> float:
        """Condition diagnostic from a fresh QR of the window, NaN if empty."""
        if self.m == 0:
            return math.nan
        R = np.linalg.qr(self.res_diffs, mode="r")
        if np.any(np.diag(R) == 0.0):
            return math.inf
        return kappa_f_diag(R)

    def step(self, r: np.ndarray) -> np.ndarray:
        r = _check_residual(r, None if self.prev_res is None else self.prev_res.shape[0])
        if self.active_count == 0:
            xi = xi_initial(r, self.cfg.unaccelerated_first_step)
            self.res_diffs = np.zeros((r.shape[0], 0))
            self.dirs = np.zeros((r.shape[0], 0))
            self.last_accepted = False
        else:
            v = self.prev_res - r
            new_dir = self.prev_recombined + r - self.prev_res
            if self.m == self.cfg.window_n:
                self.res_diffs = self.res_diffs[:, 1:]
                self.dirs = self.dirs[:, 1:]
            self.res_diffs = np.column_stack([self.res_diffs, v])
            self.dirs = np.column_stack([self.dirs, new_dir])
            coeff, *_ = np.linalg.lstsq(self.res_diffs, r, rcond=None)
            xi = r + self.dirs @ coeff
            self.last_accepted = True
        self.prev_res = r.copy()
        self.prev_recombined = xi.copy()
        self.active_count += 1
        return xi


class AndersonAcceleration:
    """Stabilized Anderson mixing with the same QR screening as the robust scheme.

    Consumes the iterate and the function value instead of the residual and
    produces the next iterate directly; the mixing parameter plays the role
    of the operator -beta * I.
    """

    def __init__(self, cfg: AcceleratorConfig):
        self.cfg = cfg
        self.dx_cols = None
        self.df_cols = None
        self.Q = None
        self.R = np.zeros((0, 0))
        self.prev_x = None
        self.prev_f = None
        self.active_count = 0
        self.last_accepted = False

    @property
    def m(self) -> int:
        return 0 if self.Q is None else self.Q.shape[1]

    def kappa_f(self) -> float:
        if self.m == 0:
            return math.nan
        return kappa_f_diag(self.R)

    def step(self, x: np.ndarray, f_x: np.ndarray) -> np.ndarray:
        """Consume (x_k, F(x_k)) and return x_{k+1}."""
        x = np.asarray(x, dtype=np.float64)
        f_x = _check_residual(f_x, x.shape[0])
        beta = self.cfg.beta
        if self.active_count == 0:
            self.dx_cols = np.zeros((x.shape[0], 0))
            self.df_cols = np.zeros((x.shape[0], 0))
            self.Q = np.zeros((x.shape[0], 0))
            self.last_accepted = False
            x_next = x + beta * f_x
        else:
            df = f_x - self.prev_f
            dx = x - self.prev_x
            if self.m == self.cfg.window_n:
                dx_c = self.dx_cols[:, 1:]
                df_c = self.df_cols[:, 1:]
                if self.m >= 2:
                    Q_c, R_c = qr_downdate_first(self.Q, self.R)
                else:
                    Q_c = np.zeros((x.shape[0], 0))
                    R_c = np.zeros((0, 0))
            else:
                dx_c, df_c, Q_c, R_c = self.dx_cols, self.df_cols, self.Q, self.R
            grown = orth_append(Q_c, R_c, df, self.cfg.tau)
            if grown is None:
                self.last_accepted = False
            else:
                self.dx_cols = np.column_stack([dx_c, dx])
                self.df_cols = np.column_stack([df_c, df])
                self.Q, self.R = grown
                self.last_accepted = True
            if self.m == 0:
                x_next = x + beta * f_x
            else:
                gamma = back_solve(self.R, self.Q.T @ f_x)
                x_next = x + beta * f_x - (self.dx_cols + beta * self.df_cols) @ gamma
        self.prev_x = x.copy()
        self.prev_f = f_x.copy()
        self.active_count += 1
        return x_next


def _apply_columns(apply_B, M):
    out = np.empty_like(M)
    for j in range(M.shape[1]):
        out[:, j] = apply_B(M[:, j])
    return out


def _qr_full_rank(dF):
    Q, R = np.linalg.qr(dF)
    d = np.abs(np.diag(R))
    scale = float(np.linalg.norm(dF))
    if dF.shape[1] and (scale == 0.0 or d.min() <= 1e-13 * scale):
        raise ValueError("difference matrix is rank deficient")
    return Q, R


def broyden_form_step(dX, dF, apply_B, f_x, x):
    """One multisecant quasi-Newton step in operator-update form.

    x_next = x - B f - (dX - B dF) dF^+ f, with the pseudo-inverse applied
    through a from-scratch QR. Used as the oracle side of the formulation
    equivalence checks; requires full column rank.
    """
    dX = np.asarray(dX, dtype=np.float64)
    dF = np.asarray(dF, dtype=np.float64)
    f_x = np.asarray(f_x, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if dX.shape != dF.shape or dX.shape[0] != x.shape[0]:
        raise ValueError("broyden_form_step: shape mismatch")
    Q, R = _qr_full_rank(dF)
    coeff = back_solve(R, Q.T @ f_x)
    return x - apply_B(f_x) - (dX - _apply_columns(apply_B, dF)) @ coeff


def multisecant_check(dX, dF, apply_B):
    """Residuals of the secant and no-change conditions of the implied update.

    For G = B + (dX - B dF) dF^+ returns (||G dF - dX||_F, max ||(G - B) q||
    over an orthonormal basis q of the orthogonal complement of range(dF)).
    Both vanish for exact arithmetic and full-rank dF.
    """
    dX = np.asarray(dX, dtype=np.float64)
    dF = np.asarray(dF, dtype=np.float64)
    if dX.shape != dF.shape:
        raise ValueError("multisecant_check: shape mismatch")
    n, m = dF.shape
    Q_full, R_full = np.linalg.qr(dF, mode="complete")
    R = R_full[:m, :m]
    d = np.abs(np.diag(R))
    scale = float(np.linalg.norm(dF))
    if m and (scale == 0.0 or d.min() <= 1e-13 * scale):
        raise ValueError("difference matrix is rank deficient")
    low_rank = dX - _apply_columns(apply_B, dF)
    # secant condition: G dF - dX = low_rank (dF^+ dF) + B dF - dX + ... collapses
    # to low_rank @ (R^-1 Q1' dF) - low_rank
    Q1 = Q_full[:, :m]
    coeff = np.empty((m, m))
    proj = Q1.T @ dF
    for j in range(m):
        coeff[:, j] = back_solve(R, proj[:, j])
    secant_res = float(np.linalg.norm(low_rank @ coeff - low_rank))
    # no-change condition on the orthogonal complement
    nochange_res = 0.0
    if n > m:
        Q2 = Q_full[:, m:]
        mix = Q1.T @ Q2
        for j in range(n - m):
            vec = low_rank @ back_solve(R, mix[:, j])
            nochange_res = max(nochange_res, float(np.linalg.norm(vec)))
    return secant_res, nochange_res


def make_accelerator(cfg: AcceleratorConfig):
    """Instantiate the accelerator selected by ``cfg.kind`` (None for "none")."""
    if cfg.kind == "none":
        return None
    if cfg.kind == "plain_boostconv":
        return PlainBoostConv(cfg)
    if cfg.kind == "robust_boostconv":
        return RobustBoostConv(cfg)
    if cfg.kind == "anderson":
        return AndersonAcceleration(cfg)
    raise ValueError(f"unknown accelerator kind {cfg.kind!r}")
