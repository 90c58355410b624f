"""Generic fixed-point driver with optional acceleration.

Runs x_{k+1} = x_k + B(xi_k), where xi_k is the raw residual for plain
iterations and the accelerator's recombined residual at active iterations
(k % p == 0). Records a per-iteration convergence history.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Protocol

import numpy as np

from .accelerators import AcceleratorConfig, AndersonAcceleration, make_accelerator

__all__ = [
    "FixedPointProblem",
    "RunConfig",
    "ConvergenceHistory",
    "EvaluationError",
    "run",
    "is_active",
]


class FixedPointProblem(Protocol):
    """What a problem must provide to be driven by :func:`run`."""

    n: int

    def residual(self, x: np.ndarray) -> np.ndarray:
        """r = -F(x); zero at a solution."""
        ...

    def apply_B(self, v: np.ndarray) -> np.ndarray:
        """Action of the operator approximating the inverse Jacobian."""
        ...


class EvaluationError(RuntimeError):
    """Problem evaluation failed; carries the iteration index."""

    def __init__(self, iteration: int, what: str):
        super().__init__(f"{what} failed at iteration {iteration}")
        self.iteration = iteration


@dataclass
class RunConfig:
    accel: AcceleratorConfig = field(default_factory=lambda: AcceleratorConfig(kind="none"))
    max_iter: int = 50
    rel_tol: float = 1e-8
    abs_tol: float = 1e-300
    stop_norm: str = "2"  # "2" or "inf"; the other norm is still recorded
    divergence_factor: float = 1e12

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.stop_norm not in ("2", "inf"):
            raise ValueError("stop_norm must be '2' or 'inf'")


@dataclass
class ConvergenceHistory:
    """Per-iteration records of a run, as parallel arrays."""

    k: np.ndarray
    res_norm_2: np.ndarray
    res_norm_inf: np.ndarray
    rel_res_norm: np.ndarray
    active: np.ndarray
    column_accepted: np.ndarray
    window_m: np.ndarray
    kappa_f: np.ndarray  # NaN where the window is empty
    extra: Optional[np.ndarray] = None
    extra_name: Optional[str] = None
    status: str = "max_iter"
    iterations: int = 0

    def __len__(self):
        return len(self.k)


class _HistoryBuilder:
    _FIELDS = ("res2", "resinf", "relres", "kappa", "extra")

    def __init__(self, with_extra: bool):
        self.n = 0
        cap = 1024
        self.f = {name: np.empty(cap) for name in self._FIELDS}
        self.active = np.empty(cap, dtype=bool)
        self.accepted = np.empty(cap, dtype=bool)
        self.window_m = np.empty(cap, dtype=np.int64)
        self.with_extra = with_extra

    def _grow(self):
        cap = 2 * len(self.active)
        for name in self._FIELDS:
            new = np.empty(cap)
            new[: self.n] = self.f[name][: self.n]
            self.f[name] = new
        for name in ("active", "accepted", "window_m"):
            old = getattr(self, name)
            new = np.empty(cap, dtype=old.dtype)
            new[: self.n] = old[: self.n]
            setattr(self, name, new)

    def add(self, res2, resinf, relres, active, accepted, window_m, kappa, extra):
        if self.n == len(self.active):
            self._grow()
        i = self.n
        self.f["res2"][i] = res2
        self.f["resinf"][i] = resinf
        self.f["relres"][i] = relres
        self.f["kappa"][i] = kappa
        self.f["extra"][i] = extra
        self.active[i] = active
        self.accepted[i] = accepted
        self.window_m[i] = window_m
        self.n = i + 1

    def finish(self, status, iterations, extra_name):
        n = self.n
        return ConvergenceHistory(
            k=np.arange(n),
            res_norm_2=self.f["res2"][:n].copy(),
            res_norm_inf=self.f["resinf"][:n].copy(),
            rel_res_norm=self.f["relres"][:n].copy(),
            active=self.active[:n].copy(),
            column_accepted=self.accepted[:n].copy(),
            window_m=self.window_m[:n].copy(),
            kappa_f=self.f["kappa"][:n].copy(),
            extra=self.f["extra"][:n].copy() if self.with_extra else None,
            extra_name=extra_name,
            status=status,
            iterations=iterations,
        )


def is_active(k: int, p: int) -> bool:
    """Whether iteration k is an active (accelerated) one for period p."""
    if p < 1:
        raise ValueError("period must be >= 1")
    return k % p == 0


def run(problem, x0, cfg: RunConfig, observe=None, observe_name=None):
    """Drive the fixed-point iteration, optionally accelerated.

    Parameters
    ----------
    problem : FixedPointProblem
    x0 : initial iterate, shape (problem.n,)
    cfg : RunConfig; cfg.accel selects and parametrizes the accelerator
    observe : optional callable x -> float recorded once per iteration
    observe_name : label for the observed column

    Returns
    -------
    (x_final, history). The run stops on convergence
    (||r_k|| <= max(rel_tol * ||r_0||, abs_tol) in cfg.stop_norm), on the
    divergence guard (||r_k|| > divergence_factor * ||r_0||), on a
    non-finite residual norm (status "error"), or after max_iter steps.
    The window is touched only at active iterations, so its columns
    difference consecutive *active* residuals when cfg.accel.period_p > 1.
    """
    x = np.array(x0, dtype=np.float64, copy=True)
    if x.shape != (problem.n,):
        raise ValueError(f"x0 has shape {x.shape}, expected ({problem.n},)")
    accel = make_accelerator(cfg.accel)
    p = cfg.accel.period_p
    builder = _HistoryBuilder(with_extra=observe is not None)
    status = "max_iter"
    ref_norm = None
    k = 0
    for k in range(cfg.max_iter + 1):
        try:
            r = problem.residual(x)
        except Exception as exc:
            raise EvaluationError(k, "residual evaluation") from exc
        res2 = float(np.linalg.norm(r))
        resinf = float(np.abs(r).max()) if r.size else 0.0
        stop_val = res2 if cfg.stop_norm == "2" else resinf
        if k == 0:
            ref_norm = stop_val
            res2_0 = res2
        relres = 1.0 if k == 0 else (res2 / res2_0 if res2_0 > 0.0 else math.inf)

        def record(active=False, accepted=False):
            m = accel.m if accel is not None else 0
            kappa = accel.kappa_f() if (accel is not None and m > 0) else math.nan
            builder.add(res2, resinf, relres, active, accepted, m,
                        kappa, observe(x) if observe is not None else math.nan)

        if not math.isfinite(stop_val):
            record()
            status = "error"
            break
        if stop_val <= max(cfg.rel_tol * ref_norm, cfg.abs_tol):
            record()
            status = "converged"
            break
        if stop_val > cfg.divergence_factor * ref_norm:
            record()
            status = "diverged"
            break
        if k == cfg.max_iter:
            record()
            status = "max_iter"
            break

        active = accel is not None and is_active(k, p)
        if active:
            if isinstance(accel, AndersonAcceleration):
                x_next = accel.step(x, -r)
                record(active=True, accepted=accel.last_accepted)
                x = x_next
                continue
            xi = accel.step(r)
            accepted = accel.last_accepted
        else:
            xi = r
            accepted = False
        record(active=active, accepted=accepted)
        try:
            bxi = problem.apply_B(xi)
        except Exception as exc:
            raise EvaluationError(k, "operator application") from exc
        x = x + bxi
    return x, builder.finish(status, iterations=k, extra_name=observe_name)
