"""Benchmark command line: linear and Burgers experiments, spectral
diagnostics, and a kernel backend benchmark.

Each experiment writes ``<experiment>.history.csv`` plus
``<experiment>.summary.json`` into the ``--out`` directory. Exit codes:
0 converged or completed, 2 divergence detected (residual grew above its
initial value), 1 usage/IO/parse errors.
"""

import argparse
import csv
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import kernels
from .accelerators import AcceleratorConfig
from .harness import RunConfig, run
from .mmio import mm_read_matrix, mm_read_vector
from .problems import Burgers1DProblem, LinearStationaryProblem, spectral_radius

DATA_DIR_ENV = "BOOSTCONV_DATA_DIR"

ACCEL_NAMES = {
    "none": "none",
    "plain": "plain_boostconv",
    "robust": "robust_boostconv",
    "anderson": "anderson",
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the contract reserves 2 for divergence
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _resolve_path(path: str) -> str:
    """Return the path as given, or relative to $BOOSTCONV_DATA_DIR if only
    the latter exists."""
    if os.path.exists(path):
        return path
    data_dir = os.environ.get(DATA_DIR_ENV)
    if data_dir:
        candidate = os.path.join(data_dir, path)
        if os.path.exists(candidate):
            return candidate
    return path


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return ""
    return f"{x:.17g}"


def write_history_csv(path, hist):
    cols = ["k", "active", "accepted", "window_m", "res2", "resinf", "relres2", "kappa_f"]
    if hist.extra is not None:
        cols.append(hist.extra_name or "extra")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for i in range(len(hist)):
            row = [
                int(hist.k[i]),
                int(hist.active[i]),
                int(hist.column_accepted[i]),
                int(hist.window_m[i]),
                _fmt(hist.res_norm_2[i]),
                _fmt(hist.res_norm_inf[i]),
                _fmt(hist.rel_res_norm[i]),
                _fmt(hist.kappa_f[i]),
            ]
            if hist.extra is not None:
                row.append(_fmt(hist.extra[i]))
            w.writerow(row)


def write_summary_json(path, summary):
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _finish_run(args, experiment, config_echo, hist, wall):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    final_rel = float(hist.rel_res_norm[-1])
    summary = {
        "experiment": experiment,
        "config": config_echo,
        "iterations": int(hist.iterations),
        "final_rel_res": final_rel,
        "status": hist.status,
        "wall_time_s": wall,
    }
    write_history_csv(out / f"{experiment}.history.csv", hist)
    write_summary_json(out / f"{experiment}.summary.json", summary)
    diverged = hist.status == "diverged" or final_rel > 1.0
    print(f"{experiment}: status={hist.status} iterations={hist.iterations} "
          f"final_rel_res={final_rel:.6e}")
    return 2 if diverged else 0


def _accel_config(args) -> AcceleratorConfig:
    return AcceleratorConfig(
        kind=ACCEL_NAMES[args.accel],
        window_n=args.window,
        tau=args.tau,
        period_p=args.period,
        beta=getattr(args, "beta", -1.0),
    )


def cmd_linear(args) -> int:
    A = mm_read_matrix(_resolve_path(args.matrix))
    if args.rhs:
        b = mm_read_vector(_resolve_path(args.rhs))
    else:
        b = np.ones(A.n_rows)
    problem = LinearStationaryProblem(A, b, args.scheme)
    cfg = RunConfig(accel=_accel_config(args), max_iter=args.max_iter,
                    rel_tol=args.rel_tol, abs_tol=args.abs_tol)
    x0 = np.zeros(problem.n)
    t0 = time.perf_counter()
    _, hist = run(problem, x0, cfg)
    wall = time.perf_counter() - t0
    config_echo = {
        "command": "linear",
        "matrix": args.matrix,
        "rhs": args.rhs,
        "scheme": args.scheme,
        "accel": args.accel,
        "window": args.window,
        "tau": args.tau,
        "period": args.period,
        "beta": args.beta,
        "max_iter": args.max_iter,
        "rel_tol": args.rel_tol,
        "abs_tol": args.abs_tol,
    }
    experiment = f"linear-{args.scheme}-{args.accel}"
    return _finish_run(args, experiment, config_echo, hist, wall)


def _burgers_single(args, accel_name: str):
    problem = Burgers1DProblem(nx=args.nx, nu=args.nu, dt=args.dt)
    max_iter = max(1, int(round(args.tmax / args.dt)))
    cfg = RunConfig(
        accel=AcceleratorConfig(kind=ACCEL_NAMES[accel_name], window_n=args.window,
                                tau=args.tau, period_p=args.period),
        max_iter=max_iter,
        rel_tol=1e-15,
        abs_tol=args.res_tol,
        stop_norm="inf",
    )
    u0 = problem.initial_condition()
    snapshots = []

    def observe(u):
        k = observe.k
        observe.k = k + 1
        if args.snapshot_every and k % args.snapshot_every == 0:
            snapshots.append((k, u.copy()))
        return problem.energy_l2(u)

    observe.k = 0
    t0 = time.perf_counter()
    _, hist = run(problem, u0, cfg, observe=observe, observe_name="energy_l2")
    wall = time.perf_counter() - t0
    return problem, hist, wall, snapshots


def cmd_burgers(args) -> int:
    variants = ["none", "plain", "robust"] if args.compare else [args.accel]
    code = 0
    for accel_name in variants:
        problem, hist, wall, snapshots = _burgers_single(args, accel_name)
        config_echo = {
            "command": "burgers",
            "nx": args.nx,
            "dt": args.dt,
            "tmax": args.tmax,
            "nu": args.nu,
            "accel": accel_name,
            "window": args.window,
            "tau": args.tau,
            "period": args.period,
            "res_tol": args.res_tol,
            "snapshot_every": args.snapshot_every,
        }
        experiment = f"burgers-{accel_name}"
        rc = _finish_run(args, experiment, config_echo, hist, wall)
        if snapshots:
            path = Path(args.out) / f"{experiment}.fields.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["k"] + [f"u{i}" for i in range(problem.nx)])
                for k, u in snapshots:
                    w.writerow([k] + [_fmt(v) for v in u])
        code = max(code, rc)
    return code


def cmd_spectral(args) -> int:
    A = mm_read_matrix(_resolve_path(args.matrix))
    problem = LinearStationaryProblem(A, np.zeros(A.n_rows), args.scheme)
    rho, converged = spectral_radius(problem, max_it=args.max_it, tol=args.tol,
                                     seed=args.seed)
    print(f"scheme={args.scheme} rho_estimate={rho:.6f} converged={converged}")
    return 0


def cmd_bench(args) -> int:
    pairs = [
        ("csr_matvec", kernels.csr_matvec_numba, kernels.csr_matvec_numpy,
         _bench_csr_args(args.n)),
        ("burgers_rhs", kernels.burgers_rhs_numba, kernels.burgers_rhs_numpy,
         _bench_burgers_args(args.nx)),
    ]
    print(f"selected backend: {kernels.backend_name()}")
    for name, jit_fn, np_fn, call_args in pairs:
        t_np = _time_kernel(np_fn, call_args, args.repeat)
        line = f"{name:12s} numpy {t_np * 1e6:10.2f} us/call"
        if jit_fn is not None:
            jit_fn(*call_args)  # compile outside the timed region
            t_jit = _time_kernel(jit_fn, call_args, args.repeat)
            np_fn(*call_args)
            ref = call_args[-1].copy()
            jit_fn(*call_args)
            diff = float(np.max(np.abs(call_args[-1] - ref)))
            line += (f"   numba {t_jit * 1e6:10.2f} us/call"
                     f"   speedup {t_np / t_jit:6.2f}x   max|diff| {diff:.3e}")
        else:
            line += "   numba unavailable"
        print(line)
    return 0


def _bench_csr_args(n):
    rng = np.random.default_rng(7)
    diags = [(-2, 0.1), (-1, -1.0), (0, 4.0), (1, -1.0), (2, 0.1)]
    rows, cols, vals = [], [], []
    for off, v in diags:
        idx = np.arange(max(0, -off), min(n, n - off))
        rows.append(idx)
        cols.append(idx + off)
        vals.append(np.full(idx.size, v) + 0.01 * rng.standard_normal(idx.size))
    from .linalg import csr_from_triplets

    A = csr_from_triplets(n, n, np.concatenate(rows), np.concatenate(cols),
                          np.concatenate(vals))
    x = rng.standard_normal(n)
    out = np.empty(n)
    return (A.row_ptr, A.col_idx, A.values, x, out)


def _bench_burgers_args(nx):
    problem = Burgers1DProblem(nx=nx)
    u = problem.initial_condition()
    out = np.empty(nx)
    return (u, problem.dx, problem.nu, out)


def _time_kernel(fn, call_args, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(100):
            fn(*call_args)
        best = min(best, (time.perf_counter() - t0) / 100)
    return best


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="boostconv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("linear", help="stationary scheme on a MatrixMarket system")
    p.add_argument("--matrix", required=True)
    p.add_argument("--rhs", default=None, help="MatrixMarket array file; default all-ones")
    p.add_argument("--scheme", choices=["richardson", "jacobi"], default="richardson")
    p.add_argument("--accel", choices=list(ACCEL_NAMES), default="none")
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--tau", type=float, default=1e-10)
    p.add_argument("--period", type=int, default=1)
    p.add_argument("--beta", type=float, default=-1.0, help="Anderson mixing parameter")
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--rel-tol", type=float, default=1e-8)
    p.add_argument("--abs-tol", type=float, default=1e-300)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_linear)

    p = sub.add_parser("burgers", help="1D viscous Burgers march")
    p.add_argument("--nx", type=int, default=200)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--tmax", type=float, default=2.0)
    p.add_argument("--nu", type=float, default=0.01)
    p.add_argument("--accel", choices=["none", "plain", "robust"], default="none")
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--tau", type=float, default=1e-10)
    p.add_argument("--period", type=int, default=1)
    p.add_argument("--res-tol", type=float, default=1e-10,
                   help="stop when ||R(u)||_inf falls below this")
    p.add_argument("--snapshot-every", type=int, default=0,
                   help="write every K-th field to <experiment>.fields.csv")
    p.add_argument("--compare", action="store_true",
                   help="run the none/plain/robust variants back to back")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_burgers)

    p = sub.add_parser("spectral", help="power-iteration estimate of rho(I - B A)")
    p.add_argument("--matrix", required=True)
    p.add_argument("--scheme", choices=["richardson", "jacobi"], default="richardson")
    p.add_argument("--max-it", type=int, default=20000)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--seed", type=int, default=1234)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("bench", help="time the numba and numpy kernel backends")
    p.add_argument("--n", type=int, default=100000, help="CSR test-matrix dimension")
    p.add_argument("--nx", type=int, default=200, help="Burgers grid size")
    p.add_argument("--repeat", type=int, default=5)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"boostconv: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
