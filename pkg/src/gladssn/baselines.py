"""Armijo backtracking gradient descent, the comparison baseline.

Smooth problems with the identity metric only (psi must be zero).  Each
iteration backtracks from t0 until the sufficient-decrease test

    f(x - t g) <= f(x) - c1 * t * ||g||^2

passes; the step size resets to t0 every iteration.  Traces reuse the
solver's record layout so the same harness tooling applies: j_k holds the
backtrack count, lambda_k the accepted inverse step size 1/t, Lambda_k is
fixed at 0.0 (which also marks the trace as a baseline run), and
hess_evals stays 0.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .oracle import CompositeProblem
from .ssn import CONVERGED, MAXITER, STALLED, SolveResult, TraceRecord

__all__ = ["ArmijoConfig", "armijo_gd"]


@dataclass
class ArmijoConfig:
    c1: float = 1e-4
    backtrack: float = 0.5
    t0: float = 1.0
    grad_tol: float = 1e-8
    max_outer: int = 1000
    max_backtracks: int = 60

    def __post_init__(self):
        if not 0.0 < self.c1 < 1.0:
            raise ValueError(f"c1 must lie in (0, 1), got {self.c1}")
        if not 0.0 < self.backtrack < 1.0:
            raise ValueError(f"backtrack must lie in (0, 1), got {self.backtrack}")
        if self.t0 <= 0.0:
            raise ValueError(f"t0 must be positive, got {self.t0}")


def armijo_gd(problem: CompositeProblem, config: ArmijoConfig,
              x0: np.ndarray | None = None) -> SolveResult:
    if not problem.psi.is_zero:
        raise ValueError("armijo_gd handles smooth problems only (psi must be zero)")
    if not problem.metric.is_identity:
        raise ValueError("armijo_gd works in the Euclidean metric only")
    n = problem.dim
    if x0 is None:
        x0 = problem.x0 if problem.x0 is not None else np.zeros(n)
    x = np.array(x0, dtype=np.float64)
    grad = np.asarray(problem.smooth.eval_grad(x), dtype=np.float64)
    f_val = float(problem.smooth.eval_f(x))
    trials = 0
    trace: list[TraceRecord] = []
    start_ns = time.perf_counter_ns()
    k = 0
    status = MAXITER

    while True:
        g_norm = float(np.linalg.norm(grad))
        if g_norm <= config.grad_tol:
            status = CONVERGED
            break
        if k >= config.max_outer:
            status = MAXITER
            break
        accepted = None
        t = config.t0
        for i in range(config.max_backtracks):
            trials += 1
            x_new = x - t * grad
            f_new = float(problem.smooth.eval_f(x_new))
            if f_new <= f_val - config.c1 * t * g_norm * g_norm:
                accepted = (i, t, x_new, f_new)
                break
            t *= config.backtrack
        if accepted is None:
            status = STALLED
            break
        i, t, x_new, f_new = accepted
        grad_new = np.asarray(problem.smooth.eval_grad(x_new), dtype=np.float64)
        trace.append(TraceRecord(
            k=k, j_k=i, lambda_k=1.0 / t, Lambda_k=0.0,
            f_val=f_val, F_val=f_val, g_k=g_norm, r_k=t * g_norm,
            inner_prod=float(grad_new @ (x - x_new)),
            hess_evals=0, trials=trials,
            wall_ns=time.perf_counter_ns() - start_ns))
        x, f_val, grad = x_new, f_new, grad_new
        k += 1

    return SolveResult(status=status, x=x, trace=trace, iters=k,
                       g_final=float(np.linalg.norm(grad)), f_final=f_val,
                       F_final=f_val, f_grad=grad, psi_sub=np.zeros(n),
                       F_sub=grad, Lambda_final=0.0, hess_evals=0, trials=trials)
