"""Globalized lazy adaptive semismooth Newton for F = f + psi.

Outer iteration k keeps a lazily refreshed curvature operator H (recomputed
every m iterations, at indices k - k % m).  Inner trials j = 0, 1, ... probe
regularizers lambda = 4^j * Lambda_k * g_k^p, where g_k is the dual norm of
the certified composite gradient, and solve the regularized model

    min_y  <f'(x_k), y - x_k> + 1/2 <H (y - x_k), y - x_k>
           + lambda/2 ||y - x_k||_B^2 + psi(y).

The model's optimality condition certifies a subgradient of psi at the
trial point, hence a composite gradient F'(x_+) there; the trial is
accepted when

    <F'(x_+), x_k - x_+>  >=  ||F'(x_+)||_*^2 / (2 lambda)
    F(x_k) - F(x_+)       >=  lambda/4 * ||x_+ - x_k||_B^2

both hold, after which Lambda_{k+1} = 4^{j_k} Lambda_k / 4.  Rejected
trials quadruple lambda; a failed inner solve counts as a rejected trial.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .linalg import LinOp, MetricB, SolverStallError, norm_b, solve_regularized, sym_part
from .oracle import CompositeProblem

__all__ = [
    "CONVERGED",
    "MAXITER",
    "STALLED",
    "NonFiniteError",
    "SolverConfig",
    "IterateState",
    "TraceRecord",
    "TrialResult",
    "SolveResult",
    "lazy_index",
    "trial_lambda",
    "acceptance_test",
    "trial_step",
    "solve",
]

CONVERGED = "converged"
MAXITER = "maxiter"
STALLED = "stalled"

# Inner prox-gradient budget for models with a nonzero psi.
_PROX_MAX_SWEEPS = 500


class NonFiniteError(RuntimeError):
    """A function value or gradient came back non-finite.

    k and j locate the outer iteration and inner trial (j is None when the
    starting point itself is bad).
    """

    def __init__(self, message: str, k: int | None = None, j: int | None = None):
        super().__init__(message)
        self.k = k
        self.j = j


@dataclass
class SolverConfig:
    p: float = 0.5
    m: int = 1
    Lambda0: float = 1.0
    grad_tol: float = 1e-8
    max_outer: int = 1000
    max_inner: int = 60
    hessian_mode: str | None = None  # None = as the oracle returns it
    symmetrize: bool = True

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        self.m = int(self.m)
        if not (self.Lambda0 > 0.0 and np.isfinite(self.Lambda0)):
            raise ValueError(f"Lambda0 must be positive, got {self.Lambda0}")
        if self.grad_tol < 0.0:
            raise ValueError(f"grad_tol must be nonnegative, got {self.grad_tol}")
        if self.max_outer < 0:
            raise ValueError(f"max_outer must be nonnegative, got {self.max_outer}")
        if self.max_inner < 1:
            raise ValueError(f"max_inner must be at least 1, got {self.max_inner}")
        if self.hessian_mode not in (None, "dense", "matrixfree"):
            raise ValueError(f"unknown hessian_mode {self.hessian_mode!r}")


@dataclass
class IterateState:
    """Solver state at the top of outer iteration k (after any H refresh)."""

    k: int
    x: np.ndarray
    f_grad: np.ndarray
    psi_sub: np.ndarray
    F_sub: np.ndarray
    Lambda: float
    H_lazy: LinOp
    hessian_evals: int = 0
    trials_total: int = 0


@dataclass
class TraceRecord:
    """One accepted outer iteration; field order matches the CSV schema."""

    k: int
    j_k: int
    lambda_k: float
    Lambda_k: float
    f_val: float
    F_val: float
    g_k: float
    r_k: float
    inner_prod: float
    hess_evals: int
    trials: int
    wall_ns: int


class TrialResult(NamedTuple):
    x_plus: np.ndarray
    psi_sub_plus: np.ndarray
    F_sub_plus: np.ndarray
    f_grad_plus: np.ndarray


@dataclass
class SolveResult:
    status: str
    x: np.ndarray
    trace: list[TraceRecord]
    iters: int
    g_final: float
    f_final: float
    F_final: float
    f_grad: np.ndarray
    psi_sub: np.ndarray
    F_sub: np.ndarray
    Lambda_final: float
    hess_evals: int
    trials: int


def lazy_index(k: int, m: int) -> int:
    """Index of the iterate whose Hessian iteration k reuses: k - k % m."""
    if k < 0 or m < 1:
        raise ValueError(f"need k >= 0 and m >= 1, got k={k}, m={m}")
    return k - k % m


def trial_lambda(Lambda_k: float, g_k: float, p: float, j: int) -> float:
    """Regularizer for inner trial j: 4^j * Lambda_k * g_k^p."""
    return (4.0**j) * Lambda_k * g_k**p


def acceptance_test(F_sub_plus: np.ndarray, x_k: np.ndarray, x_plus: np.ndarray,
                    lam: float, F_k_val: float, F_plus_val: float,
                    metric: MetricB) -> bool:
    """Both progress inequalities at the trial point."""
    step = x_k - x_plus
    g_plus = metric.dual_norm(F_sub_plus)
    if float(F_sub_plus @ step) < g_plus * g_plus / (2.0 * lam):
        return False
    r = metric.norm(step)
    return F_k_val - F_plus_val >= 0.25 * lam * r * r


def _prox_model_solve(h: LinOp, metric: MetricB, lam: float, x: np.ndarray,
                      f_grad: np.ndarray, psi) -> np.ndarray:
    """Minimize the regularized model with nonzero psi by proximal gradient.

    Runs until the prox-gradient mapping norm drops below
    min(1e-10, 1e-4 * lam * ||x_+ - x_k||); exhausting the sweep budget
    raises SolverStallError, which the outer loop treats as a failed trial.
    """
    lip = h.opnorm() + lam * metric.opnorm()
    t = 1.0 / (1.05 * lip)
    y = x.copy()
    s = np.zeros_like(x)
    resid = np.inf
    for _ in range(_PROX_MAX_SWEEPS):
        grad_m = f_grad + h.apply(s) + lam * metric.apply(s)
        y_new = psi.prox(y - t * grad_m, t)
        resid = float(np.linalg.norm(y - y_new)) / t
        y = y_new
        s = y - x
        if resid <= min(1e-10, 1e-4 * lam * float(np.linalg.norm(s))):
            return y
    raise SolverStallError(
        f"model prox-gradient stalled at mapping norm {resid:.3e}",
        best_residual=resid,
    )


def trial_step(state: IterateState, lam: float, problem: CompositeProblem) -> TrialResult:
    """Solve the regularized model at state.x and certify the new gradient.

    The psi subgradient at the trial point always comes from the model
    optimality identity

        psi_sub_plus = -f_grad - H (x_+ - x) - lam * B (x_+ - x),

    never from a separate subgradient oracle.  Raises SolverStallError when
    the inner solve misses its residual target.
    """
    metric = problem.metric
    x, f_grad, h = state.x, state.f_grad, state.H_lazy
    if problem.psi.is_zero:
        s = solve_regularized(h, metric, lam, -f_grad)
        x_plus = x + s
    else:
        x_plus = _prox_model_solve(h, metric, lam, x, f_grad, problem.psi)
        s = x_plus - x
    psi_sub_plus = -f_grad - h.apply(s) - lam * metric.apply(s)
    f_grad_plus = np.asarray(problem.smooth.eval_grad(x_plus), dtype=np.float64)
    F_sub_plus = f_grad_plus + psi_sub_plus
    return TrialResult(x_plus, psi_sub_plus, F_sub_plus, f_grad_plus)


def _prepare_hessian(problem: CompositeProblem, x: np.ndarray,
                     config: SolverConfig) -> LinOp:
    h = problem.smooth.eval_hess(x)
    if not isinstance(h, LinOp):
        raise TypeError("eval_hess must return a LinOp")
    if config.hessian_mode == "dense" and not h.is_dense:
        h = LinOp.from_dense(h.to_dense())
    if h.is_dense and config.symmetrize:
        h = LinOp.from_dense(sym_part(h.dense))
    if config.hessian_mode == "matrixfree":
        h = h.as_matvec()
    return h


def solve(problem: CompositeProblem, config: SolverConfig,
          x0: np.ndarray | None = None,
          psi_sub0: np.ndarray | None = None) -> SolveResult:
    """Run the solver from x0 (default: the problem's canonical start).

    psi_sub0 must be a subgradient of psi at x0; the default zero vector is
    correct whenever psi is zero (or x0 happens to have 0 in its
    subdifferential).  One TraceRecord is appended per accepted iteration,
    carrying the pre-step state (F_val, g_k, ...) together with the accepted
    trial's lambda, step length and duality pairing; cumulative counters
    include the accepted trial itself.
    """
    metric = problem.metric
    n = problem.dim
    if x0 is None:
        x0 = problem.x0 if problem.x0 is not None else np.zeros(n)
    x = np.array(x0, dtype=np.float64)
    if x.shape != (n,):
        raise ValueError(f"x0 must have shape ({n},), got {x.shape}")
    psi_sub = np.zeros(n) if psi_sub0 is None else np.array(psi_sub0, dtype=np.float64)
    if psi_sub.shape != (n,):
        raise ValueError(f"psi_sub0 must have shape ({n},), got {psi_sub.shape}")

    f_grad = np.asarray(problem.smooth.eval_grad(x), dtype=np.float64)
    F_sub = f_grad + psi_sub
    f_val = float(problem.smooth.eval_f(x))
    F_val = f_val + problem.psi.eval_psi(x)
    if not (np.isfinite(F_val) and np.all(np.isfinite(F_sub))):
        raise NonFiniteError("objective or gradient non-finite at the starting point")

    Lambda_k = float(config.Lambda0)
    h: LinOp | None = None
    hess_evals = 0
    trials = 0
    trace: list[TraceRecord] = []
    start_ns = time.perf_counter_ns()
    k = 0
    status = MAXITER

    while True:
        g = metric.dual_norm(F_sub)
        if g <= config.grad_tol:
            status = CONVERGED
            break
        if k >= config.max_outer:
            status = MAXITER
            break
        if k % config.m == 0:
            h = _prepare_hessian(problem, x, config)
            hess_evals += 1
        state = IterateState(k=k, x=x, f_grad=f_grad, psi_sub=psi_sub, F_sub=F_sub,
                             Lambda=Lambda_k, H_lazy=h, hessian_evals=hess_evals,
                             trials_total=trials)

        accepted = None
        for j in range(config.max_inner):
            lam = trial_lambda(Lambda_k, g, config.p, j)
            trials += 1
            try:
                trial = trial_step(state, lam, problem)
            except SolverStallError:
                continue
            f_plus = float(problem.smooth.eval_f(trial.x_plus))
            F_plus = f_plus + problem.psi.eval_psi(trial.x_plus)
            if not (np.isfinite(F_plus) and np.all(np.isfinite(trial.F_sub_plus))):
                raise NonFiniteError(
                    f"non-finite trial value at outer iteration {k}, trial {j}",
                    k=k, j=j)
            if acceptance_test(trial.F_sub_plus, x, trial.x_plus, lam, F_val, F_plus,
                               metric):
                accepted = (j, lam, trial, f_plus, F_plus)
                break
        if accepted is None:
            status = STALLED
            break

        j, lam, trial, f_plus, F_plus = accepted
        step = x - trial.x_plus
        trace.append(TraceRecord(
            k=k, j_k=j, lambda_k=lam, Lambda_k=Lambda_k,
            f_val=f_val, F_val=F_val, g_k=g, r_k=norm_b(step, metric),
            inner_prod=float(trial.F_sub_plus @ step),
            hess_evals=hess_evals, trials=trials,
            wall_ns=time.perf_counter_ns() - start_ns))
        Lambda_k = (4.0**j) * Lambda_k / 4.0
        x = trial.x_plus
        psi_sub = trial.psi_sub_plus
        F_sub = trial.F_sub_plus
        f_grad = trial.f_grad_plus
        f_val = f_plus
        F_val = F_plus
        k += 1

    return SolveResult(status=status, x=x, trace=trace, iters=k,
                       g_final=metric.dual_norm(F_sub), f_final=f_val, F_final=F_val,
                       f_grad=f_grad, psi_sub=psi_sub, F_sub=F_sub,
                       Lambda_final=Lambda_k, hess_evals=hess_evals, trials=trials)
