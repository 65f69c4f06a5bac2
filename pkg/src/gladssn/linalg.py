"""Metric-aware linear algebra kernels shared by the solver.

Vectors are 1-d float64 arrays, dense operators are square float64 arrays.
Nothing here mutates its inputs.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .rng import mix64

__all__ = [
    "SolverStallError",
    "MetricError",
    "sym_part",
    "MetricB",
    "LinOp",
    "norm_b",
    "dual_norm_b",
    "opnorm_est",
    "solve_regularized",
]

# Non-PD detection for the Cholesky path: a pivot this small relative to the
# mean diagonal is treated as numerically semidefinite.
_PIVOT_REL = 1e-14


class SolverStallError(RuntimeError):
    """An inner solve missed its residual target.

    Carries the best residual reached so callers can report how close the
    solve got before giving up.
    """

    def __init__(self, message: str, best_residual: float):
        super().__init__(message)
        self.best_residual = float(best_residual)


class MetricError(ValueError):
    """The supplied metric matrix is not symmetric positive definite."""


def sym_part(a: np.ndarray) -> np.ndarray:
    """Symmetric part (a + a.T) / 2 of a square matrix."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return 0.5 * (a + a.T)


class MetricB:
    """Inner-product metric: identity by default, or a dense SPD matrix.

    The primal norm is ||v|| = sqrt(v^T B v) and the dual norm of a gradient
    is ||g||_* = sqrt(g^T B^{-1} g); duality pairings stay plain dot
    products.  A dense metric is validated by Cholesky at construction.
    """

    def __init__(self, matrix: np.ndarray | None = None):
        self._opnorm: float | None = None
        if matrix is None:
            self.matrix = None
            self._chol = None
        else:
            m = np.asarray(matrix, dtype=np.float64)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise MetricError(f"metric must be square, got shape {m.shape}")
            if not np.allclose(m, m.T, rtol=1e-12, atol=1e-12):
                raise MetricError("metric must be symmetric")
            m = sym_part(m)
            try:
                chol = np.linalg.cholesky(m)
            except np.linalg.LinAlgError as exc:
                raise MetricError("metric is not positive definite") from exc
            if np.min(np.diag(chol)) ** 2 <= _PIVOT_REL * (np.trace(m) / m.shape[0]):
                raise MetricError("metric is numerically singular")
            self.matrix = m
            self._chol = chol

    @property
    def is_identity(self) -> bool:
        return self.matrix is None

    def apply(self, v: np.ndarray) -> np.ndarray:
        """B v."""
        if self.matrix is None:
            return np.asarray(v, dtype=np.float64)
        return self.matrix @ v

    def solve(self, g: np.ndarray) -> np.ndarray:
        """B^{-1} g."""
        if self.matrix is None:
            return np.asarray(g, dtype=np.float64)
        return scipy.linalg.cho_solve((self._chol, True), g)

    def norm(self, v: np.ndarray) -> float:
        if self.matrix is None:
            return float(np.linalg.norm(v))
        return float(np.sqrt(max(float(v @ (self.matrix @ v)), 0.0)))

    def dual_norm(self, g: np.ndarray) -> float:
        if self.matrix is None:
            return float(np.linalg.norm(g))
        return float(np.sqrt(max(float(g @ self.solve(g)), 0.0)))

    def dense(self, n: int) -> np.ndarray:
        if self.matrix is None:
            return np.eye(n)
        if self.matrix.shape[0] != n:
            raise ValueError(f"metric is {self.matrix.shape[0]}-dimensional, asked for {n}")
        return self.matrix

    def opnorm(self) -> float:
        """Largest eigenvalue of B (1 for the identity); cached."""
        if self.matrix is None:
            return 1.0
        if self._opnorm is None:
            self._opnorm = float(np.linalg.eigvalsh(self.matrix)[-1])
        return self._opnorm


def norm_b(v: np.ndarray, metric: MetricB) -> float:
    """Primal norm sqrt(v^T B v)."""
    return metric.norm(v)


def dual_norm_b(g: np.ndarray, metric: MetricB) -> float:
    """Dual norm sqrt(g^T B^{-1} g)."""
    return metric.dual_norm(g)


class LinOp:
    """Symmetric linear operator: either a dense array or a matvec callback."""

    def __init__(self, dense: np.ndarray | None = None, matvec=None, dim: int | None = None):
        self._opnorm: float | None = None
        if (dense is None) == (matvec is None):
            raise ValueError("pass exactly one of dense= or matvec=")
        if dense is not None:
            dense = np.asarray(dense, dtype=np.float64)
            if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
                raise ValueError(f"expected a square matrix, got shape {dense.shape}")
            self.dense = dense
            self.matvec = None
            self.dim = dense.shape[0]
        else:
            if dim is None:
                raise ValueError("matvec operators need an explicit dim=")
            self.dense = None
            self.matvec = matvec
            self.dim = int(dim)

    @classmethod
    def from_dense(cls, a: np.ndarray) -> "LinOp":
        return cls(dense=a)

    @classmethod
    def from_matvec(cls, fn, dim: int) -> "LinOp":
        return cls(matvec=fn, dim=dim)

    @property
    def is_dense(self) -> bool:
        return self.dense is not None

    def apply(self, v: np.ndarray) -> np.ndarray:
        if self.dense is not None:
            return self.dense @ v
        return np.asarray(self.matvec(v), dtype=np.float64)

    def to_dense(self) -> np.ndarray:
        """Materialize the operator (applies the matvec to basis vectors)."""
        if self.dense is not None:
            return self.dense
        n = self.dim
        out = np.empty((n, n))
        e = np.zeros(n)
        for i in range(n):
            e[i] = 1.0
            out[:, i] = self.apply(e)
            e[i] = 0.0
        return out

    def as_matvec(self) -> "LinOp":
        """View of this operator that hides any dense representation."""
        if self.dense is None:
            return self
        a = self.dense
        return LinOp(matvec=lambda v: a @ v, dim=self.dim)

    def opnorm(self) -> float:
        """Power-iteration estimate of the operator norm; cached per handle."""
        if self._opnorm is None:
            self._opnorm = opnorm_est(self.apply, self.dim)
        return self._opnorm


def opnorm_est(matvec, n: int, iters: int = 50) -> float:
    """Power-iteration estimate of the operator norm of a symmetric matvec.

    Deterministic: the start vector is derived from a fixed integer hash, so
    repeated calls agree bitwise.  The estimate is a lower bound on the true
    norm; callers that need an upper bound should add their own headroom.
    """
    z = mix64(np.arange(1, n + 1, dtype=np.uint64))
    v = (z >> np.uint64(11)).astype(np.float64) * 2.0**-53 - 0.5
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return 0.0
    v /= nv
    est = 0.0
    for _ in range(iters):
        w = np.asarray(matvec(v), dtype=np.float64)
        nw = np.linalg.norm(w)
        if nw == 0.0 or not np.isfinite(nw):
            return float(nw) if np.isfinite(nw) else float("inf")
        est = max(est, nw)
        v = w / nw
    return float(est)


def _residual_target(rhs: np.ndarray) -> float:
    return max(1e-10, 1e-12 * float(np.linalg.norm(rhs)))


def _cholesky_solve(m: np.ndarray, rhs: np.ndarray, target: float) -> np.ndarray | None:
    """Solve m s = rhs by Cholesky with iterative refinement.

    Returns None when the matrix is (numerically) not positive definite or
    refinement cannot reach the residual target, so the caller can fall back
    to an iterative method.
    """
    n = m.shape[0]
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return None
    if np.min(np.diag(chol)) ** 2 <= _PIVOT_REL * (np.trace(m) / n):
        return None
    s = scipy.linalg.cho_solve((chol, True), rhs)
    for _ in range(3):
        r = rhs - m @ s
        if float(np.linalg.norm(r)) <= target:
            return s
        s = s + scipy.linalg.cho_solve((chol, True), r)
    if float(np.linalg.norm(rhs - m @ s)) <= target:
        return s
    return None


def solve_regularized(h: LinOp, metric: MetricB, lam: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (H + lam * B) s = rhs to a tight residual target.

    Dense operators go through Cholesky (with a scale-relative pivot test
    and iterative refinement); indefinite or matrix-free systems are handled
    by MINRES capped at 10 n iterations.  The accepted residual is
    max(1e-10, 1e-12 * ||rhs||); a solve that cannot reach it raises
    SolverStallError.
    """
    if not (lam > 0.0 and np.isfinite(lam)):
        raise ValueError(f"regularizer must be positive and finite, got {lam}")
    rhs = np.asarray(rhs, dtype=np.float64)
    n = rhs.shape[0]
    if h.dim != n:
        raise ValueError(f"operator dim {h.dim} does not match rhs dim {n}")
    target = _residual_target(rhs)
    if float(np.linalg.norm(rhs)) == 0.0:
        return np.zeros(n)

    if h.is_dense:
        m = h.dense + lam * metric.dense(n)
        s = _cholesky_solve(m, rhs, target)
        if s is not None:
            return s

    if metric.is_identity:
        def matvec(v):
            return h.apply(v) + lam * v
    else:
        bmat = metric.matrix

        def matvec(v):
            return h.apply(v) + lam * (bmat @ v)

    op = scipy.sparse.linalg.LinearOperator((n, n), matvec=matvec, dtype=np.float64)
    rhs_norm = float(np.linalg.norm(rhs))
    rtol = max(0.1 * target / rhs_norm, 1e-16)
    s = np.zeros(n)
    best = rhs_norm
    for _ in range(3):
        r = rhs - matvec(s)
        res = float(np.linalg.norm(r))
        if res <= target:
            return s
        d, _info = scipy.sparse.linalg.minres(op, r, rtol=rtol, maxiter=10 * n)
        s = s + d
        best = min(best, float(np.linalg.norm(rhs - matvec(s))))
    res = float(np.linalg.norm(rhs - matvec(s)))
    if res <= target:
        return s
    raise SolverStallError(
        f"regularized solve stalled at residual {min(res, best):.3e} (target {target:.3e})",
        best_residual=min(res, best),
    )
