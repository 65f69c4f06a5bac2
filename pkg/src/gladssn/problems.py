"""Built-in benchmark problems.

Every make_* draws a frozen instance record from a seeded stream (see rng
for the bit-exact recipe; the draw order per kind is documented on its
generator) and wraps it as a CompositeProblem.  Instances round-trip
through a plain-text container via save_instance / load_instance, and
problem_from_instance rebuilds the oracles, so runs replay across machines.

Hessians come back dense up to DENSE_DIM_MAX variables and as matvec
handles above that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import LinOp
from .oracle import CompositeProblem, SmoothOracle, ZeroPart
from .rng import Rng

__all__ = [
    "DENSE_DIM_MAX",
    "NmfInstance",
    "SvmInstance",
    "HuberInstance",
    "QuadInstance",
    "make_nmf",
    "make_svm",
    "make_huber",
    "make_quadratic",
    "problem_from_instance",
    "penalty_violation",
    "save_instance",
    "load_instance",
]

DENSE_DIM_MAX = 1500


# ---------------------------------------------------------------- instances

@dataclass(frozen=True, eq=False)
class NmfInstance:
    seed: int
    d: int
    n: int
    r: int
    alpha: float
    beta: float
    sigma: float
    Y: np.ndarray
    x0: np.ndarray


@dataclass(frozen=True, eq=False)
class SvmInstance:
    seed: int
    gamma: float
    X: np.ndarray
    y: np.ndarray
    x0: np.ndarray


@dataclass(frozen=True, eq=False)
class HuberInstance:
    seed: int
    delta: float
    ridge: float
    A: np.ndarray
    b: np.ndarray
    x0: np.ndarray


@dataclass(frozen=True, eq=False)
class QuadInstance:
    seed: int
    cond: float
    A: np.ndarray
    b: np.ndarray
    x0: np.ndarray


def _hessian_handle(hvp, dim: int) -> LinOp:
    if dim > DENSE_DIM_MAX:
        return LinOp.from_matvec(hvp, dim)
    dense = np.empty((dim, dim))
    e = np.zeros(dim)
    for i in range(dim):
        e[i] = 1.0
        dense[:, i] = hvp(e)
        e[i] = 0.0
    return LinOp.from_dense(dense)


# ----------------------------------------------------------------------- nmf

def make_nmf(seed: int, d: int = 200, n: int = 100, r: int = 12,
             alpha: float = 1e-2, beta: float = 1e-2,
             sigma: float = 0.02) -> CompositeProblem:
    """Penalized matrix factorization: recover Y ~ U V^T with U, V >= 0 soft.

    Draw order from Rng(seed): U_true (d x r, uniform), V_true (n x r,
    uniform), noise Z (d x n, normal), then x0 = 0.5 * normal(d r + n r).
    Y = U_true V_true^T + sigma Z.  Objective over x = (vec U, vec V):

        0.5 ||U V^T - Y||_F^2 + alpha (||U||_F^2 + ||V||_F^2)
        + 1/(2 beta) (||min(U, 0)||_F^2 + ||min(V, 0)||_F^2)
    """
    rng = Rng(seed)
    u_true = rng.uniform((d, r))
    v_true = rng.uniform((n, r))
    noise = rng.normal((d, n))
    x0 = 0.5 * rng.normal(d * r + n * r)
    inst = NmfInstance(seed=int(seed), d=d, n=n, r=r, alpha=float(alpha),
                       beta=float(beta), sigma=float(sigma),
                       Y=u_true @ v_true.T + sigma * noise, x0=x0)
    return problem_from_instance(inst)


def _nmf_problem(inst: NmfInstance) -> CompositeProblem:
    d, n, r = inst.d, inst.n, inst.r
    alpha, beta, y_obs = inst.alpha, inst.beta, inst.Y
    dim = (d + n) * r

    def unpack(x):
        return x[:d * r].reshape(d, r), x[d * r:].reshape(n, r)

    def eval_f(x):
        u, v = unpack(x)
        resid = u @ v.T - y_obs
        neg_u = np.minimum(u, 0.0)
        neg_v = np.minimum(v, 0.0)
        return (0.5 * float(np.sum(resid * resid))
                + alpha * (float(np.sum(u * u)) + float(np.sum(v * v)))
                + 0.5 / beta * (float(np.sum(neg_u * neg_u)) + float(np.sum(neg_v * neg_v))))

    def eval_grad(x):
        u, v = unpack(x)
        resid = u @ v.T - y_obs
        gu = resid @ v + 2.0 * alpha * u + np.minimum(u, 0.0) / beta
        gv = resid.T @ u + 2.0 * alpha * v + np.minimum(v, 0.0) / beta
        return np.concatenate([gu.ravel(), gv.ravel()])

    def eval_hess(x):
        u, v = unpack(x)
        resid = u @ v.T - y_obs
        mask_u = (u < 0.0).astype(np.float64)
        mask_v = (v < 0.0).astype(np.float64)

        def hvp(p):
            pu, pv = unpack(p)
            dresid = pu @ v.T + u @ pv.T
            hu = dresid @ v + resid @ pv + 2.0 * alpha * pu + mask_u * pu / beta
            hv = dresid.T @ u + resid.T @ pu + 2.0 * alpha * pv + mask_v * pv / beta
            return np.concatenate([hu.ravel(), hv.ravel()])

        return _hessian_handle(hvp, dim)

    return CompositeProblem(
        smooth=SmoothOracle(dim=dim, eval_f=eval_f, eval_grad=eval_grad,
                            eval_hess=eval_hess),
        psi=ZeroPart(), name="nmf",
        kink_gap=lambda x: float(np.min(np.abs(x))),
        x0=inst.x0.copy(), instance=inst)


def penalty_violation(x: np.ndarray, inst: NmfInstance) -> float:
    """Value of the negative-part penalty 1/(2 beta) (||U_-||^2 + ||V_-||^2) at x."""
    u = x[:inst.d * inst.r]
    v = x[inst.d * inst.r:]
    neg = np.minimum(np.concatenate([u, v]), 0.0)
    return 0.5 / inst.beta * float(np.sum(neg * neg))


# ----------------------------------------------------------------------- svm

def make_svm(seed: int, n: int = 200, ell: int = 10000,
             gamma: float = 1e4) -> CompositeProblem:
    """L2-hinge SVM on two gaussian blobs separated along the first axis.

    Draw order from Rng(seed): features G (ell x n, normal).  Labels are +1
    for the first ceil(ell/2) rows and -1 for the rest; the first feature is
    shifted by 1.5 * label.  Variables x = (omega, b):

        0.5 ||omega||^2 + gamma * sum_i max(0, 1 - y_i (omega^T x_i + b))^2
    """
    rng = Rng(seed)
    feats = rng.normal((ell, n))
    labels = np.ones(ell)
    labels[(ell + 1) // 2:] = -1.0
    feats[:, 0] += 1.5 * labels
    inst = SvmInstance(seed=int(seed), gamma=float(gamma), X=feats, y=labels,
                       x0=np.zeros(n + 1))
    return problem_from_instance(inst)


def _svm_problem(inst: SvmInstance) -> CompositeProblem:
    feats, labels, gamma = inst.X, inst.y, inst.gamma
    ell, n = feats.shape
    dim = n + 1
    # z_i = y_i * (x_i, 1); the Hessian is I_n (+) 0 plus 2 gamma Z_act^T Z_act.
    z_all = np.hstack([labels[:, None] * feats, labels[:, None]])

    def margins_resid(x):
        return 1.0 - labels * (feats @ x[:n] + x[n])

    def eval_f(x):
        relu = np.maximum(margins_resid(x), 0.0)
        return 0.5 * float(x[:n] @ x[:n]) + gamma * float(relu @ relu)

    def eval_grad(x):
        relu = np.maximum(margins_resid(x), 0.0)
        g = np.empty(dim)
        g[:n] = x[:n] - 2.0 * gamma * (feats.T @ (labels * relu))
        g[n] = -2.0 * gamma * float(labels @ relu)
        return g

    def eval_hess(x):
        active = margins_resid(x) > 0.0
        z_act = z_all[active]
        dense = 2.0 * gamma * (z_act.T @ z_act)
        dense[np.arange(n), np.arange(n)] += 1.0
        if dim > DENSE_DIM_MAX:
            return LinOp.from_matvec(lambda v: dense @ v, dim)
        return LinOp.from_dense(dense)

    ztz_top = float(np.linalg.eigvalsh(z_all.T @ z_all)[-1])
    return CompositeProblem(
        smooth=SmoothOracle(dim=dim, eval_f=eval_f, eval_grad=eval_grad,
                            eval_hess=eval_hess,
                            lipschitz_L=2.0 * (1.0 + 2.0 * gamma * ztz_top)),
        psi=ZeroPart(), name="svm",
        kink_gap=lambda x: float(np.min(np.abs(margins_resid(x)))),
        x0=inst.x0.copy(), instance=inst)


# --------------------------------------------------------------------- huber

def make_huber(seed: int, m: int = 500, n: int = 50, delta: float = 1.0,
               ridge: float = 1e-2) -> CompositeProblem:
    """Huber regression with a ridge term (strongly convex, modulus = ridge).

    Draw order from Rng(seed): A (m x n, normal), b (m, normal).  Objective:

        sum_i huber_delta(a_i^T x - b_i) + ridge/2 ||x||^2

    with huber_delta(t) = t^2/2 for |t| <= delta, else delta (|t| - delta/2).
    """
    rng = Rng(seed)
    a_mat = rng.normal((m, n))
    b_vec = rng.normal(m)
    inst = HuberInstance(seed=int(seed), delta=float(delta), ridge=float(ridge),
                         A=a_mat, b=b_vec, x0=np.zeros(n))
    return problem_from_instance(inst)


def _huber_problem(inst: HuberInstance) -> CompositeProblem:
    a_mat, b_vec, delta, ridge = inst.A, inst.b, inst.delta, inst.ridge
    m, n = a_mat.shape

    def eval_f(x):
        r = a_mat @ x - b_vec
        absr = np.abs(r)
        quad = absr <= delta
        vals = np.where(quad, 0.5 * r * r, delta * (absr - 0.5 * delta))
        return float(np.sum(vals)) + 0.5 * ridge * float(x @ x)

    def eval_grad(x):
        r = a_mat @ x - b_vec
        return a_mat.T @ np.clip(r, -delta, delta) + ridge * x

    def eval_hess(x):
        quad = np.abs(a_mat @ x - b_vec) <= delta
        a_act = a_mat[quad]
        dense = a_act.T @ a_act
        dense[np.arange(n), np.arange(n)] += ridge
        if n > DENSE_DIM_MAX:
            return LinOp.from_matvec(lambda v: dense @ v, n)
        return LinOp.from_dense(dense)

    lip = 2.0 * (float(np.linalg.eigvalsh(a_mat.T @ a_mat)[-1]) + ridge)
    return CompositeProblem(
        smooth=SmoothOracle(dim=n, eval_f=eval_f, eval_grad=eval_grad,
                            eval_hess=eval_hess, lipschitz_L=lip),
        psi=ZeroPart(), name="huber",
        kink_gap=lambda x: float(np.min(np.abs(np.abs(a_mat @ x - b_vec) - delta))),
        x0=inst.x0.copy(), instance=inst)


# ---------------------------------------------------------------------- quad

def make_quadratic(seed: int, n: int = 50, cond: float = 1e4) -> CompositeProblem:
    """Convex quadratic 0.5 x^T A x - b^T x with prescribed condition number.

    Draw order from Rng(seed): G (n x n, normal) whose sign-fixed QR gives
    the eigenbasis, then n - 2 log-uniform interior eigenvalues (endpoints
    pinned to 1 and cond), then b (normal), then x0 (normal).
    """
    if n < 2:
        raise ValueError("need n >= 2 to pin both ends of the spectrum")
    rng = Rng(seed)
    gauss = rng.normal((n, n))
    q, rr = np.linalg.qr(gauss)
    q = q * np.sign(np.diag(rr))[None, :]
    eigs = np.empty(n)
    eigs[0] = 1.0
    eigs[n - 1] = float(cond)
    eigs[1:n - 1] = np.exp(rng.uniform(n - 2) * np.log(cond))
    a_mat = (q * eigs) @ q.T
    a_mat = 0.5 * (a_mat + a_mat.T)
    b_vec = rng.normal(n)
    x0 = rng.normal(n)
    inst = QuadInstance(seed=int(seed), cond=float(cond), A=a_mat, b=b_vec, x0=x0)
    return problem_from_instance(inst)


def _quad_problem(inst: QuadInstance) -> CompositeProblem:
    a_mat, b_vec = inst.A, inst.b
    n = a_mat.shape[0]
    xstar = np.linalg.solve(a_mat, b_vec)

    def eval_f(x):
        return 0.5 * float(x @ (a_mat @ x)) - float(b_vec @ x)

    return CompositeProblem(
        smooth=SmoothOracle(
            dim=n, eval_f=eval_f,
            eval_grad=lambda x: a_mat @ x - b_vec,
            eval_hess=lambda x: LinOp.from_dense(a_mat),
            lipschitz_L=2.0 * float(np.linalg.eigvalsh(a_mat)[-1])),
        psi=ZeroPart(), name="quad",
        known_fstar=-0.5 * float(b_vec @ xstar), known_xstar=xstar,
        kink_gap=lambda x: np.inf,
        x0=inst.x0.copy(), instance=inst)


_BUILDERS = {
    NmfInstance: _nmf_problem,
    SvmInstance: _svm_problem,
    HuberInstance: _huber_problem,
    QuadInstance: _quad_problem,
}


def problem_from_instance(inst) -> CompositeProblem:
    """Rebuild the CompositeProblem for a (possibly imported) instance."""
    try:
        return _BUILDERS[type(inst)](inst)
    except KeyError:
        raise TypeError(f"not a known instance type: {type(inst).__name__}") from None


# ------------------------------------------------------- export / import

_KINDS = {"nmf": NmfInstance, "svm": SvmInstance, "huber": HuberInstance,
          "quad": QuadInstance}
_KIND_NAMES = {v: k for k, v in _KINDS.items()}


def save_instance(path, inst) -> None:
    """Write an instance to a plain-text container (%.17g keeps floats exact).

    Layout: a `gladssn-instance 1` header, a `kind` line, one `int`/`float`
    line per scalar field, `array <name> <shape...>` blocks with six values
    per line, and a closing `end`.
    """
    kind = _KIND_NAMES.get(type(inst))
    if kind is None:
        raise TypeError(f"not a known instance type: {type(inst).__name__}")
    lines = ["gladssn-instance 1", f"kind {kind}"]
    for name, value in vars(inst).items():
        if isinstance(value, np.ndarray):
            shape = " ".join(str(s) for s in value.shape)
            lines.append(f"array {name} {shape}")
            flat = value.ravel()
            for i in range(0, flat.size, 6):
                lines.append(" ".join("%.17g" % v for v in flat[i:i + 6]))
        elif isinstance(value, int):
            lines.append(f"int {name} {value}")
        else:
            lines.append("float %s %.17g" % (name, value))
    lines.append("end")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_instance(path):
    """Read an instance container written by save_instance."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].split() != ["gladssn-instance", "1"]:
        raise ValueError(f"{path} is not a gladssn instance container")
    head = lines[1].split() if len(lines) > 1 else []
    if len(head) != 2 or head[0] != "kind" or head[1] not in _KINDS:
        raise ValueError(f"unknown instance kind in {path}")
    cls = _KINDS[head[1]]
    fields = {}
    i = 2
    while i < len(lines):
        parts = lines[i].split()
        i += 1
        if not parts:
            continue
        tag = parts[0]
        if tag == "end":
            return cls(**fields)
        if tag == "int":
            fields[parts[1]] = int(parts[2])
        elif tag == "float":
            fields[parts[1]] = float(parts[2])
        elif tag == "array":
            name = parts[1]
            shape = tuple(int(s) for s in parts[2:])
            size = int(np.prod(shape))
            vals: list[float] = []
            while len(vals) < size and i < len(lines):
                vals.extend(float(v) for v in lines[i].split())
                i += 1
            if len(vals) != size:
                raise ValueError(f"array {name} in {path} has wrong length")
            fields[name] = np.array(vals, dtype=np.float64).reshape(shape)
        else:
            raise ValueError(f"unknown tag {tag!r} in {path}")
    raise ValueError(f"missing end marker in {path}")
