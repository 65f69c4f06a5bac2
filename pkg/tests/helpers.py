"""Shared helpers for the test suite."""

import numpy as np

from gladssn.ssn import TraceRecord

REL_SLACK = 1e-9
ABS_SLACK = 1e-12


def slack_ok(lhs, rhs):
    """lhs >= rhs up to the harness slack model (slack = rhs - lhs)."""
    lhs = float(lhs)
    rhs = float(rhs)
    tol = REL_SLACK * max(abs(lhs), abs(rhs)) + ABS_SLACK
    return rhs - lhs <= tol


def final_transition_violations(result):
    """Recheck the accepted-step inequalities on the last transition.

    The stored trace only has rows for iterations 0..K-1, so the transition
    from the last row to the returned iterate has to be checked from the
    in-memory result (g_final, F_final).  Returns a list of failing check
    names, empty when everything holds.
    """
    if not result.trace:
        return []
    last = result.trace[-1]
    lam = last.lambda_k
    r = last.r_k
    g_next = result.g_final
    dec = last.F_val - result.F_final
    bad = []
    if not slack_ok(last.inner_prod, g_next**2 / (2.0 * lam)):
        bad.append("pairing")
    if not slack_ok(dec, 0.25 * lam * r**2):
        bad.append("decrease")
    if not slack_ok(2.0 * lam * r, g_next):
        bad.append("step_grad")
    if not slack_ok(2.0 * last.g_k, g_next):
        bad.append("no_overshoot")
    if not slack_ok(dec, g_next**2 / (16.0 * lam)):
        bad.append("value_gain")
    return bad


def synthetic_trace(gs, lam=1.0):
    """Minimal trace whose g_k column follows the given sequence."""
    rows = []
    F = 10.0
    for i, g in enumerate(gs):
        rows.append(TraceRecord(k=i, j_k=0, lambda_k=lam, Lambda_k=lam,
                                f_val=F, F_val=F, g_k=float(g), r_k=1e-3,
                                inner_prod=1e-3, hess_evals=i + 1, trials=i + 1,
                                wall_ns=1000 * (i + 1)))
        F *= 0.5
    return rows


def kink_free_points(problem, seed, count, scale=0.3, min_gap=1e-5):
    """Sample `count` points around x0 where the nonsmooth seams are far away.

    Uses numpy's RNG (test-only, does not need the package stream) and
    resamples until kink_gap clears min_gap.
    """
    rng = np.random.default_rng(seed)
    pts = []
    tries = 0
    while len(pts) < count:
        tries += 1
        if tries > 200 * count:
            raise RuntimeError("could not find enough kink-free points")
        x = problem.x0 + scale * rng.standard_normal(problem.dim)
        if problem.kink_gap(x) > min_gap:
            pts.append(x)
    return pts
