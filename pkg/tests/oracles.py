"""Independent reference solvers used by the test-suite.

Nothing here calls into the package's subproblem code; the oracles only
share the problem definitions.
"""

from __future__ import annotations

import numpy as np


def projected_subgradient_batch(Y, S, R, alpha, Xi, iters=1_000_000, eval_every=16):
    """Best objective of diminishing-step projected subgradient on a batch.

    Solves ``min ||x||_1 + (alpha/2)||x - y||^2 - <xi, x>`` over
    ``||x - s||^2 <= r`` row by row (``alpha = 0`` gives the linear problem).
    Rows may be zero-padded: padded coordinates stay at zero.  Every visited
    point is feasible, so the returned values are upper bounds on the optima.
    """
    # Work on (n, B) arrays so the per-row reductions are contiguous.
    Y, S, Xi = (np.ascontiguousarray(np.asarray(a, dtype=float).T) for a in (Y, S, Xi))
    alpha = np.asarray(alpha, dtype=float)[None, :]
    rad = np.sqrt(np.asarray(R, dtype=float))

    def obj(X):
        D = X - Y
        return np.abs(X).sum(0) + 0.5 * alpha[0] * (D * D).sum(0) - (Xi * X).sum(0)

    def project(X, D):
        np.subtract(X, S, out=D)
        nrm = np.sqrt(np.einsum("ij,ij->j", D, D))
        D *= np.minimum(1.0, rad / np.maximum(nrm, 1e-300))
        np.add(S, D, out=X)

    X = Y.copy()
    g, D = np.empty_like(X), np.empty_like(X)
    project(X, D)
    best = obj(X)
    # Step scale ~ diameter / subgradient bound, per row.
    G = np.sqrt(Y.shape[0]) + alpha[0] * (np.abs(S).max(0) + rad + np.abs(Y).max(0)) + np.abs(Xi).max(0)
    c0 = (2.0 * rad / G)[None, :]
    for k in range(iters):
        np.sign(X, out=g)
        np.subtract(X, Y, out=D)
        D *= alpha
        g += D
        g -= Xi
        g *= c0 / np.sqrt(k + 1.0)
        X -= g
        project(X, D)
        if k % eval_every == 0 or k == iters - 1:
            np.minimum(best, obj(X), out=best)
    return best


def enumerate_1d(y, s, r, alpha, xi):
    """Exact minimum of the scalar problem by enumerating candidate points.

    The objective is piecewise quadratic/linear with a kink at 0, so the
    minimizer over the interval ``[s - sqrt(r), s + sqrt(r)]`` is an
    endpoint, the kink, or a stationary point of one of the two pieces.
    """
    lo, hi = s - np.sqrt(r), s + np.sqrt(r)
    cands = [lo, hi, 0.0]
    if alpha > 0:
        cands += [y + (xi - 1.0) / alpha, y + (xi + 1.0) / alpha]
    cands = [min(max(c, lo), hi) for c in cands]
    vals = [abs(c) + 0.5 * alpha * (c - y) ** 2 - xi * c for c in cands]
    return min(vals)
