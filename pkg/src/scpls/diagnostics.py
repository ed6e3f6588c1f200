"""Optimality residuals, empirical rate fits and structural self-checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .balls import Linearization, surrogate_value
from .problem import DCProblem
from .subproblem import l1_stationarity

__all__ = [
    "StationarityReport",
    "stationarity_residual",
    "RateFit",
    "fit_linear_rate",
    "surrogate_identity_check",
    "TraceAudit",
    "audit_trace",
]

RATE_FLOOR = 1e-13


@dataclass(frozen=True)
class StationarityReport:
    stationarity: float
    complementarity: float
    primal_feasibility: float
    dual_feasibility: float

    def max(self) -> float:
        return max(
            self.stationarity, self.complementarity, self.primal_feasibility, self.dual_feasibility
        )


def stationarity_residual(problem: DCProblem, x, lam, xi) -> StationarityReport:
    """KKT residuals of ``(x, lam)`` using the supplied ``xi`` from ``dP2(x)``.

    With ``v = grad f(x) - xi + sum_i lam_i grad g_i(x)``, stationarity is the
    inf-norm distance from ``-v`` to ``dP1(x)``; only ``P1`` in
    ``{ell1, zero}`` is supported.
    """
    x = problem.check_vector(x)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    v = np.asarray(problem.f.gradient(x), dtype=float) - np.asarray(xi, dtype=float)
    v = v + lam @ problem.g_gradients(x)
    if problem.p1.kind == "ell1":
        stat = l1_stationarity(x, v)
    elif problem.p1.kind == "zero":
        stat = float(np.max(np.abs(v)))
    else:
        raise ValueError("stationarity is only implemented for P1 in {ell1, zero}")
    g = problem.g_values(x)
    return StationarityReport(
        stationarity=stat,
        complementarity=float(np.max(np.abs(lam * g))),
        primal_feasibility=float(max(np.max(g), 0.0)),
        dual_feasibility=float(max(-np.min(lam), 0.0)),
    )


@dataclass(frozen=True)
class RateFit:
    Q: Optional[float]
    r2: float
    window: Tuple[int, int]


def fit_linear_rate(errors: Sequence[float], floor: float = RATE_FLOOR, min_points: int = 5) -> RateFit:
    """Fit ``log e_t = log a + t log Q`` over the tail of an error sequence.

    Points at or below ``floor`` (and non-finite ones) are dropped; the fit
    uses the last ``max(10, 20%)`` of the remaining points.  A constant
    sequence gives ``Q = 1`` and ``r2 = 1``.

    >>> fit = fit_linear_rate([1, 0.5, 0.25, 0.125, 0.0625])
    >>> round(fit.Q, 12), fit.r2
    (0.5, 1.0)
    """
    e = np.asarray(errors, dtype=float)
    idx = np.flatnonzero(np.isfinite(e) & (e > floor))
    if idx.size < min_points:
        return RateFit(None, 0.0, (0, 0))
    k = min(idx.size, max(10, math.ceil(0.2 * idx.size)))
    idx = idx[-k:]
    t = idx.astype(float)
    le = np.log(e[idx])
    tc = t - t.mean()
    slope = float(tc @ (le - le.mean()) / (tc @ tc))
    resid = le - (le.mean() + slope * tc)
    ss_tot = float(np.sum((le - le.mean()) ** 2))
    ss_res = float(resid @ resid)
    if ss_tot <= 1e-30 * max(1.0, float(le @ le)):
        r2 = 1.0
    else:
        r2 = max(0.0, 1.0 - ss_res / ss_tot)
    return RateFit(math.exp(slope), r2, (int(idx[0]), int(idx[-1])))


def surrogate_identity_check(
    problem: DCProblem,
    samples: int = 1000,
    seed: int = 0,
    center=None,
    spread: float = 1.0,
) -> float:
    """Largest ``|G(x, x, w) - g(x)| / (1 + |g(x)|)`` over random ``(x, w)``.

    ``x`` is drawn as ``center + spread * N(0, I)`` and ``w`` log-uniformly in
    ``[1e-8, 1e8]``.  The moving-ball model must reproduce ``g`` at its own
    base point regardless of ``w``.
    """
    rng = np.random.default_rng(seed)
    n = problem.dimension
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    worst = 0.0
    for _ in range(samples):
        x = center + spread * rng.standard_normal(n)
        w = 10.0 ** rng.uniform(-8, 8)
        for con in problem.constraints:
            gx = float(con.value(x))
            lin = Linearization(x, gx, np.asarray(con.gradient(x), dtype=float), w, math.inf)
            worst = max(worst, abs(surrogate_value(lin, x) - gx) / (1.0 + abs(gx)))
    return worst


@dataclass(frozen=True)
class TraceAudit:
    decrease_violations: int
    feasibility_violations: int
    moduli_violations: int
    max_complementarity: float
    max_multiplier: float
    max_inner_count: int

    @property
    def clean(self) -> bool:
        return self.decrease_violations == self.feasibility_violations == self.moduli_violations == 0


def audit_trace(
    result,
    c: float = 0.0,
    feasibility_slack: float = 1e-12,
    L_lo: Optional[float] = None,
    L_upper: Optional[float] = None,
) -> TraceAudit:
    """Count violations of the per-iteration guarantees recorded in a solver trace.

    ``c`` is the sufficient-decrease constant to test against (0 checks plain
    monotonicity).  Moduli are checked against ``[L_lo, L_upper]`` when given;
    pass ``L_lo=None`` for the fixed-modulus baseline.  Complementarity is
    ``|lam * G(x^{t+1}, x^t, L_g)| / (1 + |lam|)``.
    """
    dec = feas = mod = 0
    comp = mult = 0.0
    inner = 0
    F_prev = result.F_initial
    X = result.iterates
    for k, rec in enumerate(result.trace):
        if X is not None:
            d = X[k + 1] - X[k]
            dd = float(d @ d)
        else:
            dd = rec.step_norm**2
        if not rec.F_value <= F_prev - 0.5 * c * dd:
            dec += 1
        F_prev = rec.F_value
        if np.max(rec.g_values) > feasibility_slack:
            feas += 1
        moduli = np.concatenate([[rec.Lf], np.atleast_1d(rec.Lg)])
        if not np.all(np.isfinite(moduli)):
            mod += 1
        elif L_lo is not None and (
            np.min(moduli) < L_lo or (L_upper is not None and np.max(moduli) > L_upper)
        ):
            mod += 1
        lam = np.atleast_1d(rec.lam)
        comp = max(comp, float(np.max(np.abs(lam * rec.surrogate_values) / (1.0 + np.abs(lam)))))
        mult = max(mult, float(np.max(np.abs(lam))))
        inner = max(inner, rec.inner_count)
    return TraceAudit(dec, feas, mod, comp, mult, inner)
