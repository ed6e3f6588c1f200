"""Exact solvers for l1 problems over a single Euclidean ball.

Two problems are handled::

    (quad)  minimize ||x||_1 + (alpha/2) ||x - y||^2   s.t.  ||x - s||^2 <= r
    (lin)   minimize ||x||_1 - <xi, x>                 s.t.  ||x - s||^2 <= r

Both are solved through their Lagrangian: for a multiplier ``lam >= 0`` the
Lagrangian minimizer is a soft-thresholding of an affine function of ``lam``,
and ``lam -> ||x(lam) - s||^2`` is nonincreasing, so the active multiplier is
the root of a monotone scalar equation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import InvalidArgument, NumericalFailure

__all__ = [
    "soft_threshold",
    "QuadBallSubproblem",
    "LinBallSubproblem",
    "SubproblemSolution",
    "solve_quad_ball",
    "solve_lin_ball",
    "kkt_residuals",
    "quad_multiplier_map",
    "lin_multiplier_map",
    "l1_stationarity",
]

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 200


def soft_threshold(v, kappa: float) -> np.ndarray:
    """Proximal map of ``kappa * ||.||_1``: ``sign(v) * max(|v| - kappa, 0)``."""
    if kappa < 0:
        raise InvalidArgument("threshold must be nonnegative")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - kappa, 0.0)


@dataclass(frozen=True)
class QuadBallSubproblem:
    y: np.ndarray
    s: np.ndarray
    r: float
    alpha: float

    def __post_init__(self):
        if not self.r > 0:
            raise InvalidArgument(f"ball radius must be positive, got r = {self.r!r}")
        if not self.alpha > 0:
            raise InvalidArgument("alpha must be positive")
        if np.shape(self.y) != np.shape(self.s):
            raise InvalidArgument("y and s must have the same shape")

    def objective(self, x) -> float:
        d = np.asarray(x) - self.y
        return float(np.sum(np.abs(x)) + 0.5 * self.alpha * (d @ d))


@dataclass(frozen=True)
class LinBallSubproblem:
    xi: np.ndarray
    s: np.ndarray
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise InvalidArgument(f"ball radius must be positive, got r = {self.r!r}")
        if np.shape(self.xi) != np.shape(self.s):
            raise InvalidArgument("xi and s must have the same shape")

    def objective(self, x) -> float:
        return float(np.sum(np.abs(x)) - self.xi @ np.asarray(x))


@dataclass(frozen=True)
class SubproblemSolution:
    x_star: np.ndarray
    lambda_star: float
    kkt_stationarity: float
    kkt_complementarity: float
    kkt_feasibility: float
    bisection_iters: int


def quad_multiplier_map(sp: QuadBallSubproblem) -> Callable[[float], np.ndarray]:
    """``lam -> argmin_x ||x||_1 + (alpha/2)||x - y||^2 + lam ||x - s||^2``."""
    ay = sp.alpha * np.asarray(sp.y, dtype=float)
    s2 = 2.0 * np.asarray(sp.s, dtype=float)
    alpha = sp.alpha

    # Same point as soft_threshold((alpha y + 2 lam s)/(alpha + 2 lam), 1/(alpha + 2 lam)),
    # written so that small denominators do not cancel catastrophically.
    def x_of(lam):
        return soft_threshold(ay + lam * s2, 1.0) / (alpha + 2.0 * lam)

    return x_of


def lin_multiplier_map(sp: LinBallSubproblem) -> Callable[[float], np.ndarray]:
    """``lam -> argmin_x ||x||_1 - <xi, x> + lam ||x - s||^2`` for ``lam > 0``."""
    xi = np.asarray(sp.xi, dtype=float)
    s2 = 2.0 * np.asarray(sp.s, dtype=float)

    def x_of(lam):
        return soft_threshold(xi + lam * s2, 1.0) / (2.0 * lam)

    return x_of


def _dist_sq(x, s):
    d = x - s
    return float(d @ d)


def _bisect(phi, lam_hi, r, tol, max_iter):
    """Root of the nonincreasing ``phi`` on ``(0, inf)``, returned from the feasible side."""
    target = tol * max(1.0, r)
    lo, hi = 0.0, float(lam_hi)
    phi_hi = phi(hi)
    doublings = 0
    while phi_hi > 0:
        if doublings >= max_iter:
            raise NumericalFailure(
                "could not bracket the multiplier", {"bracket": (lo, hi), "phi_hi": phi_hi}
            )
        lo, hi = hi, 2.0 * hi
        phi_hi = phi(hi)
        doublings += 1

    iters = 0
    # Both tests must hold: any slack left in |phi| enters the outer decrease test as lam * |phi|.
    while phi_hi != 0 and (abs(phi_hi) > target or hi - lo > 1e-15 * (1.0 + hi)):
        if iters >= max_iter:
            raise NumericalFailure(
                "multiplier bisection did not converge",
                {"bracket": (lo, hi), "phi_hi": phi_hi, "iterations": iters},
            )
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        phi_mid = phi(mid)
        if phi_mid > 0:
            lo = mid
        else:
            hi, phi_hi = mid, phi_mid
        iters += 1
    return hi, doublings + iters


def _solve_quad_breakpoints(sp: QuadBallSubproblem):
    """Exact solve in ``t = alpha / (alpha + 2 lam)`` over the sorted kinks of phi.

    On each interval between kinks the active set and the signs are fixed and
    ``phi(t) = a t^2 + b``, so the root is closed-form once bracketed.
    """
    y = np.asarray(sp.y, dtype=float)
    s = np.asarray(sp.s, dtype=float)
    inv_a = 1.0 / sp.alpha
    d = y - s

    def pieces(t):
        u = s + t * d
        active = np.abs(u) > t * inv_a
        sgn = np.sign(u)
        slope = np.where(active, d - sgn * inv_a, 0.0)
        return active, slope

    def phi(t):
        active, slope = pieces(t)
        return t * t * float(slope @ slope) + float(np.sum(s[~active] ** 2)) - sp.r

    with np.errstate(divide="ignore", invalid="ignore"):
        cand = np.concatenate([-s / (d - inv_a), -s / (d + inv_a)])
    cand = np.unique(cand[np.isfinite(cand) & (cand > 0) & (cand < 1)])
    pts = np.concatenate([[0.0], cand, [1.0]])

    lo, hi = 0, len(pts) - 1  # phi(pts[lo]) <= 0 < phi(pts[hi])
    evals = 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        evals += 1
        if phi(pts[mid]) > 0:
            hi = mid
        else:
            lo = mid
    t_lo, t_hi = pts[lo], pts[hi]
    active, slope = pieces(0.5 * (t_lo + t_hi))
    a = float(slope @ slope)
    b = float(np.sum(s[~active] ** 2)) - sp.r
    t = np.sqrt(-b / a) if a > 0 and b < 0 else t_hi
    t = min(max(t, t_lo), t_hi)
    if t <= 0:
        raise NumericalFailure("degenerate breakpoint bracket", {"bracket": (t_lo, t_hi)})
    lam = sp.alpha * (1.0 - t) / (2.0 * t)
    x = soft_threshold(t * y + (1.0 - t) * s, t * inv_a)
    return x, lam, evals


def solve_quad_ball(
    sp: QuadBallSubproblem,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    method: str = "bisection",
) -> SubproblemSolution:
    """Solve the quadratic-proximal l1 problem over a ball.

    Parameters
    ----------
    sp : QuadBallSubproblem
    tol : float
        Bisection stops once ``|phi(lam)| <= tol * max(1, r)`` and the bracket
        is narrower than ``1e-15 * (1 + lam)``, or when the bracket can no
        longer be split in floating point.
    max_iter : int
        Cap on bracket doublings and on bisection steps (each).
    method : {"bisection", "breakpoints"}
        ``"breakpoints"`` sorts the kinks of the root function and solves the
        bracketing quadratic piece exactly.

    Returns
    -------
    SubproblemSolution
        With ``bisection_iters`` counting root-function evaluations.
    """
    if not tol > 0:
        raise InvalidArgument("tol must be positive")
    s = np.asarray(sp.s, dtype=float)
    x_check = soft_threshold(sp.y, 1.0 / sp.alpha)
    if _dist_sq(x_check, s) <= sp.r:
        return _package(x_check, 0.0, sp, 0)

    if method == "breakpoints":
        x, lam, iters = _solve_quad_breakpoints(sp)
        return _package(x, lam, sp, iters)
    if method != "bisection":
        raise InvalidArgument(f"unknown method {method!r}")

    x_of = quad_multiplier_map(sp)
    lam, iters = _bisect(
        lambda lam: _dist_sq(x_of(lam), s) - sp.r, max(sp.alpha, 1.0), sp.r, tol, max_iter
    )
    return _package(x_of(lam), lam, sp, iters)


def solve_lin_ball(
    sp: LinBallSubproblem, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> SubproblemSolution:
    """Solve ``min ||x||_1 - <xi, x>`` over a ball by multiplier bisection."""
    if not tol > 0:
        raise InvalidArgument("tol must be positive")
    s = np.asarray(sp.s, dtype=float)
    xi = np.asarray(sp.xi, dtype=float)
    if (xi.size == 0 or np.max(np.abs(xi)) <= 1.0) and s @ s <= sp.r:
        return _package(np.zeros_like(s), 0.0, sp, 0)

    x_of = lin_multiplier_map(sp)
    lam, iters = _bisect(lambda lam: _dist_sq(x_of(lam), s) - sp.r, 1.0, sp.r, tol, max_iter)
    return _package(x_of(lam), lam, sp, iters)


def _package(x, lam, sp, iters):
    stat, comp, feas = kkt_residuals(x, lam, sp)
    return SubproblemSolution(x, float(lam), stat, comp, feas, int(iters))


def l1_stationarity(x, v):
    """inf-norm distance from ``-v`` to the subdifferential of ``||.||_1`` at ``x``."""
    w = np.where(x != 0, np.abs(v + np.sign(x)), np.maximum(np.abs(v) - 1.0, 0.0))
    return float(np.max(w)) if w.size else 0.0


def kkt_residuals(x, lam: float, sp: Union[QuadBallSubproblem, LinBallSubproblem]):
    """Return ``(stationarity, complementarity, feasibility)`` of ``(x, lam)``."""
    if lam < 0:
        raise InvalidArgument("multiplier must be nonnegative")
    x = np.asarray(x, dtype=float)
    s = np.asarray(sp.s, dtype=float)
    if isinstance(sp, QuadBallSubproblem):
        v = sp.alpha * (x - sp.y) + 2.0 * lam * (x - s)
    else:
        v = -np.asarray(sp.xi, dtype=float) + 2.0 * lam * (x - s)
    gap = _dist_sq(x, s) - sp.r
    return l1_stationarity(x, v), float(abs(lam * gap)), float(max(gap, 0.0))
