"""Sequential convex programming with monotone line search, plus the plain SCP baseline.

Each outer iteration linearizes ``f`` and ``P2`` at ``x^t``, replaces every
constraint by its moving-ball upper model and solves the resulting convex
subproblem exactly.  ``run_scp_ls`` backtracks on the objective and
constraint curvature estimates until the trial point is feasible and
satisfies the sufficient decrease test::

    F(x~) <= F(x^t) - (c/2) ||x~ - x^t||^2

``run_scp`` freezes the constraint curvature at its global Lipschitz modulus
and drops the proximal term, accepting every step.

Only ``P1 = ||.||_1`` with a single constraint is solved; the multi-ball
subproblem would need an iterative inner solver.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .balls import Linearization, surrogate_value, to_ball
from .diagnostics import RateFit, fit_linear_rate
from .errors import InvalidArgument, NumericalFailure, UnsupportedConfiguration
from .problem import DCProblem, subgradient_p2
from .subproblem import (
    LinBallSubproblem,
    QuadBallSubproblem,
    l1_stationarity,
    solve_lin_ball,
    solve_quad_ball,
)

__all__ = [
    "SolverConfig",
    "IterateRecord",
    "SolveResult",
    "InnerStep",
    "run_scp_ls",
    "run_scp",
    "inner_line_search",
    "bb_init_Lg",
    "check_termination",
    "inner_loop_bound",
]


@dataclass(frozen=True)
class SolverConfig:
    """Parameters shared by both algorithms.

    The defaults reproduce the published experimental setting: ``tau = 2``,
    ``c = 1e-4``, moduli safeguarded to ``[1e-8, 1e8]``, ``L_f`` restarted at 1
    and ``L_g`` initialized by a Barzilai-Borwein quotient.
    """

    c: float = 1e-4
    tau: float = 2.0
    L_lo: float = 1e-8
    L_hi: float = 1e8
    Lf_init_policy: str = "constant_one"
    Lf_init: float = 1.0
    Lg_init_policy: str = "bb"
    Lg_init: float = 1.0
    bb_threshold: float = 1e-12
    term_tol: float = 1e-8
    max_outer: int = 200_000
    max_inner: int = 200
    subproblem_tol: float = 1e-12
    subproblem_method: str = "bisection"
    feasibility_slack: float = 1e-12
    record_stationarity: bool = True
    keep_iterates: bool = True

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidArgument("c must be positive")
        if not self.tau > 1:
            raise InvalidArgument("tau must exceed 1")
        if not 0 < self.L_lo < self.L_hi:
            raise InvalidArgument("need 0 < L_lo < L_hi")
        if self.Lf_init_policy not in ("constant_one", "custom"):
            raise InvalidArgument(f"unknown Lf_init_policy {self.Lf_init_policy!r}")
        if self.Lg_init_policy not in ("bb", "constant"):
            raise InvalidArgument(f"unknown Lg_init_policy {self.Lg_init_policy!r}")
        for name in ("Lf_start", "Lg_init"):
            v = getattr(self, name)
            if not self.L_lo <= v <= self.L_hi:
                raise InvalidArgument(f"{name} = {v!r} outside [L_lo, L_hi]")
        if self.max_outer < 1 or self.max_inner < 1:
            raise InvalidArgument("iteration caps must be positive")

    @property
    def Lf_start(self) -> float:
        return 1.0 if self.Lf_init_policy == "constant_one" else float(self.Lf_init)

    def clamp(self, v: float) -> float:
        return max(self.L_lo, min(v, self.L_hi))


@dataclass
class IterateRecord:
    t: int
    step_norm: float
    F_value: float
    g_values: np.ndarray
    Lf: float
    Lg: np.ndarray
    lam: np.ndarray
    inner_count: int
    stationarity: float
    surrogate_values: np.ndarray
    elapsed_s: float


@dataclass
class SolveResult:
    x_final: np.ndarray
    status: str
    trace: List[IterateRecord]
    fitted_rate: Optional[RateFit] = None
    algorithm: str = "scp_ls"
    F_initial: float = float("nan")
    iterates: Optional[List[np.ndarray]] = field(default=None, repr=False)
    message: str = ""

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def errors(self) -> np.ndarray:
        """``||x^t - x_final||`` for every stored iterate (needs ``keep_iterates``)."""
        if self.iterates is None:
            raise ValueError("iterates were not kept for this run")
        X = np.asarray(self.iterates)
        return np.linalg.norm(X - self.x_final, axis=1)

    @property
    def F_values(self) -> np.ndarray:
        return np.array([self.F_initial] + [r.F_value for r in self.trace])


@dataclass
class InnerStep:
    x_next: np.ndarray
    Lf: float
    Lg: np.ndarray
    lam: np.ndarray
    inner_count: int
    F_next: float
    g_next: np.ndarray
    surrogate_values: np.ndarray


def check_termination(x_prev, x_next, tol: float) -> bool:
    """``||x_next - x_prev|| < tol * max(1, ||x_next||)``."""
    return bool(np.linalg.norm(x_next - x_prev) < tol * max(1.0, np.linalg.norm(x_next)))


def bb_init_Lg(dx, dg, prev_Lg: float, config: SolverConfig) -> float:
    """Barzilai-Borwein curvature guess for one constraint, safeguarded.

    Falls back to ``prev_Lg / tau`` when the curvature pair is not positive
    enough (this includes ``dx = 0``).
    """
    dx = np.asarray(dx, dtype=float)
    inner = float(dx @ np.asarray(dg, dtype=float))
    if inner >= config.bb_threshold:
        return config.clamp(inner / float(dx @ dx))
    return config.clamp(prev_Lg / config.tau)


def inner_loop_bound(config: SolverConfig, Lf_true: float, Lg_true) -> int:
    """``k1`` with ``L_lo * tau^k1 >= max((c + L_f)/2, L_g1, ..)``; the inner loop needs at most ``2 k1``."""
    top = max([(config.c + Lf_true) / 2.0] + [float(v) for v in np.atleast_1d(Lg_true)])
    return max(1, math.ceil(math.log(top / config.L_lo) / math.log(config.tau)))


def _check_supported(problem: DCProblem):
    if problem.p1.kind != "ell1":
        raise UnsupportedConfiguration("only P1 = ||.||_1 has an exact subproblem solver")
    if problem.m != 1:
        raise UnsupportedConfiguration(
            f"exact subproblem solves need a single constraint, got m = {problem.m}"
        )


def _start(problem: DCProblem, x0):
    _check_supported(problem)
    x = problem.check_vector(x0).copy()
    g = problem.g_values(x)
    if np.max(g) > 0:
        raise InvalidArgument(f"starting point is infeasible: max g(x0) = {np.max(g)!r}")
    return x, g


def inner_line_search(
    problem: DCProblem,
    x_t,
    xi_t,
    Lf0: float,
    Lg0,
    config: SolverConfig,
    *,
    F_t: Optional[float] = None,
    g_t=None,
    grad_g_t=None,
) -> InnerStep:
    """Backtrack on ``(L_f, L_g)`` until the trial point is accepted.

    Feasibility is tested first and enlarges ``L_g``; sufficient decrease is
    tested second and enlarges ``L_f``.  Both comparisons are exact (no slack).
    """
    x_t = np.asarray(x_t, dtype=float)
    if F_t is None:
        F_t = problem.objective(x_t)
    if g_t is None:
        g_t = problem.g_values(x_t)
    if grad_g_t is None:
        grad_g_t = problem.g_gradients(x_t)
    direction = np.asarray(problem.f.gradient(x_t), dtype=float) - xi_t
    Lf = float(Lf0)
    Lg = np.array(Lg0, dtype=float).reshape(problem.m)

    count = 0
    while True:
        count += 1
        if count > config.max_inner:
            raise NumericalFailure(
                f"inner line search exceeded {config.max_inner} trials",
                {"Lf": Lf, "Lg": Lg.copy(), "x_t": x_t},
            )
        lin = Linearization(x_t, float(g_t[0]), grad_g_t[0], float(Lg[0]))
        ball = to_ball(lin)
        sp = QuadBallSubproblem(x_t - direction / Lf, ball.center, ball.radius_sq, Lf)
        sol = solve_quad_ball(sp, config.subproblem_tol, method=config.subproblem_method)
        x_try = sol.x_star
        g_try = problem.g_values(x_try)
        if np.any(g_try > 0):
            Lg = config.tau * Lg
            continue
        F_try = problem.objective(x_try)
        d = x_try - x_t
        if F_try <= F_t - 0.5 * config.c * float(d @ d):
            # The ball multiplier scales ||x - s||^2 - r = (2 / w) * surrogate.
            lam = np.array([2.0 * sol.lambda_star / Lg[0]])
            return InnerStep(
                x_try, Lf, Lg, lam, count, F_try, g_try, np.array([surrogate_value(lin, x_try)])
            )
        Lf = config.tau * Lf


def _stationarity(problem, x, lam, xi, grad_g):
    v = np.asarray(problem.f.gradient(x), dtype=float) - xi + lam @ grad_g
    return l1_stationarity(x, v)


def _finish(result: SolveResult, config: SolverConfig) -> SolveResult:
    if config.keep_iterates and result.iterates:
        result.fitted_rate = fit_linear_rate(result.errors())
    return result


def run_scp_ls(problem: DCProblem, x0, config: Optional[SolverConfig] = None) -> SolveResult:
    """Run SCP with monotone line search from a feasible ``x0``.

    Returns a :class:`SolveResult` whose ``status`` is ``"converged"``,
    ``"max_outer"`` or ``"numerical_failure"``.  The latter keeps the last
    accepted iterate and carries the failure text in ``message``.
    """
    config = config or SolverConfig()
    x, g = _start(problem, x0)
    grad_g = problem.g_gradients(x)
    F = problem.objective(x)
    result = SolveResult(x, "max_outer", [], algorithm="scp_ls", F_initial=F)
    if config.keep_iterates:
        result.iterates = [x.copy()]
    clock0 = time.perf_counter()

    x_prev = grad_g_prev = Lg_prev = None
    for t in range(config.max_outer):
        xi = subgradient_p2(problem.p2, x)
        if t == 0 or config.Lg_init_policy == "constant":
            Lg0 = np.full(problem.m, config.Lg_init)
        else:
            Lg0 = np.array(
                [
                    bb_init_Lg(x - x_prev, grad_g[i] - grad_g_prev[i], Lg_prev[i], config)
                    for i in range(problem.m)
                ]
            )
        try:
            step = inner_line_search(
                problem, x, xi, config.Lf_start, Lg0, config, F_t=F, g_t=g, grad_g_t=grad_g
            )
        except NumericalFailure as exc:
            result.status, result.message = "numerical_failure", str(exc)
            break
        x_new = step.x_next
        grad_g_new = problem.g_gradients(x_new)
        stat = (
            _stationarity(problem, x_new, step.lam, xi, grad_g_new)
            if config.record_stationarity
            else float("nan")
        )
        result.trace.append(
            IterateRecord(
                t=t,
                step_norm=float(np.linalg.norm(x_new - x)),
                F_value=step.F_next,
                g_values=step.g_next,
                Lf=step.Lf,
                Lg=step.Lg,
                lam=step.lam,
                inner_count=step.inner_count,
                stationarity=stat,
                surrogate_values=step.surrogate_values,
                elapsed_s=time.perf_counter() - clock0,
            )
        )
        if config.keep_iterates:
            result.iterates.append(x_new.copy())
        done = check_termination(x, x_new, config.term_tol)
        x_prev, grad_g_prev, Lg_prev = x, grad_g, step.Lg
        x, g, grad_g, F = x_new, step.g_next, grad_g_new, step.F_next
        result.x_final = x
        if done:
            result.status = "converged"
            break
    return _finish(result, config)


def run_scp(problem: DCProblem, x0, config: Optional[SolverConfig] = None) -> SolveResult:
    """Fixed-modulus SCP: constraint curvature frozen at its Lipschitz modulus, no line search.

    The subproblem is ``min ||x||_1 - <xi - grad f(x^t), x>`` over the ball, so
    there is no proximal term.  Iterates are accepted unconditionally; a
    constraint value above ``config.feasibility_slack`` ends the run with
    ``"numerical_failure"``.
    """
    config = config or SolverConfig()
    x, g = _start(problem, x0)
    moduli = [c.lipschitz_grad for c in problem.constraints]
    if any(w is None or not w > 0 for w in moduli):
        raise UnsupportedConfiguration("SCP needs a positive Lipschitz modulus for every constraint")
    w = float(moduli[0])
    grad_g = problem.g_gradients(x)
    F = problem.objective(x)
    result = SolveResult(x, "max_outer", [], algorithm="scp", F_initial=F)
    if config.keep_iterates:
        result.iterates = [x.copy()]
    clock0 = time.perf_counter()

    for t in range(config.max_outer):
        xi = subgradient_p2(problem.p2, x)
        lin_xi = xi - np.asarray(problem.f.gradient(x), dtype=float)
        try:
            lin = Linearization(x, float(g[0]), grad_g[0], w, config.feasibility_slack)
            ball = to_ball(lin)
            sol = solve_lin_ball(
                LinBallSubproblem(lin_xi, ball.center, ball.radius_sq), config.subproblem_tol
            )
        except (NumericalFailure, InvalidArgument) as exc:
            result.status, result.message = "numerical_failure", str(exc)
            break
        x_new = sol.x_star
        g_new = problem.g_values(x_new)
        grad_g_new = problem.g_gradients(x_new)
        F_new = problem.objective(x_new)
        lam = np.array([2.0 * sol.lambda_star / w])
        stat = (
            _stationarity(problem, x_new, lam, xi, grad_g_new)
            if config.record_stationarity
            else float("nan")
        )
        result.trace.append(
            IterateRecord(
                t=t,
                step_norm=float(np.linalg.norm(x_new - x)),
                F_value=F_new,
                g_values=g_new,
                Lf=0.0,
                Lg=np.array([w]),
                lam=lam,
                inner_count=1,
                stationarity=stat,
                surrogate_values=np.array([surrogate_value(lin, x_new)]),
                elapsed_s=time.perf_counter() - clock0,
            )
        )
        if config.keep_iterates:
            result.iterates.append(x_new.copy())
        done = check_termination(x, x_new, config.term_tol)
        x, g, grad_g, F = x_new, g_new, grad_g_new, F_new
        result.x_final = x
        if np.max(g) > config.feasibility_slack:
            result.status = "numerical_failure"
            result.message = f"iterate {t + 1} violates the constraint by {np.max(g)!r}"
            break
        if done:
            result.status = "converged"
            break
    return _finish(result, config)
