"""Compressed-sensing test problems: ``min ||x||_1 - mu ||x||  s.t.  loss(A x) <= delta``.

Four data-fidelity losses are available.  ``sq_l2`` and ``lorentzian`` act on
the residual ``A x - b`` (Gaussian and Cauchy noise respectively);
``logistic`` and ``poisson`` act on ``z = A x`` directly, with ``b`` entering
as labels or counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.special import expit

from . import mb01
from .errors import InvalidArgument, InvalidInstance
from .problem import ConstraintFunction, ConvexRegularizer, DCProblem, SmoothTerm

__all__ = [
    "LOSSES",
    "DESK_PRESET",
    "CsInstance",
    "generate_instance",
    "lorentzian_norm",
    "sq_l2_constraint",
    "lorentzian_constraint",
    "logistic_constraint",
    "poisson_constraint",
    "power_iteration_lmax",
    "min_norm_init",
    "build_problem",
    "save_instance",
    "load_instance",
]

LOSSES = ("sq_l2", "lorentzian", "logistic", "poisson")
DESK_PRESET = {"q": 72, "n": 256, "s0": 8}


def power_iteration_lmax(A, tol: float = 1e-10, max_iter: int = 1000) -> float:
    """Largest eigenvalue of ``A^T A`` by power iteration from a fixed start vector."""
    A = np.asarray(A, dtype=float)
    v = np.ones(A.shape[1]) / math.sqrt(A.shape[1])
    lam = 0.0
    for _ in range(max_iter):
        Av = A @ v
        lam_new = float(Av @ Av)
        w = A.T @ Av
        nw = np.linalg.norm(w)
        if nw == 0:
            return lam_new
        v = w / nw
        if abs(lam_new - lam) <= tol * lam_new:
            return lam_new
        lam = lam_new
    return lam


def _pivoted_qr(A):
    """Rank-revealing QR of ``A^T``; raises unless ``A`` has full row rank."""
    A = np.asarray(A, dtype=float)
    q, n = A.shape
    if q > n:
        raise InvalidInstance(f"A is {q}x{n}; full row rank needs q <= n")
    Q, R, piv = scipy.linalg.qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[-1] <= max(q, n) * np.finfo(float).eps * diag[0]:
        raise InvalidInstance("A does not have full row rank")
    return Q, R, piv


def _min_norm_from_qr(qr, b):
    Q, R, piv = qr
    z = scipy.linalg.solve_triangular(R, np.asarray(b, dtype=float)[piv], trans="T")
    return Q @ z


def min_norm_init(A, b) -> np.ndarray:
    """Minimum-norm solution of ``A x = b`` (``A^+ b``) via pivoted QR of ``A^T``."""
    return _min_norm_from_qr(_pivoted_qr(A), b)


def lorentzian_norm(y, gamma: float) -> float:
    y = np.asarray(y, dtype=float)
    return float(np.sum(np.log1p((y / gamma) ** 2)))


def sq_l2_constraint(A, b, delta: float, lmax: Optional[float] = None) -> ConstraintFunction:
    """``0.5 ||A x - b||^2 - delta`` with modulus ``lambda_max(A^T A)``."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.shape[0] != b.shape[0]:
        raise InvalidArgument("A and b disagree in the number of rows")

    def value(x):
        r = A @ x - b
        return 0.5 * float(r @ r) - delta

    def gradient(x):
        return A.T @ (A @ x - b)

    L = power_iteration_lmax(A) if lmax is None else lmax
    return ConstraintFunction(value, gradient, L, name="sq_l2")


def lorentzian_constraint(A, b, delta: float, gamma: float, lmax: Optional[float] = None) -> ConstraintFunction:
    """``sum log(1 + (A x - b)_i^2 / gamma^2) - delta`` with modulus ``(2/gamma^2) lambda_max(A^T A)``."""
    if not gamma > 0:
        raise InvalidArgument("gamma must be positive")
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    g2 = gamma * gamma

    def value(x):
        return lorentzian_norm(A @ x - b, gamma) - delta

    def gradient(x):
        r = A @ x - b
        return A.T @ (2.0 * r / (g2 + r * r))

    L = (power_iteration_lmax(A) if lmax is None else lmax) * 2.0 / g2
    return ConstraintFunction(value, gradient, L, name="lorentzian")


def logistic_constraint(A, b, delta: float, lmax: Optional[float] = None) -> ConstraintFunction:
    """``sum log(1 + exp(b_i z_i)) - delta`` with ``z = A x``."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)

    def value(x):
        return float(np.sum(np.logaddexp(0.0, b * (A @ x)))) - delta

    def gradient(x):
        return A.T @ (b * expit(b * (A @ x)))

    L = 0.25 * float(np.max(b * b)) * (power_iteration_lmax(A) if lmax is None else lmax)
    return ConstraintFunction(value, gradient, L, name="logistic")


def poisson_constraint(A, b, delta: float) -> ConstraintFunction:
    """``sum(-b_i z_i + exp(z_i)) - delta`` with ``z = A x``; gradient not globally Lipschitz."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)

    def value(x):
        z = A @ x
        return float(np.sum(np.exp(z) - b * z)) - delta

    def gradient(x):
        return A.T @ (np.exp(A @ x) - b)

    return ConstraintFunction(value, gradient, None, name="poisson")


@dataclass(frozen=True, eq=False)
class CsInstance:
    A: np.ndarray
    b: np.ndarray
    x_orig: np.ndarray
    delta: float
    gamma: float
    mu: float
    loss: str
    seed: int
    s0: int
    support: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise InvalidArgument(f"unknown loss {self.loss!r}")
        if not 0 <= self.mu <= 1:
            raise InvalidArgument("mu must lie in [0, 1]")
        if not self.delta > 0:
            raise InvalidArgument("delta must be positive")

    @property
    def q(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @cached_property
    def lambda_max(self) -> float:
        return power_iteration_lmax(self.A)

    @cached_property
    def _qr(self):
        return _pivoted_qr(self.A)

    def min_norm(self, b) -> np.ndarray:
        return _min_norm_from_qr(self._qr, b)

    @cached_property
    def constraint(self) -> ConstraintFunction:
        if self.loss == "sq_l2":
            return sq_l2_constraint(self.A, self.b, self.delta, self.lambda_max)
        if self.loss == "lorentzian":
            return lorentzian_constraint(self.A, self.b, self.delta, self.gamma, self.lambda_max)
        if self.loss == "logistic":
            return logistic_constraint(self.A, self.b, self.delta, self.lambda_max)
        return poisson_constraint(self.A, self.b, self.delta)

    def loss_at(self, z) -> float:
        """Loss value (without ``-delta``) at measurement-space point ``z = A x``."""
        z = np.asarray(z, dtype=float)
        if self.loss == "sq_l2":
            r = z - self.b
            return 0.5 * float(r @ r)
        if self.loss == "lorentzian":
            return lorentzian_norm(z - self.b, self.gamma)
        if self.loss == "logistic":
            return float(np.sum(np.logaddexp(0.0, self.b * z)))
        return float(np.sum(np.exp(z) - self.b * z))

    def target_measurement(self) -> np.ndarray:
        """A point ``z`` with ``loss(z) < delta``; the feasible start is ``A^+ z``."""
        if self.loss in ("sq_l2", "lorentzian"):
            return self.b.copy()
        if self.loss == "logistic":
            # q log(1 + exp(-K)) < delta for b_i = +-1 once K > -log(expm1(delta / q)).
            bsq_min = float(np.min(self.b * self.b))
            K = max(1.0, -math.log(math.expm1(self.delta / self.q)) + 1.0) / bsq_min
            return -K * self.b
        return np.log(np.maximum(self.b, 1e-300)).clip(min=-50.0)

    def start_point(self) -> np.ndarray:
        return self.min_norm(self.target_measurement())

    def problem(self) -> DCProblem:
        return build_problem(self)

    def validate(self) -> None:
        """Structural checks: full row rank, no zero columns, origin infeasible, Slater point."""
        self._qr
        if np.any(np.linalg.norm(self.A, axis=0) == 0):
            raise InvalidInstance("A has a zero column")
        g0 = self.loss_at(np.zeros(self.q)) - self.delta
        if not g0 > 0:
            raise InvalidInstance(f"origin is feasible (g(0) = {g0!r}); need delta < loss(0 * A - b)")
        g_start = self.loss_at(self.target_measurement()) - self.delta
        if not g_start < 0:
            raise InvalidInstance(f"no strictly feasible point found (g = {g_start!r})")


def build_problem(inst: CsInstance) -> DCProblem:
    return DCProblem(
        f=SmoothTerm.zero(inst.n),
        p1=ConvexRegularizer.ell1(),
        p2=ConvexRegularizer.euclidean(inst.mu),
        constraints=[inst.constraint],
        dimension=inst.n,
        metadata={"loss": inst.loss, "mu": inst.mu, "seed": inst.seed},
    )


def generate_instance(
    i_scale: Optional[int] = None,
    mu: float = 0.0,
    loss: str = "sq_l2",
    seed: int = 0,
    *,
    q: Optional[int] = None,
    n: Optional[int] = None,
    s0: Optional[int] = None,
    delta: Optional[float] = None,
    delta_scale: float = 1.1,
    gamma: float = 0.02,
    noise_level: float = 0.01,
) -> CsInstance:
    """Random sparse-recovery instance.

    Sizes are ``q = 720 i``, ``n = 2560 i`` unless ``q`` and ``n`` are given
    explicitly; ``s0`` defaults to ``floor(q / 9)``.  ``A`` has i.i.d.
    standard normal entries with columns scaled to unit norm, and ``x_orig``
    has standard normal entries on a uniformly drawn support.

    ``delta`` is derived from the noise for ``sq_l2`` (``0.5 sigma^2`` with
    ``sigma = delta_scale * ||noise||``) and ``lorentzian``
    (``delta_scale * ||noise||_LL``); it is required for ``logistic`` and
    ``poisson``.  All randomness comes from ``numpy.random.default_rng(seed)``
    (PCG64), drawn in a fixed order.
    """
    if loss not in LOSSES:
        raise InvalidArgument(f"unknown loss {loss!r}")
    if q is None and n is None:
        if i_scale is None:
            q, n = DESK_PRESET["q"], DESK_PRESET["n"]
            s0 = DESK_PRESET["s0"] if s0 is None else s0
        else:
            if int(i_scale) < 1:
                raise InvalidArgument("i_scale must be >= 1")
            q, n = 720 * int(i_scale), 2560 * int(i_scale)
    elif q is None or n is None:
        raise InvalidArgument("q and n must be given together")
    s0 = q // 9 if s0 is None else int(s0)
    if not 1 <= s0 <= q <= n:
        raise InvalidArgument(f"need 1 <= s0 <= q <= n, got s0={s0}, q={q}, n={n}")
    if loss in ("logistic", "poisson") and delta is None:
        raise InvalidArgument(f"delta is required for the {loss} loss")

    rng = np.random.default_rng(seed)
    A = rng.standard_normal((q, n))
    col = np.linalg.norm(A, axis=0)
    if np.any(col == 0):
        raise InvalidInstance("A has a zero column")
    A /= col
    support = np.sort(rng.choice(n, size=s0, replace=False))
    x_orig = np.zeros(n)
    x_orig[support] = rng.standard_normal(s0)
    z = A @ x_orig

    if loss == "sq_l2":
        noise = noise_level * rng.standard_normal(q)
        b = z + noise
        sigma = delta_scale * float(np.linalg.norm(noise))
        auto_delta = 0.5 * sigma * sigma
    elif loss == "lorentzian":
        noise = noise_level * np.tan(np.pi * (rng.random(q) - 0.5))
        b = z + noise
        auto_delta = delta_scale * lorentzian_norm(noise, gamma)
    elif loss == "logistic":
        labels = np.sign(z + noise_level * rng.standard_normal(q))
        labels[labels == 0] = 1.0
        b = -labels
        auto_delta = None
    else:
        b = rng.poisson(np.exp(z)).astype(float)
        auto_delta = None

    inst = CsInstance(
        A=A,
        b=b,
        x_orig=x_orig,
        delta=float(auto_delta if delta is None else delta),
        gamma=float(gamma),
        mu=float(mu),
        loss=loss,
        seed=int(seed),
        s0=s0,
        support=support,
    )
    inst.validate()
    return inst


def save_instance(inst: CsInstance, directory) -> Path:
    """Write ``A``, ``b``, ``x_orig`` as MB01 files plus ``instance.meta`` (key=value)."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    mb01.write_array(d / "A.mb01", inst.A)
    mb01.write_array(d / "b.mb01", inst.b)
    mb01.write_array(d / "x_orig.mb01", inst.x_orig)
    meta = {
        "q": inst.q,
        "n": inst.n,
        "s0": inst.s0,
        "delta": repr(inst.delta),
        "gamma": repr(inst.gamma),
        "mu": repr(inst.mu),
        "loss": inst.loss,
        "seed": inst.seed,
    }
    (d / "instance.meta").write_text("".join(f"{k}={v}\n" for k, v in meta.items()))
    return d


def read_key_values(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}: malformed line {line!r}")
        out[key.strip()] = value.strip()
    return out


def load_instance(directory) -> CsInstance:
    d = Path(directory)
    meta = read_key_values(d / "instance.meta")
    x_orig = mb01.read_vector(d / "x_orig.mb01")
    return CsInstance(
        A=mb01.read_array(d / "A.mb01"),
        b=mb01.read_vector(d / "b.mb01"),
        x_orig=x_orig,
        delta=float(meta["delta"]),
        gamma=float(meta["gamma"]),
        mu=float(meta["mu"]),
        loss=meta["loss"],
        seed=int(meta["seed"]),
        s0=int(meta["s0"]),
        support=np.flatnonzero(x_orig),
    )
