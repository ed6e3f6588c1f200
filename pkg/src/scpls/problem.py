"""DC objective with smooth inequality constraints.

The model is::

    minimize  f(x) + P1(x) - P2(x)   subject to  g_i(x) <= 0,  i = 1..m

with ``f`` and every ``g_i`` smooth (Lipschitz gradients), ``P1`` and ``P2``
convex.  The constraint indicator is never folded into the objective value;
:func:`eval_F` reports it as a boolean flag next to the raw ``g`` values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import InvalidArgument, UnsupportedConfiguration

__all__ = [
    "SmoothTerm",
    "ConvexRegularizer",
    "ConstraintFunction",
    "DCProblem",
    "FEval",
    "eval_F",
    "subgradient_p2",
    "REGULARIZER_KINDS",
]

REGULARIZER_KINDS = ("ell1", "scaled_euclidean_norm", "zero")


@dataclass(frozen=True)
class SmoothTerm:
    """Smooth function with gradient and optional gradient Lipschitz modulus."""

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    lipschitz_grad: Optional[float] = None

    def __post_init__(self):
        if self.lipschitz_grad is not None and not self.lipschitz_grad >= 0:
            raise InvalidArgument("lipschitz_grad must be nonnegative")

    @classmethod
    def zero(cls, n: int) -> "SmoothTerm":
        return cls(value=lambda x: 0.0, gradient=lambda x: np.zeros(n), lipschitz_grad=0.0)

    @property
    def is_zero(self) -> bool:
        return self.lipschitz_grad == 0.0


@dataclass(frozen=True)
class ConvexRegularizer:
    """One of the three convex regularizers the solver knows how to handle.

    ``ell1`` is ``||x||_1`` (scale fixed at 1), ``scaled_euclidean_norm`` is
    ``scale * ||x||_2`` and ``zero`` is identically zero.
    """

    kind: str
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in REGULARIZER_KINDS:
            raise InvalidArgument(f"unknown regularizer kind {self.kind!r}")
        if self.kind == "ell1" and self.scale != 1.0:
            raise InvalidArgument("ell1 regularizer has scale fixed at 1")
        if not self.scale >= 0:
            raise InvalidArgument("regularizer scale must be nonnegative")

    @classmethod
    def ell1(cls) -> "ConvexRegularizer":
        return cls("ell1", 1.0)

    @classmethod
    def euclidean(cls, mu: float) -> "ConvexRegularizer":
        """``mu * ||x||``; collapses to the zero regularizer when ``mu == 0``."""
        if mu == 0:
            return cls.zero()
        return cls("scaled_euclidean_norm", float(mu))

    @classmethod
    def zero(cls) -> "ConvexRegularizer":
        return cls("zero", 0.0)

    def value(self, x: np.ndarray) -> float:
        if self.kind == "ell1":
            return float(np.sum(np.abs(x)))
        if self.kind == "scaled_euclidean_norm":
            return self.scale * float(np.linalg.norm(x))
        return 0.0

    __call__ = value


@dataclass(frozen=True)
class ConstraintFunction:
    """Smooth constraint ``g_i``; ``lipschitz_grad`` may be unknown (``None``)."""

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    lipschitz_grad: Optional[float] = None
    name: str = "g"

    def __post_init__(self):
        if self.lipschitz_grad is not None and not self.lipschitz_grad >= 0:
            raise InvalidArgument("lipschitz_grad must be nonnegative")


@dataclass(frozen=True)
class DCProblem:
    f: SmoothTerm
    p1: ConvexRegularizer
    p2: ConvexRegularizer
    constraints: Sequence[ConstraintFunction]
    dimension: int
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if len(self.constraints) < 1:
            raise InvalidArgument("at least one constraint is required")
        if int(self.dimension) < 1:
            raise InvalidArgument("dimension must be positive")

    @property
    def m(self) -> int:
        return len(self.constraints)

    def check_vector(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise InvalidArgument(
                f"expected a vector of length {self.dimension}, got shape {x.shape}"
            )
        return x

    def objective(self, x: np.ndarray) -> float:
        """``f(x) + P1(x) - P2(x)`` without the constraint indicator."""
        return float(self.f.value(x)) + self.p1.value(x) - self.p2.value(x)

    def g_values(self, x: np.ndarray) -> np.ndarray:
        return np.array([float(c.value(x)) for c in self.constraints])

    def g_gradients(self, x: np.ndarray) -> np.ndarray:
        """Rows are ``grad g_i(x)``; shape ``(m, n)``."""
        return np.array([np.asarray(c.gradient(x), dtype=float) for c in self.constraints])


class FEval(NamedTuple):
    objective: float
    feasible: bool
    g_values: np.ndarray


def eval_F(problem: DCProblem, x, feasibility_tol: float = 0.0) -> FEval:
    """Evaluate the objective and report constraint feasibility separately.

    Examples
    --------
    >>> import numpy as np
    >>> con = ConstraintFunction(lambda x: -1.0, lambda x: np.zeros(2), 0.0)
    >>> prob = DCProblem(SmoothTerm.zero(2), ConvexRegularizer.ell1(),
    ...                  ConvexRegularizer.euclidean(1.0), [con], 2)
    >>> eval_F(prob, [3.0, 4.0]).objective
    2.0
    """
    x = problem.check_vector(x)
    g = problem.g_values(x)
    return FEval(problem.objective(x), bool(np.max(g) <= feasibility_tol), g)


def subgradient_p2(p2: ConvexRegularizer, x) -> np.ndarray:
    """Deterministic element of ``dP2(x)``; the zero vector at the kink."""
    x = np.asarray(x, dtype=float)
    if p2.kind == "zero":
        return np.zeros_like(x)
    if p2.kind == "scaled_euclidean_norm":
        nrm = np.linalg.norm(x)
        if nrm == 0:
            return np.zeros_like(x)
        return p2.scale * x / nrm
    raise UnsupportedConfiguration("P2 must be zero or a scaled Euclidean norm")
