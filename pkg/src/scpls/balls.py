"""Quadratic upper models of smooth constraints and their ball form.

Around a base point ``y`` a constraint ``g`` with curvature bound ``w`` is
replaced by::

    G(x; y, w) = g(y) + <grad g(y), x - y> + (w / 2) ||x - y||^2 <= 0

which is the ball ``||x - s||^2 <= R`` with ``s = y - grad g(y) / w`` and
``R = ||grad g(y) / w||^2 - 2 g(y) / w``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstraintQualificationError, InvalidArgument
from .problem import ConstraintFunction

__all__ = ["Linearization", "BallConstraint", "linearize", "surrogate_value", "to_ball"]


@dataclass(frozen=True)
class Linearization:
    base_point: np.ndarray
    g_value: float
    g_grad: np.ndarray
    modulus: float
    # Tolerance on g_value > 0; the line-search solver keeps this at zero.
    feasibility_slack: float = 0.0

    def __post_init__(self):
        if not self.modulus > 0:
            raise InvalidArgument("modulus must be positive")
        if not self.g_value <= self.feasibility_slack:
            raise InvalidArgument(
                f"cannot linearize at an infeasible point (g = {self.g_value!r})"
            )
        if np.shape(self.base_point) != np.shape(self.g_grad):
            raise InvalidArgument("base_point and g_grad must have the same shape")


@dataclass(frozen=True)
class BallConstraint:
    center: np.ndarray
    radius_sq: float
    source_index: int = 0

    def contains(self, x, slack: float = 0.0) -> bool:
        d = np.asarray(x) - self.center
        return bool(d @ d - self.radius_sq <= slack)


def linearize(
    constraint: ConstraintFunction, y: np.ndarray, modulus: float, feasibility_slack: float = 0.0
) -> Linearization:
    return Linearization(
        base_point=y,
        g_value=float(constraint.value(y)),
        g_grad=np.asarray(constraint.gradient(y), dtype=float),
        modulus=float(modulus),
        feasibility_slack=feasibility_slack,
    )


def surrogate_value(lin: Linearization, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != np.shape(lin.base_point):
        raise InvalidArgument("dimension mismatch between x and the base point")
    d = x - lin.base_point
    return float(lin.g_value + lin.g_grad @ d + 0.5 * lin.modulus * (d @ d))


def to_ball(lin: Linearization, source_index: int = 0) -> BallConstraint:
    scaled = lin.g_grad / lin.modulus
    radius_sq = float(scaled @ scaled - 2.0 * lin.g_value / lin.modulus)
    if not radius_sq > 0:
        raise ConstraintQualificationError(
            f"constraint {source_index}: g = 0 with vanishing gradient gives an empty ball"
        )
    return BallConstraint(lin.base_point - scaled, radius_sq, source_index)
