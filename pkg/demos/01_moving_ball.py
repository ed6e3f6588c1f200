"""A two-dimensional walk-through of one moving-ball step.

The constraint g(x) = 1/2 ||x - (2, 0)||^2 - 1/2 is replaced near a feasible
point y by the quadratic upper model

    G(x) = g(y) + <grad g(y), x - y> + (w / 2) ||x - y||^2,

whose zero sublevel set is a ball.  For w at least the curvature of g the
ball sits inside the true feasible region; shrinking w grows the ball until
it spills outside, which is exactly what the line search guards against.
"""

import numpy as np

from scpls import Linearization, solve_quad_ball, surrogate_value, to_ball
from scpls.subproblem import QuadBallSubproblem

center = np.array([2.0, 0.0])


def g(x):
    return 0.5 * float((x - center) @ (x - center)) - 0.5


y = np.array([2.0, 0.5])
print(f"base point y = {y}, g(y) = {g(y):+.4f}")
print()
print("   w     ball center          radius   step result            g(result)   max g on ball")
for w in (4.0, 2.0, 1.0, 0.5, 0.25):
    lin = Linearization(y, g(y), y - center, w)
    ball = to_ball(lin)
    # One proximal l1 step from y with unit curvature, restricted to the ball.
    sol = solve_quad_ball(QuadBallSubproblem(y, ball.center, ball.radius_sq, 1.0))
    x = sol.x_star
    # The ball point farthest from the true center is where g is largest.
    away = ball.center - center
    away = away / np.linalg.norm(away) if np.any(away) else np.array([0.0, 1.0])
    worst = g(ball.center + np.sqrt(ball.radius_sq) * away)
    print(
        f"{w:5.2f}   ({ball.center[0]:+.3f}, {ball.center[1]:+.3f})   "
        f"{np.sqrt(ball.radius_sq):7.4f}   ({x[0]:+.4f}, {x[1]:+.4f})   {g(x):+.2e}   {worst:+.3f}"
    )
    assert surrogate_value(lin, x) <= 1e-12
print()
print("For w >= 1 (the true curvature) the whole ball is feasible.  Below that the")
print("ball reaches points with g > 0; this particular step happens to land on the")
print("boundary anyway, but in general SCP_ls detects g > 0 and doubles w.")
