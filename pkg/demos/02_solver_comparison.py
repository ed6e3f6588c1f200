"""SCP_ls against fixed-modulus SCP on the desk-scale sparse recovery problems.

Both methods start from the minimum-norm solution of Ax = b and stop when the
relative step falls below 1e-8.  SCP keeps the constraint curvature at its
global Lipschitz modulus, which for the Lorentzian loss is (2 / gamma^2)
times lambda_max(A^T A), a very pessimistic number.  SCP_ls instead guesses
the curvature with a Barzilai-Borwein quotient and backtracks only when
needed, and its objective step also gets a proximal term.
"""

import time

from scpls import SolverConfig, generate_instance, run_scp, run_scp_ls

print(f"{'model':11s} {'mu':>3s} {'seed':>4s} | {'SCP_ls it':>9s} {'time':>6s} {'Q':>6s} | {'SCP it':>7s} {'time':>6s} {'Q':>6s} | F gap")
for loss in ("sq_l2", "lorentzian"):
    for mu in (0.0, 1.0):
        for seed in (1, 2, 3):
            inst = generate_instance(mu=mu, loss=loss, seed=seed, q=72, n=256, s0=8)
            rows = []
            for solve in (run_scp_ls, run_scp):
                t0 = time.perf_counter()
                res = solve(inst.problem(), inst.start_point(), SolverConfig())
                rows.append((res, time.perf_counter() - t0))
            (a, ta), (b, tb) = rows
            gap = abs(a.F_values[-1] - b.F_values[-1]) / abs(b.F_values[-1])
            print(
                f"{loss:11s} {mu:3.0f} {seed:4d} | {a.iterations:9d} {ta:6.2f} {a.fitted_rate.Q:6.3f} | "
                f"{b.iterations:7d} {tb:6.2f} {b.fitted_rate.Q:6.3f} | {gap:.1e}"
            )
