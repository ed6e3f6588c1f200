"""How well does the constrained l1 (or l1 - ||.||) model recover a sparse signal?

The noise budget delta is set 10% above the actual noise energy, so the
feasible set contains the true signal and the solver returns something
sparser and slightly shrunk.  Entries of x_orig well above the noise level are
found; entries comparable to it (roughly 0.01 * sqrt(q) here) may be dropped.
"""

import numpy as np

from scpls import generate_instance, run_scp_ls

for mu in (0.0, 1.0):
    for seed in (1, 2, 3):
        inst = generate_instance(mu=mu, loss="sq_l2", seed=seed, q=72, n=256, s0=8)
        res = run_scp_ls(inst.problem(), inst.start_point())
        x = res.x_final
        err = np.linalg.norm(x - inst.x_orig) / np.linalg.norm(inst.x_orig)
        truth = np.flatnonzero(inst.x_orig)
        top = np.sort(np.argsort(-np.abs(x))[: inst.s0])
        missed = np.setdiff1d(truth, top)
        print(f"mu={mu:g} seed={seed}: relative error {err:.4f}, nonzeros {np.count_nonzero(x)}, "
              f"noise norm {np.linalg.norm(inst.b - inst.A @ inst.x_orig):.3f}")
        if missed.size:
            print(f"    not among the {inst.s0} largest: x_orig = {np.round(inst.x_orig[missed], 4)}, "
                  f"x_out = {np.round(x[missed], 4)}")
