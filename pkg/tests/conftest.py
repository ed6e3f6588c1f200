import itertools
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from scpls import SolverConfig, generate_instance, run_scp, run_scp_ls  # noqa: E402

DESK_SEEDS = (1, 2, 3)
DESK_MODELS = ("sq_l2", "lorentzian")
DESK_MUS = (0.0, 1.0)
DESK_CONFIGS = list(itertools.product(DESK_MODELS, DESK_MUS, DESK_SEEDS))

_instances = {}
_runs = {}
RUN_SECONDS = {}


def desk_instance(loss, mu, seed):
    key = (loss, mu, seed)
    if key not in _instances:
        _instances[key] = generate_instance(mu=mu, loss=loss, seed=seed, q=72, n=256, s0=8)
    return _instances[key]


def desk_run(loss, mu, seed, algo="scp_ls"):
    """Solver result on a desk preset instance, computed once per session."""
    key = (loss, mu, seed, algo)
    if key not in _runs:
        inst = desk_instance(loss, mu, seed)
        solve = run_scp_ls if algo == "scp_ls" else run_scp
        t0 = time.perf_counter()
        _runs[key] = solve(inst.problem(), inst.start_point(), SolverConfig())
        RUN_SECONDS[key] = time.perf_counter() - t0
    return _runs[key]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def central_fd(fun, x, h):
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


ACCEPTANCE_LINES = []


def report(criterion, passed, detail):
    """Record one acceptance verdict; printed in the terminal summary."""
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
