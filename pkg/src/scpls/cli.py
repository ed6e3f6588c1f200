"""Command-line experiment runner.

Generates a compressed-sensing instance, runs SCP_ls and/or SCP from the
minimum-norm start, and writes per-iteration traces, error curves, the
solution and the instance to an output directory::

    scpls --model sq_l2 --mu 0 --algo both --q 72 --n 256 --s0 8 --seed 1 --out runs/demo

Exit status is 0 when every run converged, 2 when a run hit the iteration
cap and 1 on any error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np

from . import mb01
from .diagnostics import audit_trace
from .models import LOSSES, CsInstance, generate_instance, read_key_values, save_instance
from .solver import SolveResult, SolverConfig, run_scp, run_scp_ls

log = logging.getLogger("scpls")

__all__ = [
    "ExperimentConfig",
    "RunSummary",
    "run_experiment",
    "compare_solvers",
    "read_csv",
    "main",
]

TRACE_COLUMNS = ("t", "F", "step_norm", "g_value", "lambda", "Lf", "Lg", "inner_count", "stationarity")
ERROR_COLUMNS = ("t", "error")
ALGORITHMS = {"scp_ls": run_scp_ls, "scp": run_scp}


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "sq_l2"
    mu: float = 0.0
    algo: str = "scp_ls"
    i_scale: Optional[int] = None
    q: Optional[int] = None
    n: Optional[int] = None
    s0: Optional[int] = None
    seed: int = 1
    tol: float = 1e-8
    max_iters: int = 200_000
    max_inner: int = 200
    c: float = 1e-4
    tau: float = 2.0
    L_lo: float = 1e-8
    L_hi: float = 1e8
    delta: Optional[float] = None
    delta_scale: float = 1.1
    gamma: float = 0.02
    output_dir: Optional[str] = None

    def __post_init__(self):
        if self.model not in LOSSES:
            raise ValueError(f"unknown model {self.model!r}")
        if self.algo not in ("scp_ls", "scp", "both"):
            raise ValueError(f"unknown algo {self.algo!r}")
        if not 0 <= self.mu <= 1:
            raise ValueError("mu must lie in [0, 1]")
        explicit = (self.q, self.n)
        if any(v is not None for v in explicit):
            if any(v is None for v in explicit):
                raise ValueError("--q and --n must be given together")
            if self.i_scale is not None:
                raise ValueError("give either --i or explicit --q/--n, not both")
            s0 = self.s0 if self.s0 is not None else self.q // 9
            if not 1 <= s0 <= self.q <= self.n:
                raise ValueError("need s0 <= q <= n")

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            c=self.c,
            tau=self.tau,
            L_lo=self.L_lo,
            L_hi=self.L_hi,
            term_tol=self.tol,
            max_outer=self.max_iters,
            max_inner=self.max_inner,
        )

    def make_instance(self) -> CsInstance:
        return generate_instance(
            self.i_scale,
            mu=self.mu,
            loss=self.model,
            seed=self.seed,
            q=self.q,
            n=self.n,
            s0=self.s0,
            delta=self.delta,
            delta_scale=self.delta_scale,
            gamma=self.gamma,
        )


@dataclass(frozen=True)
class RunSummary:
    algorithm: str
    model: str
    mu: float
    seed: int
    q: int
    n: int
    s0: int
    status: str
    iterations: int
    wall_seconds: float
    final_F: float
    recovery_rel_error: float
    fitted_Q: Optional[float]
    fitted_r2: float
    max_multiplier: float
    max_inner_count: int
    message: str = ""

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                v = "none"
            else:
                v = _fmt_field(f.name, v)
            lines.append(f"{f.name}={v}\n")
        return "".join(lines)


def _fmt(v: float) -> str:
    return "%.17g" % v


def _fmt_field(name, v):
    if name == "wall_seconds":
        return "%.3f" % v
    return _fmt(v) if isinstance(v, float) else v


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) if isinstance(v, (int, np.integer)) else _fmt(v) for v in row) + "\n")


def read_csv(path) -> dict:
    """Parse a CSV written by this module into ``{column: ndarray}``."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        return {h: np.array([]) for h in header}
    return {h: data[:, j] for j, h in enumerate(header)}


def _summarize(config, inst, result: SolveResult, wall: float) -> RunSummary:
    audit = audit_trace(result)
    fit = result.fitted_rate
    err = float(np.linalg.norm(result.x_final - inst.x_orig) / np.linalg.norm(inst.x_orig))
    return RunSummary(
        algorithm=result.algorithm,
        model=inst.loss,
        mu=inst.mu,
        seed=inst.seed,
        q=inst.q,
        n=inst.n,
        s0=inst.s0,
        status=result.status,
        iterations=result.iterations,
        wall_seconds=wall,
        final_F=float(result.F_values[-1]),
        recovery_rel_error=err,
        fitted_Q=None if fit is None else fit.Q,
        fitted_r2=0.0 if fit is None else fit.r2,
        max_multiplier=audit.max_multiplier,
        max_inner_count=audit.max_inner_count,
        message=result.message.replace("\n", " "),
    )


def _write_run(directory: Path, result: SolveResult, summary: RunSummary) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    _write_csv(
        directory / "trace.csv",
        TRACE_COLUMNS,
        (
            (r.t, r.F_value, r.step_norm, r.g_values[0], r.lam[0], r.Lf, r.Lg[0], r.inner_count, r.stationarity)
            for r in result.trace
        ),
    )
    _write_csv(directory / "errors.csv", ERROR_COLUMNS, enumerate(result.errors()))
    # Wall-clock times live apart from trace.csv so that traces are reproducible byte for byte.
    with open(directory / "timing.csv", "w") as fh:
        fh.write("t,elapsed_s\n")
        fh.writelines(f"{r.t},{r.elapsed_s:.3f}\n" for r in result.trace)
    mb01.write_array(directory / "x_out.mb01", result.x_final)
    (directory / "summary.txt").write_text(summary.to_text())


def _solve(config: ExperimentConfig, inst: CsInstance, algo: str, out: Optional[Path]):
    problem = inst.problem()
    x0 = inst.start_point()
    t0 = time.perf_counter()
    result = ALGORITHMS[algo](problem, x0, config.solver_config())
    wall = time.perf_counter() - t0
    summary = _summarize(config, inst, result, wall)
    if out is not None:
        try:
            _write_run(out / algo, result, summary)
        except OSError as exc:
            raise OSError(f"failed writing results under {out / algo}: {exc}") from exc
    log.info("%s: %s after %d iterations (%.3fs)", algo, result.status, result.iterations, wall)
    return summary, result


def _prepare(config: ExperimentConfig) -> Tuple[CsInstance, Optional[Path]]:
    inst = config.make_instance()
    out = None
    if config.output_dir is not None:
        out = Path(config.output_dir)
        try:
            save_instance(inst, out / "instance")
        except OSError as exc:
            raise OSError(f"failed writing instance under {out}: {exc}") from exc
    return inst, out


def run_experiment(config: ExperimentConfig) -> RunSummary:
    """Run one algorithm (``config.algo`` in ``{"scp_ls", "scp"}``) and write its outputs."""
    if config.algo == "both":
        raise ValueError("use compare_solvers for algo='both'")
    inst, out = _prepare(config)
    return _solve(config, inst, config.algo, out)[0]


def compare_solvers(config: ExperimentConfig) -> Tuple[RunSummary, RunSummary]:
    """Run SCP_ls and SCP on the same instance and start point; write a side-by-side table."""
    inst, out = _prepare(config)
    ls, _ = _solve(config, inst, "scp_ls", out)
    scp, _ = _solve(config, inst, "scp", out)
    if out is not None:
        rows = []
        for f in dataclasses.fields(RunSummary):
            a, b = getattr(ls, f.name), getattr(scp, f.name)
            a, b = _fmt_field(f.name, a), _fmt_field(f.name, b)
            rows.append(f"{f.name}={a}|{b}\n")
        (out / "comparison.txt").write_text("# key=scp_ls|scp\n" + "".join(rows))
    return ls, scp


def _exit_code(summaries) -> int:
    statuses = [s.status for s in summaries]
    if all(s == "converged" for s in statuses):
        return 0
    if "numerical_failure" in statuses:
        return 1
    return 2


_INT_KEYS = {"i_scale", "q", "n", "s0", "seed", "max_iters", "max_inner"}
_FLOAT_KEYS = {"mu", "tol", "c", "tau", "L_lo", "L_hi", "delta", "delta_scale", "gamma"}
_KEY_ALIASES = {"i": "i_scale", "out": "output_dir", "l_lo": "L_lo", "l_hi": "L_hi"}


def _normalize_key(key: str) -> str:
    key = key.strip().lstrip("-").replace("-", "_")
    return _KEY_ALIASES.get(key.lower(), _KEY_ALIASES.get(key, key))


def _coerce(key, value):
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scpls", description=__doc__.split("\n\n")[0])
    p.add_argument("--config", help="key=value file with the same keys as the flags; flags win")
    p.add_argument("--model", choices=LOSSES)
    p.add_argument("--mu", type=float)
    p.add_argument("--algo", choices=("scp_ls", "scp", "both"))
    p.add_argument("--i", dest="i_scale", type=int, help="size multiplier: q = 720 i, n = 2560 i")
    p.add_argument("--q", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--s0", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float, help="relative step termination tolerance")
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--max-inner", dest="max_inner", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--L-lo", dest="L_lo", type=float)
    p.add_argument("--L-hi", dest="L_hi", type=float)
    p.add_argument("--delta", type=float, help="constraint level (required for logistic/poisson)")
    p.add_argument("--delta-scale", dest="delta_scale", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--out", dest="output_dir")
    p.add_argument("--generate-only", action="store_true", help="write the instance and stop")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(argv: Optional[Sequence[str]] = None) -> Tuple[ExperimentConfig, argparse.Namespace]:
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        for k, v in read_key_values(args.config).items():
            key = _normalize_key(k)
            if key not in {f.name for f in dataclasses.fields(ExperimentConfig)}:
                raise ValueError(f"{args.config}: unknown key {k!r}")
            values[key] = _coerce(key, v)
    for f in dataclasses.fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    if values.get("i_scale") is None and values.get("q") is None and values.get("n") is None:
        values.setdefault("q", 72)
        values.setdefault("n", 256)
        values.setdefault("s0", 8)
    return ExperimentConfig(**values), args


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config, args = config_from_args(argv)
    except (ValueError, OSError) as exc:
        print(f"scpls: error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.generate_only:
            inst, out = _prepare(config)
            sys.stdout.write(f"model={inst.loss}\nq={inst.q}\nn={inst.n}\ns0={inst.s0}\ndelta={_fmt(inst.delta)}\n")
            return 0
        if config.algo == "both":
            summaries = compare_solvers(config)
        else:
            summaries = (run_experiment(config),)
    except Exception as exc:  # noqa: BLE001 - surfaced as exit status 1
        print(f"scpls: error: {exc}", file=sys.stderr)
        return 1
    for s in summaries:
        sys.stdout.write(f"# {s.algorithm}\n{s.to_text()}")
    return _exit_code(summaries)


if __name__ == "__main__":
    sys.exit(main())
