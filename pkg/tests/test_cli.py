import numpy as np
import pytest

from scpls import SolverConfig, mb01, run_scp_ls
from scpls.cli import ExperimentConfig, compare_solvers, main, read_csv, run_experiment
from scpls.models import load_instance, read_key_values

DESK = ["--q", "72", "--n", "256", "--s0", "8"]


def test_single_run_writes_outputs(tmp_path, capsys):
    code = main(["--model", "sq_l2", "--mu", "0", "--algo", "scp_ls", "--seed", "1", *DESK, "--out", str(tmp_path)])
    assert code == 0
    run = tmp_path / "scp_ls"
    for name in ("trace.csv", "errors.csv", "timing.csv", "x_out.mb01", "summary.txt"):
        assert (run / name).exists()
    summary = read_key_values(run / "summary.txt")
    assert summary["status"] == "converged"
    assert float(summary["fitted_Q"]) < 1
    assert "status=converged" in capsys.readouterr().out
    header = (run / "trace.csv").read_text().splitlines()[0]
    assert header == "t,F,step_norm,g_value,lambda,Lf,Lg,inner_count,stationarity"


def test_csv_round_trip_and_recovery_error(tmp_path):
    cfg = ExperimentConfig(model="lorentzian", mu=1.0, seed=2, q=72, n=256, s0=8, output_dir=str(tmp_path))
    summary = run_experiment(cfg)
    inst = load_instance(tmp_path / "instance")
    res = run_scp_ls(inst.problem(), inst.start_point(), SolverConfig())
    trace = read_csv(tmp_path / "scp_ls" / "trace.csv")
    assert np.array_equal(trace["F"], [r.F_value for r in res.trace])
    assert np.array_equal(trace["lambda"], [r.lam[0] for r in res.trace])
    assert np.array_equal(trace["Lg"], [r.Lg[0] for r in res.trace])
    assert np.array_equal(trace["stationarity"], [r.stationarity for r in res.trace])
    assert np.array_equal(trace["inner_count"], [r.inner_count for r in res.trace])
    errors = read_csv(tmp_path / "scp_ls" / "errors.csv")
    assert np.array_equal(errors["error"], res.errors())

    x_out = mb01.read_vector(tmp_path / "scp_ls" / "x_out.mb01")
    recomputed = np.linalg.norm(x_out - inst.x_orig) / np.linalg.norm(inst.x_orig)
    stored = float(read_key_values(tmp_path / "scp_ls" / "summary.txt")["recovery_rel_error"])
    assert abs(stored - recomputed) <= 1e-15
    assert stored == summary.recovery_rel_error


def test_compare_solvers(tmp_path):
    cfg = ExperimentConfig(model="sq_l2", mu=0.0, seed=1, q=72, n=256, s0=8, output_dir=str(tmp_path))
    ls, scp = compare_solvers(cfg)
    assert ls.status == scp.status == "converged"
    assert ls.iterations <= scp.iterations
    assert abs(ls.final_F - scp.final_F) <= 1e-6 * abs(scp.final_F)
    a = (tmp_path / "scp_ls" / "errors.csv").read_text().splitlines()[0]
    b = (tmp_path / "scp" / "errors.csv").read_text().splitlines()[0]
    assert a == b == "t,error"
    table = read_key_values(tmp_path / "comparison.txt")
    assert table["iterations"] == f"{ls.iterations}|{scp.iterations}"


def test_trace_files_are_reproducible(tmp_path):
    args = ["--model", "lorentzian", "--mu", "1", "--seed", "3", *DESK]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert main([*args, "--out", str(tmp_path / "b")]) == 0
    for name in ("trace.csv", "errors.csv", "x_out.mb01"):
        assert (tmp_path / "a" / "scp_ls" / name).read_bytes() == (tmp_path / "b" / "scp_ls" / name).read_bytes()


def test_config_file_and_flag_precedence(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# desk run\nmodel=lorentzian\nmu=1\nseed=5\nq=72\nn=256\ns0=8\nmax-iters=4\n")
    code = main(["--config", str(conf), "--seed", "6", "--out", str(tmp_path / "o")])
    assert code == 2
    summary = read_key_values(tmp_path / "o" / "scp_ls" / "summary.txt")
    assert summary["model"] == "lorentzian" and summary["seed"] == "6"
    assert summary["status"] == "max_outer" and summary["iterations"] == "4"


def test_errors_exit_with_status_one(tmp_path, capsys):
    assert main(["--model", "logistic", *DESK, "--out", str(tmp_path)]) == 1
    assert "delta is required" in capsys.readouterr().err
    assert main(["--q", "72", "--n", "50"]) == 1
    conf = tmp_path / "bad.conf"
    conf.write_text("colour=blue\n")
    assert main(["--config", str(conf)]) == 1


def test_unwritable_output_reports_path(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main([*DESK, "--out", str(blocker / "sub")]) == 1
    assert str(blocker) in capsys.readouterr().err


def test_config_invariants():
    with pytest.raises(ValueError):
        ExperimentConfig(q=10, n=5, s0=1)
    with pytest.raises(ValueError):
        ExperimentConfig(i_scale=1, q=72, n=256)
    with pytest.raises(ValueError):
        ExperimentConfig(mu=1.5)
    with pytest.raises(ValueError):
        run_experiment(ExperimentConfig(algo="both", q=72, n=256))


@pytest.mark.slow
def test_full_scale_dimensions(tmp_path, capsys):
    assert main(["--model", "lorentzian", "--mu", "1", "--i", "5", "--generate-only", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "q=3600" in out and "n=12800" in out and "s0=400" in out
    meta = read_key_values(tmp_path / "instance" / "instance.meta")
    assert (meta["q"], meta["n"], meta["s0"], meta["gamma"]) == ("3600", "12800", "400", "0.02")
