import json

from gladssn.cli import main
from gladssn.harness import read_trace

from helpers import synthetic_trace
from gladssn.harness import write_trace


def test_run_quad(tmp_path, capsys):
    out = tmp_path / "trace.csv"
    code = main(["run", "--problem", "quad", "--solver", "gladssn",
                 "--p", "0.5", "--m", "1", "--seed", "7",
                 "--tol", "1e-10", "--out", str(out)])
    assert code == 0
    rows = read_trace(out)
    assert 1 <= len(rows) <= 30
    msg = capsys.readouterr().out
    assert "converged" in msg and str(out) in msg


def test_run_requires_problem(capsys):
    assert main(["run", "--solver", "gladssn"]) == 1
    assert "problem" in capsys.readouterr().err


def test_no_subcommand_is_usage_error(capsys):
    assert main([]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_bad_flag_value_is_exit_1(tmp_path, capsys):
    # argparse normally exits the process with 2; the wrapper maps usage
    # problems to a plain return of 1
    assert main(["run", "--problem", "quad", "--emit", "xml"]) == 1
    assert main(["run", "--problem", "nosuch"]) == 1
    capsys.readouterr()


def test_run_maxiter_exit_code(tmp_path):
    out = tmp_path / "t.csv"
    code = main(["run", "--problem", "quad", "--tol", "1e-12",
                 "--max-outer", "2", "--out", str(out)])
    assert code == 2


def test_run_with_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"problem": "huber", "grad_tol": 1e-6,
                               "problem_kwargs": {"m": 40, "n": 6},
                               "out_path": str(tmp_path / "a.csv")}))
    assert main(["run", "--config", str(cfg)]) == 0
    assert (tmp_path / "a.csv").exists()
    # explicit flags win over the file
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "b.csv"),
                 "--seed", "3"]) == 0
    assert (tmp_path / "b.csv").exists()
    a = read_trace(tmp_path / "a.csv")
    b = read_trace(tmp_path / "b.csv")
    assert [r.g_k for r in a] != [r.g_k for r in b]  # different seed


def test_run_rejects_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"problem": "quad", "bogus": 1}))
    assert main(["run", "--config", str(cfg)]) == 1
    assert "bogus" in capsys.readouterr().err


def test_verify_command(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["run", "--problem", "quad", "--tol", "1e-9",
                 "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["verify", str(out)]) == 0
    assert "verify: PASS" in capsys.readouterr().out
    # corrupt one objective value: verification must fail with exit 1
    text = out.read_text().splitlines()
    head, rows = text[0], text[1:]
    cols = head.split(",")
    broken = rows[2].split(",")
    broken[cols.index("F_val")] = repr(float(rows[1].split(",")[cols.index("F_val")]) + 9.0)
    rows[2] = ",".join(broken)
    out.write_text("\n".join([head] + rows) + "\n")
    assert main(["verify", str(out)]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_verify_missing_file(capsys):
    assert main(["verify", "/nonexistent/trace.csv"]) == 1
    assert "gladssn:" in capsys.readouterr().err


def test_estimate_order_command(tmp_path, capsys):
    path = tmp_path / "synt.csv"
    write_trace(path, synthetic_trace([1e-1, 1e-2, 1e-4, 1e-8]))
    assert main(["estimate-order", str(path), "--tail", "3"]) == 0
    assert "q=2.0000" in capsys.readouterr().out
    # too short for the default tail of 6
    assert main(["estimate-order", str(path)]) == 1
    assert "gladssn:" in capsys.readouterr().err


def test_compare_command(tmp_path, capsys):
    cfg = tmp_path / "cmp.json"
    base = {"problem": "huber", "grad_tol": 1e-7,
            "problem_kwargs": {"m": 40, "n": 6}}
    cfg.write_text(json.dumps([dict(base, m=1), dict(base, m=3)]))
    assert main(["compare", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "huber" in out and "converged" in out
    # a bare dict instead of a list is a config error
    cfg.write_text(json.dumps(base))
    assert main(["compare", "--config", str(cfg)]) == 1
