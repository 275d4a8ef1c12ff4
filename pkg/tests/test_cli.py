import dataclasses
import json
import math

import pytest

from stopflow import Observer, __version__
from stopflow.cli import fraction_decimal, main, parse_grid
from fractions import Fraction


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def test_fraction_decimal_rendering():
    assert fraction_decimal(Fraction(9, 20)) == "0.45"
    assert fraction_decimal(Fraction(1, 2)) == "0.5"
    assert fraction_decimal(Fraction(13, 30)) == "0.43333333333333333333"
    assert fraction_decimal(Fraction(2, 3)) == "0.66666666666666666667"


def test_parse_grid():
    assert parse_grid("12", "--n") == [12]
    assert parse_grid("10..14", "--n") == [10, 11, 12, 13, 14]
    assert parse_grid("10..30:10", "--n") == [10, 20, 30]
    from stopflow.cli import UsageError

    with pytest.raises(UsageError):
        parse_grid("abc", "--n")
    with pytest.raises(UsageError):
        parse_grid("9..5", "--n")


# ---------------------------------------------------------------------------
# exact
# ---------------------------------------------------------------------------

def test_exact_text_output(capsys):
    code, out, _ = run_cli(capsys, "exact", "--n", "5", "--k", "2")
    assert code == 0
    assert "9/20 = 0.45" in out


def test_exact_half_case(capsys):
    code, out, _ = run_cli(capsys, "exact", "--n", "4", "--k", "2")
    assert code == 0
    assert "1/2 = 0.5" in out
    code, out, _ = run_cli(capsys, "exact", "--n", "5", "--k", "4")
    assert code == 0
    assert "1/2 = 0.5" in out


def test_exact_json_output(capsys):
    code, out, _ = run_cli(capsys, "exact", "--n", "6", "--k", "2", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["tool"]["version"] == __version__
    assert doc["config"]["mode"] == "exact"
    assert doc["report"]["probability_fraction"] == "13/30"
    per_m = {row["m"]: row["arrangements"] for row in doc["report"]["per_m"]}
    assert sum(Fraction(w, m * math.comb(6, m)) for m, w in per_m.items()) == Fraction(13, 30)


def test_exact_usage_errors(capsys):
    code, _, err = run_cli(capsys, "exact", "--n", "5", "--k", "9")
    assert code == 1 and "error" in err
    code, _, err = run_cli(capsys, "exact", "--n", "5")
    assert code == 1
    code, _, err = run_cli(capsys, "exact", "--n", "x", "--k", "1")
    assert code == 1


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def test_simulate_csv_reruns_are_byte_identical(tmp_path, capsys):
    out = tmp_path / "report.csv"
    argv = ["simulate", "--n", "6", "--k", "2", "--strategy", "tau_n",
            "--trials", "2000", "--seed", "9", "--format", "csv",
            "--out", str(out)]
    assert main(argv) == 0
    first = out.read_bytes()
    assert main(argv) == 0
    capsys.readouterr()
    assert out.read_bytes() == first
    lines = out.read_text().splitlines()
    assert "n,k,strategy,trials,wins,estimate,stderr,ci_lo,ci_hi,seed" in lines
    assert any(line.startswith("# command stopflow simulate") for line in lines)


def test_simulate_json_stable_modulo_wall_time(capsys):
    argv = ["simulate", "--n", "5", "--k", "2", "--strategy", "tau_p_star",
            "--p", "0.5", "--trials", "500", "--seed", "4", "--format", "json"]
    code, out_a, _ = run_cli(capsys, *argv)
    code_b, out_b, _ = run_cli(capsys, *argv)
    assert code == code_b == 0
    doc_a, doc_b = json.loads(out_a), json.loads(out_b)
    doc_a["report"].pop("wall_time")
    doc_b["report"].pop("wall_time")
    assert doc_a == doc_b
    assert doc_a["config"]["strategy"] == "tau_p_star(p=0.5)"


def test_simulate_env_seed_fallback(capsys, monkeypatch):
    monkeypatch.setenv("STOPFLOW_SEED", "321")
    argv = ["simulate", "--n", "5", "--k", "1", "--strategy", "first_max",
            "--trials", "400", "--format", "json"]
    _, out_env, _ = run_cli(capsys, *argv)
    monkeypatch.delenv("STOPFLOW_SEED")
    _, out_explicit, _ = run_cli(capsys, *argv + ["--seed", "321"])
    assert json.loads(out_env)["report"]["wins"] == json.loads(out_explicit)["report"]["wins"]
    assert json.loads(out_env)["report"]["seed"] == 321


def test_simulate_threshold_auto_matches_classical_value(capsys):
    # side oracle: the classical full-information threshold value
    n = 200
    r = int(n / math.e)
    classical = (r / n) * sum(1.0 / (j - 1) for j in range(r + 1, n + 1))
    argv = ["simulate", "--n", "200", "--k", "199", "--strategy", "classical_threshold",
            "--r", "auto", "--trials", "20000", "--seed", "31", "--format", "json"]
    code, out, _ = run_cli(capsys, *argv)
    assert code == 0
    rep = json.loads(out)["report"]
    sigma = max(rep["stderr"], 1e-9)
    assert abs(rep["estimate"] - classical) <= 4 * sigma


def test_simulate_usage_errors(capsys):
    code, _, err = run_cli(capsys, "simulate", "--n", "5", "--k", "2",
                           "--strategy", "bogus")
    assert code == 1 and "unknown strategy" in err
    code, _, err = run_cli(capsys, "simulate", "--n", "5", "--k", "2",
                           "--strategy", "tau_p_star")
    assert code == 1  # missing --p
    code, _, err = run_cli(capsys, "simulate", "--n", "5", "--k", "2",
                           "--strategy", "tau_n", "--trials", "0")
    assert code == 1


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def test_verify_small_passes(capsys):
    code, out, _ = run_cli(capsys, "verify", "--n-max", "5", "--bounds-n", "40")
    assert code == 0
    assert "verdict: all checks passed" in out
    assert "FAIL" not in out


def test_verify_json_verdict(capsys):
    code, out, _ = run_cli(capsys, "verify", "--n-max", "4", "--bounds-n", "30",
                           "--skip-dp", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["report"]["passed"] is True
    names = {c["name"] for c in doc["report"]["checks"]}
    assert "formula_vs_oracle" in names
    assert "dp_vs_formula" not in names  # skipped


def test_verify_detects_injected_fault(capsys, monkeypatch):
    # off-by-one in the pending-inner bookkeeping must trip the suite
    original = Observer.observe

    def corrupted(self, pos):
        event = original(self, pos)
        return dataclasses.replace(event, pending_inner=event.pending_inner + 1)

    monkeypatch.setattr(Observer, "observe", corrupted)
    code, out, _ = run_cli(capsys, "verify", "--n-max", "3", "--bounds-n", "20")
    assert code == 2
    assert "FAIL" in out


def test_verify_resource_guard(capsys):
    code, _, err = run_cli(capsys, "verify", "--n-max", "12")
    assert code == 3
    assert "resource guard" in err


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------

def test_scaling_csv_rows_and_skips(tmp_path, capsys):
    out = tmp_path / "scaling.csv"
    code = main(["scaling", "--k", "3", "--n", "2..12:2", "--format", "csv",
                 "--out", str(out)])
    capsys.readouterr()
    assert code == 0
    lines = out.read_text().splitlines()
    assert "n,k,p_exact,p_decimal,scaled,upper_bound,lower_bound,best_epsilon" in lines
    assert any(line.startswith("# skipped n=2 k=3") for line in lines)
    data_rows = [ln for ln in lines if ln and not ln.startswith(("#", "n,"))]
    from stopflow import success_probability_exact

    for row in data_rows:
        fields = row.split(",")
        n, k = int(fields[0]), int(fields[1])
        assert Fraction(fields[2]) == success_probability_exact(n, k)
        assert float(fields[4]) <= 1.2879


def test_scaling_json(capsys):
    code, out, _ = run_cli(capsys, "scaling", "--k", "2", "--n", "10..30:10",
                           "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert [row["n"] for row in doc["rows"]] == [10, 20, 30]
    assert doc["skipped"] == []


# ---------------------------------------------------------------------------
# trace
# ---------------------------------------------------------------------------

def test_trace_golden_run(capsys):
    code, out, _ = run_cli(capsys, "trace", "--n", "9", "--k", "2",
                           "--perm", "2 9 4 7 3 1 5 8 6")
    assert code == 0
    b_seq = []
    for line in out.splitlines():
        if line.startswith("t="):
            b_seq.append(int(line.split("b=")[1].split()[0]))
    assert b_seq == [0, 0, 1, 2, 1, 1, 2, 1, 0]
    assert "t=6" in out and "<-- stop" in out
    assert "stopped at t=6 on v1: WIN" in out


def test_trace_identity_and_reversed(capsys):
    code, out, _ = run_cli(capsys, "trace", "--n", "5", "--k", "2",
                           "--perm", "1 2 3 4 5")
    assert code == 0
    assert "stopped at t=5 on v5: LOSS" in out
    code, out, _ = run_cli(capsys, "trace", "--n", "5", "--k", "2",
                           "--perm", "5 4 3 2 1")
    assert code == 0
    assert "stopped at t=5 on v1: WIN" in out


def test_trace_json_structure(capsys):
    code, out, _ = run_cli(capsys, "trace", "--n", "9", "--k", "2",
                           "--perm", "2 9 4 7 3 1 5 8 6", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    trace = doc["traces"][0]
    assert trace["stop_index"] == 6 and trace["win"] is True
    assert [s["pending_inner"] for s in trace["steps"]] == [0, 0, 1, 2, 1, 1, 2, 1, 0]
    # component structures stay relative: offsets always start at zero
    assert all(c["offsets"][0] == 0 for s in trace["steps"] for c in s["components"])


def test_trace_perm_file_batch(tmp_path, capsys):
    f = tmp_path / "perms.txt"
    f.write_text("1 2 3 4\n4 3 2 1\n")
    code, out, _ = run_cli(capsys, "trace", "--n", "4", "--k", "1",
                           "--perm-file", str(f), "--format", "json")
    assert code == 0
    assert len(json.loads(out)["traces"]) == 2


def test_trace_usage_errors(capsys):
    code, _, err = run_cli(capsys, "trace", "--n", "4", "--k", "1", "--perm", "1 2 3")
    assert code == 1
    code, _, err = run_cli(capsys, "trace", "--n", "4", "--k", "1", "--perm", "1 2 x 4")
    assert code == 1
    code, _, err = run_cli(capsys, "trace", "--n", "4", "--k", "1")
    assert code == 1


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

def test_bounds_text(capsys):
    code, out, _ = run_cli(capsys, "bounds", "--n", "100", "--k", "2")
    assert code == 0
    assert "lower" in out and "upper" in out


def test_bounds_json_with_epsilon(capsys):
    code, out, _ = run_cli(capsys, "bounds", "--n", "100", "--k", "2",
                           "--epsilon", "0.5", "--format", "json")
    assert code == 0
    rep = json.loads(out)["report"]
    assert rep["epsilon"] == 0.5
    q = 0.5 * 100 ** (-1 / 3)
    assert abs(rep["p"] - (1 - q)) < 1e-12
    assert rep["lower"] < rep["upper"]


def test_bounds_degenerate_power_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "bounds", "--n", "4", "--k", "2")
    assert code == 1


# ---------------------------------------------------------------------------
# config file and misc plumbing
# ---------------------------------------------------------------------------

def test_config_file_defaults_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nn=5\nk=2\nformat=text\n")
    code, out, _ = run_cli(capsys, "exact", "--config", str(cfg))
    assert code == 0 and "9/20" in out
    # explicit flag beats the file
    code, out, _ = run_cli(capsys, "exact", "--config", str(cfg), "--k", "4")
    assert code == 0 and "1/2" in out


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("banana=1\n")
    code, _, err = run_cli(capsys, "exact", "--config", str(cfg), "--n", "5", "--k", "2")
    assert code == 1 and "unknown config keys" in err


def test_unknown_subcommand_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "frobnicate")
    assert code == 1


def test_out_writes_file(tmp_path, capsys):
    out = tmp_path / "exact.txt"
    code = main(["exact", "--n", "5", "--k", "2", "--out", str(out)])
    capsys.readouterr()
    assert code == 0
    assert "9/20" in out.read_text()


def test_console_script_entry_point():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "stopflow.cli", "exact", "--n", "4", "--k", "2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "1/2" in proc.stdout
