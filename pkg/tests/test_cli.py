import json

import pytest

from cutforge.cli import EXIT_GUARD, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bench_roundtrip(tmp_path, capsys):
    f = tmp_path / "q.qasm"
    assert main(["bench", "qft", "--n", "4", "--out", str(f)]) == EXIT_OK
    code, out, _ = run(capsys, "cut", str(f), "--m", "2")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["num_qubits"] == 4 and rep["summary"]["n_cuts"] >= 1


def test_cut_is_byte_stable(capsys):
    a = run(capsys, "cut", "qft:n=6", "--m", "4")[1]
    b = run(capsys, "cut", "qft:n=6", "--m", "4")[1]
    assert a == b
    s = json.loads(a)["summary"]
    assert (s["n_gate"], s["n_wire"]) == (6, 1)


def test_verify_exact(capsys):
    code, out, _ = run(capsys, "verify", "bell", "--m", "1")
    assert code == EXIT_OK
    assert json.loads(out)["exact"]["gap"] < 1e-9


def test_verify_mc_fails_with_tiny_budget(capsys):
    code, _, err = run(capsys, "verify", "bell", "--m", "1", "--mode", "mc", "--eps", "0.3", "--trials", "20")
    assert "pass-rate" in err
    assert code in (EXIT_OK, EXIT_VERIFY)


def test_estimate_csv_and_json(capsys):
    code, out, _ = run(capsys, "estimate", "qft:n=6", "--m", "4", "--format", "csv")
    assert code == EXIT_OK
    head, row = out.strip().splitlines()
    assert head.startswith("benchmark,N,m")
    code, out, _ = run(capsys, "estimate", "qaoa:n=20,p=10", "--m", "10")
    r = json.loads(out)[0]
    assert r["cutting_runtime_log10"] > 30
    assert "e+" in r["cutting_runtime"]


def test_usage_and_guard_exit_codes(capsys, monkeypatch):
    assert run(capsys, "bench", "nope")[0] == EXIT_USAGE
    with pytest.raises(SystemExit) as ei:
        main(["frobnicate"])
    assert ei.value.code == EXIT_USAGE
    assert run(capsys, "cut", "qft:n=6", "--m", "0")[0] == EXIT_USAGE
    monkeypatch.setenv("CUTFORGE_QUBIT_GUARD", "3")
    assert run(capsys, "verify", "qft:n=6", "--m", "4")[0] == EXIT_GUARD


def test_wire_only_infeasible(capsys):
    assert run(capsys, "cut", "bell", "--m", "1", "--no-gate")[0] == EXIT_GUARD


def test_analyze(capsys):
    code, out, err = run(capsys, "analyze", "--n-min", "5", "--n-max", "6")
    assert code == EXIT_OK and out.count("\n") == 1 + 3 + 4
    assert "max |log10 gap|" in err


def test_profile_changes_estimate(tmp_path, capsys):
    prof = tmp_path / "hw.json"
    prof.write_text(json.dumps({"p_phys": 1e-3, "layout": False, "factory": {"tiles": 12, "duration_cycles": 18}}))
    base = json.loads(run(capsys, "estimate", "qft:n=6", "--m", "4")[1])[0]
    noisy = json.loads(run(capsys, "estimate", "qft:n=6", "--m", "4", "--profile", str(prof))[1])[0]
    assert noisy["baseline_physical_qubits"] != base["baseline_physical_qubits"]
    assert noisy["subcircuits"][0]["d"] > base["subcircuits"][0]["d"]
