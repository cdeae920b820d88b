"""
Tests for the linsynth command line
Run: pytest src/test_cli.py
"""
from pathlib import Path

import pytest

from src.cli import EXIT_INPUT, EXIT_NO_METHOD, EXIT_OK, EXIT_USAGE, main
from src.core.circuit import simulate
from src.core.gf2core import BitMatrix, Permutation, multiply, write_matrix
from src.core.qcformat import parse_qc, read_qc
from src.utils.config import reset_settings

FIXTURES = Path(__file__).resolve().parents[1] / "data" / "fixtures"
FAST = ["--methods", "gaussian,kutin,dacsynth"]


def test_synth_identity(tmp_path, capsys):
    path = tmp_path / "id.txt"
    write_matrix(BitMatrix.identity(4), path)
    assert main(["synth", str(path), *FAST]) == EXIT_OK
    program = parse_qc(capsys.readouterr().out)
    assert program.circuit.gates == []
    assert program.out_permutation is None


def test_synth_writes_a_verifiable_circuit(tmp_path):
    out = tmp_path / "swap3.qc"
    assert main(["synth", str(FIXTURES / "swap3.txt"), "--out", str(out), *FAST]) == EXIT_OK
    program = read_qc(out)
    implemented = simulate(program.circuit)
    if program.out_permutation is not None:
        implemented = Permutation(program.out_permutation).apply_rows(implemented)
    assert implemented.to_rows() == ["010", "100", "111"]


def test_input_errors(tmp_path, capsys):
    singular = tmp_path / "singular.txt"
    write_matrix(BitMatrix.from_rows(["11", "11"]), singular)
    assert main(["synth", str(singular), *FAST]) == EXIT_INPUT

    broken = tmp_path / "broken.txt"
    broken.write_text("2 2\n10\n2x\n", encoding="utf-8")
    assert main(["synth", str(broken), *FAST]) == EXIT_INPUT
    assert "line 3" in capsys.readouterr().err

    assert main(["synth", str(tmp_path / "missing.txt"), *FAST]) == EXIT_INPUT


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["synth"])
    assert info.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["dance"])
    assert info.value.code == EXIT_USAGE

    path = tmp_path / "id.txt"
    write_matrix(BitMatrix.identity(2), path)
    assert main(["synth", str(path), "--methods", "annealing"]) == EXIT_USAGE


def test_no_method_succeeded(tmp_path, monkeypatch):
    monkeypatch.setenv("LINSYNTH_GREEDY_MAX_WIRES", "2")
    reset_settings()
    try:
        path = tmp_path / "id.txt"
        write_matrix(BitMatrix.identity(3), path)
        assert main(["synth", str(path), "--methods", "greedy:H_sum"]) == EXIT_NO_METHOD
    finally:
        monkeypatch.delenv("LINSYNTH_GREEDY_MAX_WIRES")
        reset_settings()


def test_table2_small(capsys):
    assert main(["table2", "--k", "2"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "k=2: 0:3 1:4"


def test_bench_csv(tmp_path):
    csv = tmp_path / "worst.csv"
    argv = ["bench", "worst", "--n-min", "2", "--n-max", "3", "--samples", "1",
            "--csv", str(csv), "--no-timing", *FAST]
    assert main(argv) == EXIT_OK
    lines = csv.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "n,method,sample,gen_depth,depth,cnots,ms"
    assert len(lines) == 1 + 2 * 3


def test_resynth_fixture(tmp_path, capsys):
    out = tmp_path / "tof_chain.qc"
    report = tmp_path / "report.json"
    argv = ["resynth", str(FIXTURES / "tof_chain.qc"), "--out", str(out), "--report", str(report), *FAST]
    assert main(argv) == EXIT_OK
    assert read_qc(out).circuit.n_wires == 5
    assert "T-count   15 -> 15" in capsys.readouterr().out
    assert report.exists()


def test_ancilla_default_input(tmp_path):
    table = tmp_path / "out.txt"
    write_matrix(BitMatrix.from_rows(["11", "01", "10", "11"]), table)
    out = tmp_path / "anc.qc"
    assert main(["ancilla", "--out-table", str(table), "--out", str(out), *FAST]) == EXIT_OK
    program = read_qc(out)
    implemented = simulate(program.circuit)
    if program.out_permutation is not None:
        implemented = Permutation(program.out_permutation).apply_rows(implemented)
    fresh = BitMatrix.from_rows(["10", "01", "00", "00"])
    assert multiply(implemented, fresh).to_rows() == ["11", "01", "10", "11"]
