"""
Tests for chunk resynthesis
Run: pytest src/pipeline/test_resynthesis.py
"""
from pathlib import Path

import pytest

from src.core.circuit import linear_barrier_equivalent, metrics
from src.core.gf2core import BitMatrix, write_matrix
from src.core.qcformat import parse_qc, read_qc
from src.models.schemas import CnotCircuit, Gate, PortfolioSpec
from src.pipeline.resynthesis import Resynthesizer, load_sidecar, report_lines, resynthesize, resynthesize_program

FIXTURES = Path(__file__).resolve().parents[2] / "data" / "fixtures"
SPEC = PortfolioSpec(methods=["gaussian", "kutin", "dacsynth", "greedy:H_sum"])


def test_cnot_free_circuit_is_unchanged():
    circuit = CnotCircuit(n_wires=2, gates=[Gate.other("H", 0), Gate.other("T", 1)])
    rewritten, report = resynthesize(circuit, SPEC)
    assert rewritten.gates == circuit.gates
    assert report.chunks == []
    assert report.out_permutation == [0, 1]


def test_identity_chunk_disappears():
    circuit = CnotCircuit(n_wires=2, gates=[
        Gate.other("T", 0), Gate.cnot(0, 1), Gate.cnot(0, 1), Gate.other("T", 1),
    ])
    rewritten, report = resynthesize(circuit, SPEC)
    assert rewritten.cnot_count == 0
    assert report.after.t_count == 2
    assert report.after.t_depth == report.before.t_depth == 1
    assert report.chunks[0].cnots == 0
    assert report.equivalence_checked


def test_swap_becomes_relabeling():
    circuit = CnotCircuit(n_wires=2, gates=[
        Gate.other("T", 0), Gate.cnot(0, 1), Gate.cnot(1, 0), Gate.cnot(0, 1), Gate.other("T*", 0),
    ])
    rewritten, report = resynthesize(circuit, SPEC)
    assert rewritten.gates == [Gate.other("T", 0), Gate.other("T*", 1)]
    assert report.out_permutation == [1, 0]
    assert report.after.t_depth == report.before.t_depth
    assert linear_barrier_equivalent(circuit, rewritten, report.out_permutation)


@pytest.mark.parametrize("path", sorted(FIXTURES.glob("*.qc")), ids=lambda p: p.stem)
def test_fixtures_keep_t_metrics(path):
    program = read_qc(path)
    new_program, report = resynthesize_program(program, SPEC)
    before, after = metrics(program.circuit), metrics(new_program.circuit)
    assert after.t_count == before.t_count
    assert after.t_depth == before.t_depth
    assert after.depth <= before.depth
    assert after.cnot_count <= before.cnot_count
    assert report.after == after


def test_some_fixture_gets_shallower():
    improved = []
    for path in sorted(FIXTURES.glob("*.qc")):
        _, report = resynthesize_program(read_qc(path), SPEC)
        if report.after.depth < report.before.depth:
            improved.append(path.stem)
    assert improved


def test_program_out_permutation_composes():
    text = ".v a b\nBEGIN\nT a\ncnot a b\ncnot b a\ncnot a b\nEND\n# out-perm: b a\n"
    program = parse_qc(text)
    new_program, report = resynthesize_program(program, SPEC)
    # the swap cancels the swap already recorded on the program
    assert report.out_permutation == [1, 0]
    assert new_program.out_permutation is None


def test_parallel_jobs_match_serial():
    program = read_qc(FIXTURES / "cnot_ladder.qc")
    serial, _ = resynthesize_program(program, SPEC, jobs=1)
    parallel, _ = resynthesize_program(program, SPEC, jobs=2)
    assert serial.circuit.gates == parallel.circuit.gates


def test_sidecar_tables(tmp_path):
    # chunk operator rows 100, 110, 111 with the third wire a fresh ancilla
    table_out = BitMatrix.from_rows(["10", "11", "11"])
    write_matrix(table_out, tmp_path / "chunk-0.out")
    table_in, loaded = load_sidecar(tmp_path, 0)
    assert table_in.to_rows() == ["10", "01", "00"]
    assert loaded == table_out
    assert load_sidecar(tmp_path, 1) is None

    circuit = CnotCircuit(n_wires=3, gates=[Gate.cnot(0, 1), Gate.cnot(1, 2), Gate.other("T", 2)])
    _, report = resynthesize(circuit, SPEC, sidecar=tmp_path)
    assert report.after.depth <= report.before.depth
    assert report.after.t_count == 1
    assert report.equivalence_checked == (report.chunks[0].chosen_method != "ancilla-block")


def test_mismatched_sidecar_is_ignored(tmp_path):
    write_matrix(BitMatrix.from_rows(["01", "10", "00"]), tmp_path / "chunk-0.out")
    circuit = CnotCircuit(n_wires=3, gates=[Gate.cnot(0, 1), Gate.cnot(1, 2)])
    _, report = resynthesize(circuit, SPEC, sidecar=tmp_path)
    assert report.equivalence_checked
    assert "ancilla-block" not in report.chunks[0].best_methods


def test_resynthesizer_stats_and_report():
    resynthesizer = Resynthesizer(SPEC)
    _, report = resynthesizer.process(read_qc(FIXTURES / "tof_chain.qc"))
    stats = resynthesizer.get_stats()
    assert stats["programs"] == 1
    assert stats["depth_after"] <= stats["depth_before"]
    lines = report_lines(report)
    assert lines[0].startswith("T-count")
    assert any(line.startswith("Chunks") for line in lines)


def test_toffoli_chain_drops_the_swap():
    program = read_qc(FIXTURES / "tof_chain.qc")
    new_program, report = resynthesize_program(program, SPEC)
    assert report.before.t_count == report.after.t_count == 15
    assert report.after.depth < report.before.depth
    assert report.after.cnot_count <= report.before.cnot_count - 3
    assert new_program.out_permutation is not None
