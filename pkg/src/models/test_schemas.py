"""
Test script to verify the data models
Run: pytest src/models/test_schemas.py
"""
import pytest
from pydantic import ValidationError

from src.core.gf2core import Permutation
from src.models.schemas import (
    BenchRow,
    CircuitMetrics,
    CnotCircuit,
    CostKind,
    Gate,
    Layer,
    MethodOutcome,
    OpRecord,
    PortfolioSpec,
    ResynthReport,
    SynthesisFailure,
    SynthesisResult,
    is_method_tag,
)


def test_gates():
    print("\n1. Creating gates...")
    g = Gate.cnot(0, 3)
    assert g.is_cnot and g.control == 0 and g.target == 3
    assert str(g) == "cnot(0, 3)"
    assert Gate.other("T*", 1).is_t
    assert g.relabel((2, 0, 1, 5)) == Gate.cnot(2, 5)
    print(f"   ✅ {g}")

    for bad in (lambda: Gate.cnot(1, 1), lambda: Gate(name="cnot", wires=(0,)), lambda: Gate.other("H")):
        with pytest.raises(ValidationError):
            bad()


def test_circuit_footprint_and_concat():
    c = CnotCircuit(n_wires=3, gates=[Gate.cnot(0, 1), Gate.other("H", 2)])
    assert c.cnot_count == 1 and not c.is_linear
    with pytest.raises(ValidationError):
        CnotCircuit(n_wires=2, gates=[Gate.cnot(0, 2)])
    with pytest.raises(ValueError):
        c.add_cnot(0, 3)
    joined = c + CnotCircuit(n_wires=3, gates=[Gate.cnot(2, 0)])
    assert len(joined) == 3
    with pytest.raises(ValueError):
        c + CnotCircuit(n_wires=4)


def test_synthesis_result_width_check():
    circuit = CnotCircuit(n_wires=2, gates=[Gate.cnot(0, 1)])
    SynthesisResult(circuit=circuit, out_permutation=Permutation([1, 0]), method="kutin", depth=1, cnot_count=1)
    with pytest.raises(ValidationError):
        SynthesisResult(circuit=circuit, out_permutation=Permutation([0, 1, 2]), method="kutin", depth=1, cnot_count=1)


def test_failure_final_cost():
    assert SynthesisFailure(method="greedy:h_sum", reason="reset budget").final_cost is None
    assert SynthesisFailure(method="greedy:h_sum", reason="x", cost_trace=[9, 7, 4]).final_cost == 4


def test_layers_reject_shared_lines():
    Layer(ops=[OpRecord.row(0, 1), OpRecord.col(0, 1), OpRecord.flip(2, 2)])
    with pytest.raises(ValidationError):
        Layer(ops=[OpRecord.row(0, 1), OpRecord.row(1, 2)])
    with pytest.raises(ValidationError):
        Layer(ops=[OpRecord.col(0, 1), OpRecord.flip(3, 1)])
    with pytest.raises(ValidationError):
        OpRecord.row(2, 2)


def test_method_tags():
    for tag in ("gaussian", "kutin", "dacsynth", "dacsynth:tiled4", "ancilla-block",
                "greedy:H_prod", "lu+greedy:h_sum"):
        assert is_method_tag(tag), tag
    for tag in ("dacsynth:tiled5", "greedy:H", "lu+kutin", ""):
        assert not is_method_tag(tag), tag

    spec = PortfolioSpec.parse(" gaussian, greedy:H_sum ,", seed=4)
    assert spec.methods == ["gaussian", "greedy:H_sum"] and spec.seed == 4
    with pytest.raises(ValidationError):
        PortfolioSpec.parse("gaussian,annealing")
    with pytest.raises(ValidationError):
        PortfolioSpec(methods=[])


def test_cost_kind_flags():
    assert CostKind("H_sum").uses_inverse and not CostKind("H_sum").is_product
    assert CostKind("h_prod").is_product and not CostKind("h_prod").uses_inverse


def test_outcomes_and_reports():
    assert not MethodOutcome(method="greedy:H_sum", failure="skipped").ok
    assert BenchRow(n=4, method="kutin", sample=0).depth is None

    metrics = CircuitMetrics(depth=10, cnot_count=20, t_count=7, t_depth=3)
    report = ResynthReport(before=metrics, after=metrics.model_copy(update={"depth": 6, "cnot_count": 15}))
    assert report.depth_saving == pytest.approx(0.4)
    assert report.cnot_saving == pytest.approx(0.25)
    empty = CircuitMetrics(depth=0, cnot_count=0, t_count=0, t_depth=0)
    assert ResynthReport(before=empty, after=empty).depth_saving == 0.0
    print("   ✅ Reports compute savings")
