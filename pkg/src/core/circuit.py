"""
CNOT circuit analysis

Depth (slice and DAG algorithms), simulation to a BitMatrix, seeded random
instances, chunking around non-linear gates and wire relabeling.
"""
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from src.core.exceptions import NonLinearGateError
from src.core.gf2core import BitMatrix, Permutation
from src.models.schemas import (
    Barrier,
    CircuitMetrics,
    CnotChunk,
    CnotCircuit,
    Gate,
    Segment,
    SynthesisResult,
)

Seed = Union[int, Sequence[int]]


def _require_linear(circuit: CnotCircuit, operation: str) -> None:
    for gate in circuit.gates:
        if not gate.is_cnot:
            raise NonLinearGateError(f"{operation} needs a CNOT-only circuit, found {gate}")


class DepthTracker:
    """Per-wire frontier: depth of a growing circuit in O(1) per gate"""

    def __init__(self, n_wires: int):
        self.frontier = [0] * n_wires
        self.depth = 0

    def add(self, wires: Iterable[int]) -> int:
        wires = tuple(wires)
        level = max(self.frontier[w] for w in wires) + 1
        for w in wires:
            self.frontier[w] = level
        self.depth = max(self.depth, level)
        return level


def slices(circuit: CnotCircuit) -> List[List[Gate]]:
    """
    Group gates into parallel slices

    Each gate is pulled left past every slice it shares no wire with and
    lands right after the last slice it conflicts with.
    """
    layers: List[List[Gate]] = []
    footprints: List[set] = []
    for gate in circuit.gates:
        wires = set(gate.wires)
        s = len(layers)
        while s > 0 and not footprints[s - 1] & wires:
            s -= 1
        if s == len(layers):
            layers.append([])
            footprints.append(set())
        layers[s].append(gate)
        footprints[s] |= wires
    return layers


def depth_slices(circuit: CnotCircuit) -> int:
    return len(slices(circuit))


def depth_dag(circuit: CnotCircuit) -> int:
    """Longest path, counted in gates, through the gate dependency DAG"""
    if not circuit.gates:
        return 0
    graph = nx.DiGraph()
    last_on_wire: Dict[int, int] = {}
    for index, gate in enumerate(circuit.gates):
        graph.add_node(index)
        for w in gate.wires:
            if w in last_on_wire:
                graph.add_edge(last_on_wire[w], index)
            last_on_wire[w] = index
    return nx.dag_longest_path_length(graph) + 1


def depth(circuit: CnotCircuit) -> int:
    """Circuit depth (slice algorithm)"""
    return depth_slices(circuit)


def simulate(circuit: CnotCircuit) -> BitMatrix:
    """
    Operator of a CNOT circuit

    CNOT(control=j, target=i) adds row j into row i, so the result is the
    product of the gate matrices with the first gate rightmost.

    Raises:
        NonLinearGateError: circuit holds a non-CNOT gate
    """
    _require_linear(circuit, "simulate")
    operator = BitMatrix.identity(circuit.n_wires)
    words = operator.words
    for gate in circuit.gates:
        words[gate.target] ^= words[gate.control]
    return operator


def _random_cnot(n: int, rng: np.random.Generator) -> Gate:
    control = int(rng.integers(n))
    target = int(rng.integers(n - 1))
    if target >= control:
        target += 1
    return Gate.cnot(control, target)


def random_circuit(n: int, target_depth: int, seed: Seed) -> CnotCircuit:
    """Append uniformly random CNOTs until the depth is exactly target_depth"""
    if n < 2:
        raise ValueError("random circuits need at least two wires")
    if target_depth < 0:
        raise ValueError("target depth must be non-negative")
    rng = np.random.default_rng(seed)
    tracker = DepthTracker(n)
    gates = []
    while tracker.depth < target_depth:
        gate = _random_cnot(n, rng)
        tracker.add(gate.wires)
        gates.append(gate)
    return CnotCircuit(n_wires=n, gates=gates)


def random_worst_operator(n: int, seed: Seed) -> BitMatrix:
    """Operator of n^2 uniformly random CNOTs"""
    if n < 2:
        raise ValueError("random operators need at least two wires")
    rng = np.random.default_rng(seed)
    gates = [_random_cnot(n, rng) for _ in range(n * n)]
    return simulate(CnotCircuit(n_wires=n, gates=gates))


def invert_circuit(circuit: CnotCircuit) -> CnotCircuit:
    _require_linear(circuit, "invert_circuit")
    return CnotCircuit(n_wires=circuit.n_wires, gates=list(reversed(circuit.gates)))


def relabel_circuit(circuit: CnotCircuit, permutation: Union[Permutation, Sequence[int]]) -> CnotCircuit:
    """Send every wire w to permutation[w]"""
    image = permutation.image if isinstance(permutation, Permutation) else tuple(permutation)
    return CnotCircuit(n_wires=circuit.n_wires, gates=[g.relabel(image) for g in circuit.gates])


def split_cnot_chunks(circuit: CnotCircuit) -> List[Segment]:
    """Maximal CNOT runs separated by single non-CNOT barriers"""
    segments: List[Segment] = []
    run: List[Gate] = []
    for gate in circuit.gates:
        if gate.is_cnot:
            run.append(gate)
            continue
        if run:
            segments.append(CnotChunk(circuit=CnotCircuit(n_wires=circuit.n_wires, gates=run)))
            run = []
        segments.append(Barrier(gate=gate))
    if run:
        segments.append(CnotChunk(circuit=CnotCircuit(n_wires=circuit.n_wires, gates=run)))
    return segments


def join_segments(n_wires: int, segments: Sequence[Segment]) -> CnotCircuit:
    gates: List[Gate] = []
    for segment in segments:
        if isinstance(segment, CnotChunk):
            gates.extend(segment.circuit.gates)
        else:
            gates.append(segment.gate)
    return CnotCircuit(n_wires=n_wires, gates=gates)


def make_result(circuit: CnotCircuit, permutation: Permutation, method: str,
                stats: Optional[dict] = None) -> SynthesisResult:
    return SynthesisResult(
        circuit=circuit,
        out_permutation=permutation,
        method=method,
        depth=depth_slices(circuit),
        cnot_count=circuit.cnot_count,
        stats=stats or {},
    )


def result_from_reduction(n: int, recorded: Sequence[Tuple[int, int]], residual: BitMatrix,
                          method: str, stats: Optional[dict] = None) -> SynthesisResult:
    """
    Assemble the output of a row-reduction synthesizer

    Args:
        n: number of wires
        recorded: (control, target) of every row operation, in the order applied to A
        residual: permutation matrix the reduction ended on
        method: method tag

    Returns:
        SynthesisResult whose permuted simulation equals A
    """
    permutation = Permutation.from_matrix(residual)
    gates = [Gate.cnot(c, t) for c, t in reversed(recorded)]
    circuit = relabel_circuit(CnotCircuit(n_wires=n, gates=gates), permutation)
    return make_result(circuit, permutation, method, stats)


def implemented_operator(result: SynthesisResult) -> BitMatrix:
    """out_permutation · simulate(circuit)"""
    return result.out_permutation.apply_rows(simulate(result.circuit))


def verify_result(result: SynthesisResult, target: BitMatrix) -> bool:
    return implemented_operator(result) == target


def t_count(circuit: CnotCircuit) -> int:
    return sum(1 for g in circuit.gates if g.is_t)


def t_depth(circuit: CnotCircuit) -> int:
    """
    Largest number of T/T* gates on any dependency path

    Dependencies follow the parity trace: a non-CNOT gate depends on every
    earlier one whose output variable occurs in the parity it reads. The
    value only depends on the barrier sequence and its input parities, so
    any rewrite with the same parity trace has the same T-depth.
    """
    parities = [1 << w for w in range(circuit.n_wires)]
    levels = [0] * circuit.n_wires
    best = 0
    for gate in circuit.gates:
        if gate.is_cnot:
            parities[gate.target] ^= parities[gate.control]
            continue
        level = 0
        for w in gate.wires:
            bits = parities[w]
            while bits:
                low = bits & -bits
                level = max(level, levels[low.bit_length() - 1])
                bits ^= low
        level += 1 if gate.is_t else 0
        for w in gate.wires:
            parities[w] = 1 << len(levels)
            levels.append(level)
        best = max(best, level)
    return best


def metrics(circuit: CnotCircuit) -> CircuitMetrics:
    return CircuitMetrics(
        depth=depth_slices(circuit),
        cnot_count=circuit.cnot_count,
        t_count=t_count(circuit),
        t_depth=t_depth(circuit),
    )


def parity_trace(circuit: CnotCircuit) -> Tuple[List[Tuple[str, Tuple[int, ...]]], Tuple[int, ...]]:
    """
    Linear+barrier semantics of a circuit

    Wire i starts with the parity of variable i. CNOTs XOR parities; every
    other gate consumes the parities on its wires and replaces them with
    fresh variables, numbered by barrier order.

    Returns:
        (per-barrier (name, input parities), final parity of every wire)
    """
    parities = [1 << w for w in range(circuit.n_wires)]
    fresh = circuit.n_wires
    barriers = []
    for gate in circuit.gates:
        if gate.is_cnot:
            parities[gate.target] ^= parities[gate.control]
            continue
        barriers.append((gate.name, tuple(parities[w] for w in gate.wires)))
        for w in gate.wires:
            parities[w] = 1 << fresh
            fresh += 1
    return barriers, tuple(parities)


def linear_barrier_equivalent(original: CnotCircuit, rewritten: CnotCircuit,
                              out_permutation: Optional[Sequence[int]] = None) -> bool:
    """
    True when `rewritten` followed by the wire relabeling matches `original`

    out_permutation[w] is the wire of `rewritten` that carries original wire w.
    """
    if original.n_wires != rewritten.n_wires:
        return False
    mapping = list(out_permutation) if out_permutation is not None else list(range(original.n_wires))
    before_barriers, before_final = parity_trace(original)
    after_barriers, after_final = parity_trace(rewritten)
    if len(before_barriers) != len(after_barriers):
        return False
    for (name_a, inputs_a), (name_b, inputs_b) in zip(before_barriers, after_barriers):
        if name_a != name_b or inputs_a != inputs_b:
            return False
    return all(before_final[w] == after_final[mapping[w]] for w in range(original.n_wires))
