"""
Synthesis with ancilla wires carrying parities

Given parity tables A_in and A_out (p wires × n variables, rank n), build a
p-wire CNOT circuit B with B·A_in = A_out. Both tables are first prepared
so that every block of n rows is invertible; the blocks are then mapped onto
each other independently, which keeps the depth logarithmic in p/n.
"""
import math
from typing import Callable, Dict, List, Optional, Tuple

from loguru import logger

from src.core.circuit import depth_slices, invert_circuit, make_result, relabel_circuit, simulate
from src.core.exceptions import RankDeficientError, ShapeMismatchError, VerificationError
from src.core.gf2core import (
    BitMatrix,
    Permutation,
    XorBasis,
    decompose_in_basis,
    hstack,
    invert,
    multiply,
    rank,
    select_rows_by_rank,
    vstack,
)
from src.models.schemas import CnotCircuit, Gate, SynthesisResult
from src.synthesizers.dacsynth import dacsynth

Synthesizer = Callable[[BitMatrix], SynthesisResult]
Block = Tuple[int, int]


def default_input_table(n: int, p: int) -> BitMatrix:
    """[I_n; 0]: fresh ancillas hold no parity"""
    if p < n:
        raise ShapeMismatchError(f"need at least {n} wires for {n} variables, got {p}")
    if p == n:
        return BitMatrix.identity(n)
    return vstack([BitMatrix.identity(n), BitMatrix.zeros(p - n, n)])


def block_boundaries(p: int, n: int) -> List[Block]:
    """First block holds n + (p mod n) rows, the others n rows each"""
    k, r = divmod(p, n)
    bounds = [(0, n + r)]
    for i in range(1, k):
        start = n + r + (i - 1) * n
        bounds.append((start, start + n))
    return bounds


def find_partial_permutation(target: BitMatrix, source: BitMatrix) -> Dict[int, int]:
    """
    Rows of `source` to add into rows of `target` so the sum becomes invertible

    A row basis of `target` is extended with source rows; each chosen source
    row is added into a target row outside that basis.

    Returns:
        {target row: source row}, injective
    """
    if target.shape != source.shape or not target.is_square:
        raise ShapeMismatchError("partial permutation needs two square matrices of the same size")
    basis = XorBasis()
    spare = []
    for i, value in enumerate(target.row_ints()):
        if not basis.add(value):
            spare.append(i)
    chosen = []
    for j, value in enumerate(source.row_ints()):
        if len(chosen) == len(spare):
            break
        if basis.add(value):
            chosen.append(j)
    if len(chosen) < len(spare):
        raise RankDeficientError("source rows do not complete the target to a basis")
    return dict(zip(spare, chosen))


def make_blocks_invertible(table: BitMatrix) -> Tuple[CnotCircuit, Permutation, List[Block]]:
    """
    Prepare a parity table so every block is invertible

    Rows are reordered so the top n are independent (recorded as a
    permutation: virtual row v is physical wire image[v]); then in each
    doubling round every fixed block repairs one unfixed block with a single
    layer of CNOTs.

    Returns:
        (prep circuit on physical wires, row permutation, virtual block bounds)

    Raises:
        RankDeficientError: rank of the table below n
    """
    p, n = table.shape
    if p < n:
        raise ShapeMismatchError(f"table has {p} rows for {n} variables")
    if rank(table) < n:
        raise RankDeficientError(f"parity table has rank below {n}")
    top = select_rows_by_rank(table, n)
    chosen = set(top)
    order = Permutation(top + [i for i in range(p) if i not in chosen])
    work = order.apply_rows(table)
    bounds = block_boundaries(p, n)

    gates: List[Gate] = []
    fixed = [0]
    pending = list(range(1, len(bounds)))
    while pending:
        round_targets, pending = pending[:len(fixed)], pending[len(fixed):]
        for source_block, target_block in zip(fixed, round_targets):
            src_start = bounds[source_block][0]
            tgt_start, tgt_end = bounds[target_block]
            source_rows = list(range(src_start, src_start + n))
            target_rows = list(range(tgt_start, tgt_end))
            sigma = find_partial_permutation(work.submatrix(target_rows, list(range(n))),
                                             work.submatrix(source_rows, list(range(n))))
            for t, s in sorted(sigma.items()):
                work.row_add(source_rows[s], target_rows[t])
                gates.append(Gate.cnot(source_rows[s], target_rows[t]))
        fixed.extend(round_targets)

    prep = relabel_circuit(CnotCircuit(n_wires=p, gates=gates), order)
    limit = math.ceil(math.log2(len(bounds))) if len(bounds) > 1 else 0
    if depth_slices(prep) > limit:
        raise VerificationError(f"preparation depth {depth_slices(prep)} exceeds {limit}")
    return prep, order, bounds


def _check_table(table: BitMatrix, name: str) -> None:
    p, n = table.shape
    if p < n:
        raise ShapeMismatchError(f"{name} has {p} rows for {n} variables")
    if rank(table) < n:
        raise RankDeficientError(f"{name} has rank below {n}")


def transition_blocks(prepared_in: BitMatrix, prepared_out: BitMatrix, bounds: List[Block]) -> List[BitMatrix]:
    """
    Blocks D_i with D_i·K_i = H_i

    The first block keeps the top n rows as its basis:
    D_1 = [[H_top·K_top^-1, 0], [G, I_r]] with G·K_top = K_bottom + H_bottom.
    """
    n = prepared_in.n_cols
    cols = list(range(n))
    blocks = []
    for index, (start, end) in enumerate(bounds):
        k_block = prepared_in.submatrix(list(range(start, end)), cols)
        h_block = prepared_out.submatrix(list(range(start, end)), cols)
        if index > 0:
            blocks.append(multiply(h_block, invert(k_block)))
            continue
        top = list(range(n))
        k_top, h_top = k_block.submatrix(top, cols), h_block.submatrix(top, cols)
        head = multiply(h_top, invert(k_top))
        r = end - start - n
        if r == 0:
            blocks.append(head)
            continue
        upper = hstack([head, BitMatrix.zeros(n, r)])
        bottom = list(range(n, end - start))
        residue = BitMatrix(r, n, k_block.submatrix(bottom, cols).words ^ h_block.submatrix(bottom, cols).words)
        g = decompose_in_basis(k_top, residue)
        blocks.append(vstack([upper, hstack([g, BitMatrix.identity(r)])]))
    return blocks


def ancilla_synth(table_in: BitMatrix, table_out: BitMatrix,
                  inner: Optional[Synthesizer] = None) -> SynthesisResult:
    """
    Block method: circuit B over p wires with out_permutation·simulate(B)·A_in = A_out

    Args:
        table_in: A_in, p×n of rank n
        table_out: A_out, p×n of rank n
        inner: square synthesizer for the diagonal blocks (DaCSynth by default)

    Raises:
        ShapeMismatchError: tables of different shapes
        RankDeficientError: a table of rank below n
    """
    inner = inner or dacsynth
    if table_in.shape != table_out.shape:
        raise ShapeMismatchError(f"A_in is {table_in.shape}, A_out is {table_out.shape}")
    _check_table(table_in, "A_in")
    _check_table(table_out, "A_out")
    p = table_in.n_rows

    prep_in, order_in, bounds = make_blocks_invertible(table_in)
    prep_out, order_out, _ = make_blocks_invertible(table_out)
    prepared_in = order_in.apply_rows(multiply(simulate(prep_in), table_in))
    prepared_out = order_out.apply_rows(multiply(simulate(prep_out), table_out))

    block_gates: List[Gate] = []
    block_image = list(range(p))
    block_depths = []
    for (start, end), operator in zip(bounds, transition_blocks(prepared_in, prepared_out, bounds)):
        result = inner(operator)
        offset = list(range(start, end))
        for gate in result.circuit.gates:
            block_gates.append(gate.relabel(offset))
        for i, x in enumerate(result.out_permutation.image):
            block_image[start + i] = start + x
        block_depths.append(result.depth)
    for gate in block_gates:
        if not any(s <= min(gate.wires) and max(gate.wires) < e for s, e in bounds):
            raise VerificationError(f"{gate} crosses a block boundary")

    block_perm = Permutation(block_image)
    out_perm = order_out.inverse() @ block_perm @ order_in
    transition = relabel_circuit(CnotCircuit(n_wires=p, gates=block_gates), order_in)
    unprep = relabel_circuit(invert_circuit(prep_out), out_perm)
    circuit = prep_in + transition + unprep
    stats = {
        "blocks": len(bounds),
        "prep_depths": [depth_slices(prep_in), depth_slices(prep_out)],
        "block_depths": block_depths,
    }
    result = make_result(circuit, out_perm, "ancilla-block", stats)
    if multiply(out_perm.apply_rows(simulate(circuit)), table_in) != table_out:
        raise VerificationError("ancilla-block circuit does not map A_in to A_out")
    logger.debug(f"ancilla-block p={p}: depth {result.depth} over {len(bounds)} blocks")
    return result


def ancilla_direct(operator: BitMatrix, table_in: BitMatrix, table_out: BitMatrix,
                   inner: Optional[Synthesizer] = None) -> SynthesisResult:
    """
    Direct method: synthesize a given p×p operator after checking operator·A_in = A_out

    Raises:
        ShapeMismatchError: operator does not fit the tables
        VerificationError: operator does not map A_in to A_out
    """
    inner = inner or dacsynth
    if not operator.is_square or operator.n_rows != table_in.n_rows or table_in.shape != table_out.shape:
        raise ShapeMismatchError("operator and parity tables do not fit together")
    if multiply(operator, table_in) != table_out:
        raise VerificationError("operator does not map A_in to A_out")
    result = inner(operator)
    return result.model_copy(update={"method": "ancilla-direct"})


class AncillaSynthesizer:
    """
    Parity-table synthesizer

    Responsibilities:
    - Run the block method, and the direct method when an operator is known
    - Keep the shallower result (fewer CNOTs on ties)
    - Count how often each method wins
    """

    def __init__(self, inner: Optional[Synthesizer] = None):
        self.inner = inner or dacsynth
        self.runs = 0
        self.wins = {"ancilla-block": 0, "ancilla-direct": 0}

    def process(self, table_in: BitMatrix, table_out: BitMatrix,
                operator: Optional[BitMatrix] = None) -> SynthesisResult:
        candidates = [ancilla_synth(table_in, table_out, self.inner)]
        if operator is not None:
            candidates.append(ancilla_direct(operator, table_in, table_out, self.inner))
        best = min(candidates, key=lambda r: (r.depth, r.cnot_count))
        self.runs += 1
        self.wins[best.method] += 1
        return best

    def get_stats(self) -> dict:
        return {"runs": self.runs, "wins": dict(self.wins)}
