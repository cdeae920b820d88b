"""
DaCSynth: divide-and-conquer CNOT synthesis

The operator is split around an invertible top-left block; the off-diagonal
blocks are cleared by zeroing the matrices B = A3·A1^-1 and A2'·A4'^-1 with
parallel layers of row, column and flip operations, then both diagonal
blocks are solved recursively on disjoint wires.
"""
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from src.core.circuit import result_from_reduction
from src.core.exceptions import SingularMatrixError
from src.core.gf2core import BitMatrix, invert, is_invertible, multiply, select_invertible_top_block
from src.core.matching import (
    BipartiteGraph,
    WeightedGraph,
    edge_color_bipartite,
    max_bipartite_matching,
    max_weight_matching,
)
from src.models.schemas import Layer, OpKind, OpRecord, SynthesisResult
from src.synthesizers.bruteforce import BlockTables, get_block_tables

STRATEGIES = ("greedy", "tiled")
INVALID = np.iinfo(np.int64).min // 4


def apply_layers(matrix: BitMatrix, layers: Sequence[Layer]) -> BitMatrix:
    """Replay layers on a copy of `matrix`"""
    out = matrix.copy()
    for layer in layers:
        for op in layer.ops:
            if op.kind is OpKind.ROW:
                out.row_add(op.a, op.b)
            elif op.kind is OpKind.COL:
                out.col_add(op.a, op.b)
            else:
                out.flip(op.a, op.b)
    return out


def max_degree(matrix: BitMatrix) -> int:
    return BipartiteGraph(adjacency=matrix).max_degree()


def flip_layers(matrix: BitMatrix) -> List[Layer]:
    """One layer of flips per color of a minimal edge coloring of the ones of B"""
    colors = edge_color_bipartite(BipartiteGraph(adjacency=matrix))
    return [Layer(ops=[OpRecord.flip(i, j) for i, j in m.pairs]) for m in colors]


# -- greedy zeroing ---------------------------------------------------------

class _GainTracker:
    """
    Dense copy of B with its row and column Gram matrices

    Row op i->j (row j ^= row i) gains 2·G[i,j] - w[i] ones; column ops are
    symmetric with the column Gram matrix.
    """

    def __init__(self, matrix: np.ndarray):
        self.b = matrix.astype(np.int64)
        self.row_gram = self.b @ self.b.T
        self.col_gram = self.b.T @ self.b
        self.w = self.b.sum(axis=1)
        self.cw = self.b.sum(axis=0)

    @property
    def ones(self) -> int:
        return int(self.w.sum())

    def row_gains(self) -> np.ndarray:
        gains = 2 * self.row_gram - self.w[:, None]
        np.fill_diagonal(gains, INVALID)
        return gains

    def col_gains(self) -> np.ndarray:
        gains = 2 * self.col_gram - self.cw[:, None]
        np.fill_diagonal(gains, INVALID)
        return gains

    def _replace_row(self, j: int, new: np.ndarray) -> None:
        old = self.b[j].copy()
        self.b[j] = new
        products = self.b @ new
        self.row_gram[j, :] = products
        self.row_gram[:, j] = products
        self.col_gram += np.outer(new, new) - np.outer(old, old)
        self.w[j] = new.sum()
        self.cw += new - old

    def _replace_col(self, j: int, new: np.ndarray) -> None:
        old = self.b[:, j].copy()
        self.b[:, j] = new
        products = self.b.T @ new
        self.col_gram[j, :] = products
        self.col_gram[:, j] = products
        self.row_gram += np.outer(new, new) - np.outer(old, old)
        self.cw[j] = new.sum()
        self.w += new - old

    def apply(self, op: OpRecord) -> None:
        if op.kind is OpKind.ROW:
            self._replace_row(op.b, self.b[op.b] ^ self.b[op.a])
        elif op.kind is OpKind.COL:
            self._replace_col(op.b, self.b[:, op.b] ^ self.b[:, op.a])
        else:
            row = self.b[op.a].copy()
            row[op.b] ^= 1
            self._replace_row(op.a, row)


def _best_move(tracker: _GainTracker, busy_rows: set, busy_cols: set) -> Tuple[int, Optional[OpRecord]]:
    """Highest-gain row or column move on free indices; rows win ties, then lowest indices"""
    best_gain, best_op = INVALID, None
    row_gains = tracker.row_gains()
    if busy_rows:
        idx = sorted(busy_rows)
        row_gains[idx, :] = INVALID
        row_gains[:, idx] = INVALID
    if row_gains.size:
        flat = int(np.argmax(row_gains))
        i, j = divmod(flat, row_gains.shape[1])
        if row_gains[i, j] > INVALID:
            best_gain, best_op = int(row_gains[i, j]), OpRecord.row(i, j)
    col_gains = tracker.col_gains()
    if busy_cols:
        idx = sorted(busy_cols)
        col_gains[idx, :] = INVALID
        col_gains[:, idx] = INVALID
    if col_gains.size:
        flat = int(np.argmax(col_gains))
        i, j = divmod(flat, col_gains.shape[1])
        if col_gains[i, j] > best_gain:
            best_gain, best_op = int(col_gains[i, j]), OpRecord.col(i, j)
    return best_gain, best_op


def _matching_moves(gains: np.ndarray, kind: OpKind) -> List[OpRecord]:
    """Best single-kind layer: maximum-weight matching over merged directed gains"""
    size = gains.shape[0]
    weights = {(i, j): int(gains[i, j]) for i in range(size) for j in range(size)
               if i != j and gains[i, j] > 0}
    if not weights:
        return []
    graph = WeightedGraph.from_directed(size, weights)
    matching = max_weight_matching(graph)
    moves = []
    for u, v in matching.pairs:
        src, tgt = graph.payloads[(u, v)]
        moves.append(OpRecord.row(src, tgt) if kind is OpKind.ROW else OpRecord.col(src, tgt))
    return moves


def _complete_with_flips(tracker: _GainTracker, ops: List[OpRecord], busy_rows: set, busy_cols: set) -> None:
    """Add a maximum set of flips on rows and columns left free by the layer"""
    free_rows = [i for i in range(tracker.b.shape[0]) if i not in busy_rows]
    free_cols = [j for j in range(tracker.b.shape[1]) if j not in busy_cols]
    if not free_rows or not free_cols:
        return
    sub = tracker.b[np.ix_(free_rows, free_cols)]
    if not sub.any():
        return
    matching = max_bipartite_matching(BipartiteGraph(adjacency=BitMatrix.from_array(sub.astype(np.uint8))))
    for a, c in matching.pairs:
        op = OpRecord.flip(free_rows[a], free_cols[c])
        tracker.apply(op)
        ops.append(op)


def _play(start: np.ndarray, moves: Sequence[OpRecord]) -> Tuple[_GainTracker, List[OpRecord], set, set]:
    tracker = _GainTracker(start)
    busy_rows, busy_cols = set(), set()
    for op in moves:
        tracker.apply(op)
        if op.kind is OpKind.ROW:
            busy_rows.update((op.a, op.b))
        else:
            busy_cols.update((op.a, op.b))
    return tracker, list(moves), busy_rows, busy_cols


def zero_matrix_greedy(matrix: BitMatrix) -> List[Layer]:
    """
    Layers of row, column and flip operations that turn B into zero

    Each layer starts from the best single move, keeps adding the best
    compatible move while it removes ones, is swapped for the optimal
    row-only or column-only layer when that removes more, and is completed
    with flips on the untouched rows and columns. Once no move removes any
    ones, the remaining entries are cleared with flip layers.
    """
    layers: List[Layer] = []
    current = matrix.to_array().astype(np.int64)
    while current.any():
        tracker = _GainTracker(current)
        gain, op = _best_move(tracker, set(), set())
        if op is None or gain <= 0:
            layers.extend(flip_layers(BitMatrix.from_array(current.astype(np.uint8))))
            break

        start = current.copy()
        row_gains, col_gains = tracker.row_gains(), tracker.col_gains()
        moves: List[OpRecord] = []
        busy_rows, busy_cols = set(), set()
        while op is not None and gain > 0:
            tracker.apply(op)
            moves.append(op)
            if op.kind is OpKind.ROW:
                busy_rows.update((op.a, op.b))
            else:
                busy_cols.update((op.a, op.b))
            gain, op = _best_move(tracker, busy_rows, busy_cols)
        chosen = (tracker, moves, busy_rows, busy_cols)

        for kind, gains in ((OpKind.ROW, row_gains), (OpKind.COL, col_gains)):
            single = _matching_moves(gains, kind)
            if not single:
                continue
            candidate = _play(start, single)
            if candidate[0].ones < chosen[0].ones:
                chosen = candidate

        tracker, ops, busy_rows, busy_cols = chosen
        _complete_with_flips(tracker, ops, busy_rows, busy_cols)
        layers.append(Layer(ops=ops))
        current = tracker.b
    return layers


# -- tiled zeroing ----------------------------------------------------------

def zero_matrix_tiled(matrix: BitMatrix, k: int, tables: Optional[BlockTables] = None) -> List[Layer]:
    """
    Zero B tile by tile with table-optimal reductions

    Nonzero k×k tiles (edge tiles are smaller) form a bipartite graph over
    block rows and block columns; each color class of its edge coloring is
    handled in parallel: the tiles' optimal layers are merged step by step,
    then one flip layer clears the partial permutations left behind.

    Raises:
        MissingTableError: no table for a tile shape
    """
    tables = tables or get_block_tables(k)
    n_rows, n_cols = matrix.shape
    row_blocks = [list(range(s, min(s + k, n_rows))) for s in range(0, n_rows, k)]
    col_blocks = [list(range(s, min(s + k, n_cols))) for s in range(0, n_cols, k)]
    work = matrix.copy()
    occupied = np.zeros((len(row_blocks), len(col_blocks)), dtype=np.uint8)
    for bi, rows in enumerate(row_blocks):
        for bj, cols in enumerate(col_blocks):
            occupied[bi, bj] = 0 if work.submatrix(rows, cols).is_zero() else 1
    if not occupied.any():
        return []

    layers: List[Layer] = []
    for color in edge_color_bipartite(BipartiteGraph(adjacency=BitMatrix.from_array(occupied))):
        merged: List[List[OpRecord]] = []
        for bi, bj in color.pairs:
            rows, cols = row_blocks[bi], col_blocks[bj]
            witness = tables.witness(work.submatrix(rows, cols))
            for step, (row_moves, col_moves) in enumerate(witness):
                if step == len(merged):
                    merged.append([])
                merged[step].extend(OpRecord.row(rows[s], rows[t]) for s, t in row_moves)
                merged[step].extend(OpRecord.col(cols[s], cols[t]) for s, t in col_moves)
        for ops in merged:
            layer = Layer(ops=ops)
            work = apply_layers(work, [layer])
            layers.append(layer)
        flips = []
        for bi, bj in color.pairs:
            for r in row_blocks[bi]:
                for c in col_blocks[bj]:
                    if work[r, c]:
                        flips.append(OpRecord.flip(r, c))
        if flips:
            layer = Layer(ops=flips)
            work = apply_layers(work, [layer])
            layers.append(layer)
    return layers


# -- recursion --------------------------------------------------------------

def emit_gates(layers: Sequence[Layer], target: Sequence[int], basis: Sequence[int]) -> List[Tuple[int, int]]:
    """
    Translate zeroing layers into (control, target) row operations on A

    B rows index the `target` wires and B columns index the `basis` wires.
    """
    gates = []
    for layer in layers:
        for op in layer.ops:
            if op.kind is OpKind.ROW:
                gates.append((target[op.a], target[op.b]))
            elif op.kind is OpKind.COL:
                gates.append((basis[op.b], basis[op.a]))
            else:
                gates.append((basis[op.b], target[op.a]))
    return gates


class _Reduction:
    """Working matrix plus the row operations applied to it"""

    def __init__(self, matrix: BitMatrix, strategy: str, k: Optional[int], tables: Optional[BlockTables]):
        self.work = matrix.copy()
        self.strategy = strategy
        self.k = k
        self.tables = tables
        self.recorded: List[Tuple[int, int]] = []
        self.zeroings = 0
        self.flip_fallbacks = 0
        self.layers = 0

    def _zero(self, b: BitMatrix) -> List[Layer]:
        if self.strategy == "tiled":
            layers = zero_matrix_tiled(b, self.k, self.tables)
        else:
            layers = zero_matrix_greedy(b)
        if len(layers) > max_degree(b):
            self.flip_fallbacks += 1
            layers = flip_layers(b)
        return layers

    def clear(self, basis_rows: List[int], basis_cols: List[int], target_rows: List[int]) -> None:
        """Zero work[target_rows, basis_cols] using the invertible block work[basis_rows, basis_cols]"""
        if not target_rows or not basis_cols:
            return
        b = multiply(self.work.submatrix(target_rows, basis_cols),
                     invert(self.work.submatrix(basis_rows, basis_cols)))
        if b.is_zero():
            return
        layers = self._zero(b)
        self.zeroings += 1
        self.layers += len(layers)
        for control, target in emit_gates(layers, target_rows, basis_rows):
            self.work.row_add(control, target)
            self.recorded.append((control, target))

    def solve(self, rows: List[int], cols: List[int]) -> None:
        if len(rows) <= 1:
            return
        order = select_invertible_top_block(self.work.submatrix(rows, cols))
        half = (len(rows) + 1) // 2
        top = [rows[i] for i in order.image[:half]]
        rest = [rows[i] for i in order.image[half:]]
        left, right = cols[:half], cols[half:]
        self.clear(top, left, rest)
        self.clear(rest, right, top)
        self.solve(top, left)
        self.solve(rest, right)


def depth_bound(n: int, strategy: str = "greedy", k: Optional[int] = None, table_depth: int = 0) -> int:
    """Worst-case depth guarantee for the chosen strategy"""
    log_term = math.ceil(math.log2(n)) if n > 1 else 0
    if strategy == "tiled" and k:
        cost = table_depth + 1
        return math.ceil(2 * cost * n / k) + 2 * cost * log_term
    return 2 * n + 2 * log_term


def method_tag(strategy: str = "greedy", k: Optional[int] = None) -> str:
    return "dacsynth" if strategy == "greedy" else f"dacsynth:tiled{k}"


def dacsynth(matrix: BitMatrix, strategy: str = "greedy", k: Optional[int] = None,
             tables: Optional[BlockTables] = None) -> SynthesisResult:
    """
    Synthesize a CNOT circuit for an invertible operator

    Args:
        matrix: square invertible A
        strategy: "greedy" or "tiled"
        k: tile size for the tiled strategy (1..4 with the shipped tables)
        tables: block tables, defaults to the shared cache for k

    Returns:
        SynthesisResult with out_permutation·simulate(circuit) == A

    Raises:
        SingularMatrixError: A is not invertible
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown DaCSynth strategy: {strategy}")
    if strategy == "tiled":
        if k is None:
            raise ValueError("the tiled strategy needs a block size k")
        tables = tables or get_block_tables(k)
    if not is_invertible(matrix):
        raise SingularMatrixError()
    n = matrix.n_rows
    reduction = _Reduction(matrix, strategy, k, tables)
    reduction.solve(list(range(n)), list(range(n)))
    stats = {
        "zeroings": reduction.zeroings,
        "layers": reduction.layers,
        "flip_fallbacks": reduction.flip_fallbacks,
        "depth_bound": depth_bound(n, strategy, k, tables.depth_bound if tables else 0),
    }
    result = result_from_reduction(n, reduction.recorded, reduction.work, method_tag(strategy, k), stats)
    logger.debug(f"{result.method} n={n}: depth {result.depth}, {result.cnot_count} CNOTs, "
                 f"{reduction.flip_fallbacks} flip fallbacks")
    return result


class DaCSynthesizer:
    """
    Divide-and-conquer synthesizer

    Responsibilities:
    - Split the operator around an invertible top-left block
    - Clear both off-diagonal blocks with parallel zeroing layers
    - Recurse on the diagonal blocks (disjoint wires, so their depths overlap)
    """

    def __init__(self, strategy: str = "greedy", k: Optional[int] = None,
                 tables: Optional[BlockTables] = None):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown DaCSynth strategy: {strategy}")
        self.strategy = strategy
        self.k = k
        self.tables = tables
        self.method = method_tag(strategy, k)
        self.runs = 0
        self.total_depth = 0
        self.total_cnots = 0
        self.flip_fallbacks = 0

    @classmethod
    def from_tag(cls, tag: str) -> "DaCSynthesizer":
        if tag == "dacsynth":
            return cls()
        if tag.startswith("dacsynth:tiled"):
            return cls("tiled", int(tag[len("dacsynth:tiled"):]))
        raise ValueError(f"not a DaCSynth method tag: {tag}")

    def process(self, matrix: BitMatrix) -> SynthesisResult:
        result = dacsynth(matrix, self.strategy, self.k, self.tables)
        self.runs += 1
        self.total_depth += result.depth
        self.total_cnots += result.cnot_count
        self.flip_fallbacks += result.stats.get("flip_fallbacks", 0)
        return result

    def get_stats(self) -> Dict[str, object]:
        return {
            "method": self.method,
            "runs": self.runs,
            "mean_depth": self.total_depth / self.runs if self.runs else 0,
            "mean_cnots": self.total_cnots / self.runs if self.runs else 0,
            "flip_fallbacks": self.flip_fallbacks,
        }
