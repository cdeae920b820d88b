"""
Cost-guided greedy synthesis

Row operations (left side) and column operations (right side) are applied
to a working copy of A, always taking the compatible operation that lowers
the cost most, until A becomes a permutation matrix.
"""
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from loguru import logger

from src.core.circuit import make_result, relabel_circuit
from src.core.exceptions import SingularMatrixError, UnsupportedSizeError
from src.core.gf2core import BitMatrix, Permutation, invert, is_invertible, lu_decompose
from src.models.schemas import CnotCircuit, CostKind, Gate, GreedyConfig, SynthesisFailure, SynthesisResult
from src.utils.config import get_settings

PRODUCT_TOLERANCE = 1e-9

GreedyOutcome = Union[SynthesisResult, SynthesisFailure]


def _single_cost(dense: np.ndarray, product: bool) -> float:
    if product:
        return float(np.log2(dense.sum(axis=1)).sum())
    return float(dense.sum())


def cost(matrix: BitMatrix, kind: CostKind) -> float:
    """
    Value of a greedy cost function; every kind is minimal on permutation matrices

    Raises:
        SingularMatrixError: inverse-based kinds on a singular matrix
    """
    kind = CostKind(kind)
    dense = matrix.to_array().astype(np.float64)
    if kind.is_product and (dense.sum(axis=1) == 0).any():
        raise SingularMatrixError("a zero row has no logarithmic cost")
    value = _single_cost(dense, kind.is_product)
    if kind.uses_inverse:
        value += _single_cost(invert(matrix).to_array().astype(np.float64), kind.is_product)
    return value


def _deltas(x: np.ndarray, product: bool) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cost change of every row op and every column op on x

    drow[a, b]: row b ^= row a; dcol[a, b]: col b ^= col a.
    """
    w = x.sum(axis=1)
    row_gram = x @ x.T
    col_gram = x.T @ x
    if not product:
        return w[:, None] - 2 * row_gram, x.sum(axis=0)[:, None] - 2 * col_gram
    log_w = np.log2(w)
    merged = w[:, None] + w[None, :] - 2 * row_gram
    drow = np.log2(np.maximum(merged, 1)) - log_w[None, :]
    up = np.log2(w + 1) - log_w
    down = np.where(w > 1, np.log2(np.maximum(w - 1, 1)) - log_w, 0.0)
    dcol = (x.T @ up)[:, None] + x.T @ ((down - up)[:, None] * x)
    return drow, dcol


class _Search:
    """Working matrix, its inverse, and the busy wires of the open layers"""

    def __init__(self, matrix: BitMatrix, config: GreedyConfig, max_resets: int):
        self.kind = config.cost
        self.rng = np.random.default_rng(config.seed)
        self.max_resets = max_resets
        self.work = matrix.to_array().astype(np.float64)
        self.inverse = invert(matrix).to_array().astype(np.float64) if self.kind.uses_inverse else None
        self.tolerance = PRODUCT_TOLERANCE if self.kind.is_product else 0.5
        self.busy_rows: set = set()
        self.busy_cols: set = set()
        self.row_ops: List[Tuple[int, int]] = []
        self.col_ops: List[Tuple[int, int]] = []
        self.ops: List[Tuple[str, int, int]] = []
        self.resets = 0
        self.cost_trace = [self.cost()]

    def cost(self) -> float:
        value = _single_cost(self.work, self.kind.is_product)
        if self.inverse is not None:
            value += _single_cost(self.inverse, self.kind.is_product)
        return value

    def done(self) -> bool:
        return bool((self.work.sum(axis=1) == 1).all() and (self.work.sum(axis=0) == 1).all())

    def _totals(self) -> Tuple[np.ndarray, np.ndarray]:
        row_total, col_total = _deltas(self.work, self.kind.is_product)
        if self.inverse is not None:
            inv_row, inv_col = _deltas(self.inverse, self.kind.is_product)
            row_total = row_total + inv_col.T
            col_total = col_total + inv_row.T
        for total, busy in ((row_total, self.busy_rows), (col_total, self.busy_cols)):
            np.fill_diagonal(total, np.inf)
            if busy:
                idx = sorted(busy)
                total[idx, :] = np.inf
                total[:, idx] = np.inf
        return row_total, col_total

    def pick(self) -> Optional[Tuple[str, int, int]]:
        """Best compatible cost-decreasing operation, random among ties"""
        row_total, col_total = self._totals()
        best = min(row_total.min(), col_total.min())
        if not best < -self.tolerance:
            return None
        limit = best + (PRODUCT_TOLERANCE if self.kind.is_product else 0)
        ties = [("row", int(a), int(b)) for a, b in zip(*np.nonzero(row_total <= limit))]
        ties += [("col", int(a), int(b)) for a, b in zip(*np.nonzero(col_total <= limit))]
        return ties[int(self.rng.integers(len(ties)))]

    def apply(self, side: str, src: int, tgt: int) -> None:
        self.ops.append((side, src, tgt))
        if side == "row":
            self.work[tgt] = np.abs(self.work[tgt] - self.work[src])
            if self.inverse is not None:
                self.inverse[:, src] = np.abs(self.inverse[:, src] - self.inverse[:, tgt])
            self.busy_rows.update((src, tgt))
            self.row_ops.append((src, tgt))
        else:
            self.work[:, tgt] = np.abs(self.work[:, tgt] - self.work[:, src])
            if self.inverse is not None:
                self.inverse[src] = np.abs(self.inverse[src] - self.inverse[tgt])
            self.busy_cols.update((src, tgt))
            self.col_ops.append((src, tgt))
        self.cost_trace.append(self.cost())

    def run(self) -> Optional[str]:
        """None on success, otherwise the reason for giving up"""
        while not self.done():
            choice = self.pick()
            if choice is not None:
                self.apply(*choice)
                continue
            if not self.busy_rows and not self.busy_cols:
                return "local minimum: no operation lowers the cost"
            self.busy_rows.clear()
            self.busy_cols.clear()
            self.resets += 1
            if self.resets > self.max_resets:
                return f"reset counter exceeded {self.max_resets}"
        return None

    def circuit(self) -> Tuple[CnotCircuit, Permutation]:
        n = self.work.shape[0]
        permutation = Permutation.from_matrix(BitMatrix.from_array(self.work.astype(np.uint8)))
        # column op (col t ^= col s) is the CNOT with control t and target s
        input_side = CnotCircuit(n_wires=n, gates=[Gate.cnot(t, s) for s, t in self.col_ops])
        output_side = CnotCircuit(n_wires=n, gates=[Gate.cnot(s, t) for s, t in reversed(self.row_ops)])
        return input_side + relabel_circuit(output_side, permutation), permutation


def method_tag(config: GreedyConfig) -> str:
    prefix = "lu+greedy" if config.use_lu else "greedy"
    return f"{prefix}:{config.cost.value}"


def greedy_synth(matrix: BitMatrix, config: Optional[GreedyConfig] = None) -> GreedyOutcome:
    """
    Greedy synthesis of an invertible operator

    Args:
        matrix: square invertible A
        config: cost kind, seed and reset budget (None -> settings factor · n)

    Returns:
        SynthesisResult, or SynthesisFailure when the reset budget runs out

    Raises:
        SingularMatrixError: A is not invertible
    """
    config = config or GreedyConfig()
    if not is_invertible(matrix):
        raise SingularMatrixError()
    n = matrix.n_rows
    max_resets = config.max_resets or get_settings().max_resets_factor * n
    tag = f"greedy:{config.cost.value}"
    search = _Search(matrix, config, max_resets)
    reason = search.run()
    operations = len(search.row_ops) + len(search.col_ops)
    if reason is not None:
        logger.debug(f"{tag} n={n} gave up after {operations} operations: {reason}")
        return SynthesisFailure(method=tag, reason=reason, resets=search.resets,
                                operations=operations, cost_trace=search.cost_trace)
    circuit, permutation = search.circuit()
    stats = {"resets": search.resets, "operations": operations, "cost_trace": search.cost_trace}
    return make_result(circuit, permutation, tag, stats)


def lu_greedy_synth(matrix: BitMatrix, config: Optional[GreedyConfig] = None) -> GreedyOutcome:
    """
    Greedy synthesis of the triangular factors of A = P·L·U

    The U circuit runs first, then the L circuit relabeled by U's residual
    permutation; P is folded into the output permutation.
    """
    config = (config or GreedyConfig()).model_copy(update={"use_lu": True})
    tag = method_tag(config)
    perm, lower, upper = lu_decompose(matrix, config.lu_strategy)
    upper_result = greedy_synth(upper, config)
    if isinstance(upper_result, SynthesisFailure):
        return upper_result.model_copy(update={"method": tag, "reason": f"U factor: {upper_result.reason}"})
    lower_result = greedy_synth(lower, config)
    if isinstance(lower_result, SynthesisFailure):
        return lower_result.model_copy(update={"method": tag, "reason": f"L factor: {lower_result.reason}"})
    circuit = upper_result.circuit + relabel_circuit(lower_result.circuit, upper_result.out_permutation)
    permutation = perm @ lower_result.out_permutation @ upper_result.out_permutation
    stats = {
        "lu_strategy": config.lu_strategy.value,
        "resets": upper_result.stats["resets"] + lower_result.stats["resets"],
        "operations": upper_result.stats["operations"] + lower_result.stats["operations"],
    }
    return make_result(circuit, permutation, tag, stats)


def config_from_tag(tag: str, seed: int = 0, max_resets: Optional[int] = None) -> GreedyConfig:
    """'greedy:H_sum' / 'lu+greedy:h_prod' -> GreedyConfig"""
    prefix, _, kind = tag.partition(":")
    if prefix not in ("greedy", "lu+greedy") or not kind:
        raise ValueError(f"not a greedy method tag: {tag}")
    return GreedyConfig(cost=CostKind(kind), seed=seed, max_resets=max_resets, use_lu=prefix == "lu+greedy")


class GreedySynthesizer:
    """
    Greedy synthesizer for one cost function

    Responsibilities:
    - Run greedy_synth (or its LU variant) with a fixed configuration
    - Refuse operators wider than the configured size limit
    - Count successes, failures and resets across runs
    """

    def __init__(self, config: Optional[GreedyConfig] = None, max_wires: Optional[int] = None):
        self.config = config or GreedyConfig()
        self.max_wires = max_wires if max_wires is not None else get_settings().greedy_max_wires
        self.method = method_tag(self.config)
        self.runs = 0
        self.failures = 0
        self.resets = 0

    @classmethod
    def from_tag(cls, tag: str, seed: int = 0, max_wires: Optional[int] = None) -> "GreedySynthesizer":
        return cls(config_from_tag(tag, seed), max_wires=max_wires)

    def process(self, matrix: BitMatrix) -> GreedyOutcome:
        if matrix.n_rows > self.max_wires:
            raise UnsupportedSizeError(f"{self.method} is limited to {self.max_wires} wires")
        synth = lu_greedy_synth if self.config.use_lu else greedy_synth
        outcome = synth(matrix, self.config)
        self.runs += 1
        if isinstance(outcome, SynthesisFailure):
            self.failures += 1
            self.resets += outcome.resets
        else:
            self.resets += outcome.stats.get("resets", 0)
        return outcome

    def get_stats(self) -> Dict[str, object]:
        return {
            "method": self.method,
            "runs": self.runs,
            "failures": self.failures,
            "failure_rate": self.failures / self.runs if self.runs else 0,
            "resets": self.resets,
        }
