"""
Reference synthesizers: Gaussian elimination and the LU brick-wall method
"""
from typing import Dict, List, Tuple

import numpy as np
from loguru import logger

from src.core.circuit import make_result, result_from_reduction
from src.core.exceptions import NotTriangularError, SingularMatrixError
from src.core.gf2core import BitMatrix, is_invertible, lu_decompose
from src.models.schemas import CnotCircuit, Gate, SynthesisResult

LOWER = "lower"
UPPER = "upper"


def gaussian_synth(matrix: BitMatrix) -> SynthesisResult:
    """
    Row-reduce A to a permutation matrix and replay the reduction backwards

    The pivot is the first free row holding a 1; the row order the pivots
    define is kept as the output permutation instead of swap gates. Each
    column is cleared by a chain: every row holding a 1 is fixed by the
    nearest such row towards the pivot, starting from the far end. The
    slice depth stays below 4n.

    Raises:
        SingularMatrixError: A is not invertible
    """
    if not matrix.is_square:
        raise SingularMatrixError("only square matrices are invertible")
    n = matrix.n_rows
    work = matrix.copy()
    recorded: List[Tuple[int, int]] = []
    pivots: List[int] = []
    free = list(range(n))
    for col in range(n):
        ones = [r for r in free if work[r, col]]
        if not ones:
            raise SingularMatrixError()
        free.remove(ones[0])
        pivots.append(ones[0])
        for control, target in reversed(list(zip(ones, ones[1:]))):
            work.row_add(control, target)
            recorded.append((control, target))
    for col in range(n - 1, -1, -1):
        ones = [p for p in pivots[:col] if work[p, col]] + [pivots[col]]
        for target, control in zip(ones, ones[1:]):
            work.row_add(control, target)
            recorded.append((control, target))
    return result_from_reduction(n, recorded, work, "gaussian")


def _is_unit_triangular(dense: np.ndarray, orientation: str) -> bool:
    if not (np.diag(dense) == 1).all():
        return False
    if orientation == LOWER:
        return not np.triu(dense, 1).any()
    return not np.tril(dense, -1).any()


def _brick_wall_lower(dense: np.ndarray) -> List[Tuple[int, int]]:
    """
    Reduce a unit lower-triangular matrix to I with alternating sweeps

    A virtual order of the rows is swapped pairwise at every step; whenever
    the tracked entry is set the neighbouring row is added first. Returns
    the (control, target) pairs in reduction order.
    """
    n = dense.shape[0]
    work = dense.copy()
    perm = list(range(n))
    gates = []
    for j in range(n):
        start = j % 2
        while start < n - 1:
            upper_row, lower_row = perm[start], perm[start + 1]
            if work[lower_row, upper_row]:
                work[lower_row] ^= work[upper_row]
                gates.append((upper_row, lower_row))
            perm[start], perm[start + 1] = perm[start + 1], perm[start]
            start += 2
    if not (work == np.eye(n, dtype=work.dtype)).all():
        raise NotTriangularError("brick-wall sweep did not reach the identity")
    return gates


def kutin_triangular(matrix: BitMatrix, orientation: str = LOWER) -> CnotCircuit:
    """
    Depth <= n circuit for a unit triangular operator

    Upper-triangular input is solved on its index-reversed conjugate, which
    is lower triangular, and the wires are mapped back.

    Raises:
        NotTriangularError: wrong structure for the orientation
    """
    if orientation not in (LOWER, UPPER):
        raise ValueError(f"unknown orientation: {orientation}")
    dense = matrix.to_array()
    if not matrix.is_square or not _is_unit_triangular(dense, orientation):
        raise NotTriangularError(f"matrix is not unit {orientation} triangular")
    n = matrix.n_rows
    if orientation == UPPER:
        reduction = _brick_wall_lower(dense[::-1, ::-1].copy())
        reduction = [(n - 1 - c, n - 1 - t) for c, t in reduction]
    else:
        reduction = _brick_wall_lower(dense)
    return CnotCircuit(n_wires=n, gates=[Gate.cnot(c, t) for c, t in reversed(reduction)])


def kutin_synth(matrix: BitMatrix) -> SynthesisResult:
    """
    A = P·L·U: the U circuit, then the L circuit, with P as output permutation

    Raises:
        SingularMatrixError: A is not invertible
    """
    if not is_invertible(matrix):
        raise SingularMatrixError()
    perm, lower, upper = lu_decompose(matrix, "plain")
    circuit = kutin_triangular(upper, UPPER) + kutin_triangular(lower, LOWER)
    result = make_result(circuit, perm, "kutin")
    logger.debug(f"kutin n={matrix.n_rows}: depth {result.depth}")
    return result


class BaselineSynthesizer:
    """
    Reference synthesizer (gaussian or kutin)

    Responsibilities:
    - Run one of the comparison methods
    - Track mean depth per run for the reports
    """

    METHODS = {"gaussian": gaussian_synth, "kutin": kutin_synth}

    def __init__(self, method: str = "gaussian"):
        if method not in self.METHODS:
            raise ValueError(f"unknown baseline method: {method}")
        self.method = method
        self.runs = 0
        self.total_depth = 0

    def process(self, matrix: BitMatrix) -> SynthesisResult:
        result = self.METHODS[self.method](matrix)
        self.runs += 1
        self.total_depth += result.depth
        return result

    def get_stats(self) -> Dict[str, object]:
        return {
            "method": self.method,
            "runs": self.runs,
            "mean_depth": self.total_depth / self.runs if self.runs else 0,
        }
