"""
Tests for DaCSynth and its zeroing strategies
Run: pytest src/synthesizers/test_dacsynth.py
"""
import math

import numpy as np
import pytest

from src.core.circuit import verify_result
from src.core.exceptions import SingularMatrixError
from src.core.gf2core import BitMatrix
from src.synthesizers.bruteforce import BlockTables
from src.synthesizers.dacsynth import (
    DaCSynthesizer,
    apply_layers,
    dacsynth,
    depth_bound,
    flip_layers,
    max_degree,
    zero_matrix_greedy,
    zero_matrix_tiled,
)


def _bound(n: int) -> int:
    return 2 * n + 2 * math.ceil(math.log2(n)) if n > 1 else 0


def test_identity_and_single_cnot():
    assert dacsynth(BitMatrix.identity(5)).depth == 0

    e21 = BitMatrix.identity(3)
    e21.row_add(0, 1)
    result = dacsynth(e21)
    assert verify_result(result, e21)
    assert result.cnot_count == 1


def test_permutation_needs_no_gates():
    m = BitMatrix.from_rows(["001", "100", "010"])
    result = dacsynth(m)
    assert result.cnot_count == 0
    assert verify_result(result, m)


@pytest.mark.parametrize("n", [2, 3, 8, 16, 33])
def test_random_operators_verify_within_bound(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        a = BitMatrix.random_invertible(n, rng)
        result = dacsynth(a)
        assert verify_result(result, a)
        assert result.depth <= _bound(n)
        assert result.stats["depth_bound"] == depth_bound(n)


def test_singular_operator_is_rejected():
    with pytest.raises(SingularMatrixError):
        dacsynth(BitMatrix.from_rows(["11", "11"]))


def test_greedy_zeroing_clears_b():
    rng = np.random.default_rng(4)
    for shape in ((6, 6), (5, 9), (9, 4)):
        b = BitMatrix.random(*shape, rng)
        layers = zero_matrix_greedy(b)
        assert apply_layers(b, layers).is_zero()


def test_flip_layers_use_max_degree_layers():
    rng = np.random.default_rng(6)
    for _ in range(10):
        b = BitMatrix.random(8, 8, rng)
        layers = flip_layers(b)
        assert len(layers) == max_degree(b)
        assert apply_layers(b, layers).is_zero()


def test_tiled_zeroing_clears_b(tmp_path):
    tables = BlockTables(3, tables_dir=tmp_path)
    rng = np.random.default_rng(12)
    for _ in range(5):
        b = BitMatrix.random(7, 8, rng)
        layers = zero_matrix_tiled(b, 3, tables)
        assert apply_layers(b, layers).is_zero()
        # D + 1 layers per matching of tiles, D = 2 for 3x3 tiles
        assert len(layers) <= (tables.depth_bound + 1) * max(math.ceil(7 / 3), math.ceil(8 / 3))


@pytest.mark.slow
def test_tiled_k4_layer_budget(tmp_path):
    tables = BlockTables(4, tables_dir=tmp_path)
    rng = np.random.default_rng(21)
    b = BitMatrix.random(12, 12, rng)
    layers = zero_matrix_tiled(b, 4, tables)
    assert apply_layers(b, layers).is_zero()
    assert len(layers) <= (2 + 1) * 3


@pytest.mark.parametrize("k", [1, 2, 3])
def test_tiled_strategy_end_to_end(k, tmp_path):
    tables = BlockTables(k, tables_dir=tmp_path)
    rng = np.random.default_rng(100 + k)
    for n in (4, 10, 16):
        a = BitMatrix.random_invertible(n, rng)
        result = dacsynth(a, "tiled", k=k, tables=tables)
        assert verify_result(result, a)
        assert result.method == f"dacsynth:tiled{k}"


def test_synthesizer_counts_runs():
    synthesizer = DaCSynthesizer.from_tag("dacsynth")
    rng = np.random.default_rng(0)
    for _ in range(3):
        synthesizer.process(BitMatrix.random_invertible(6, rng))
    stats = synthesizer.get_stats()
    assert stats["runs"] == 3
    assert stats["mean_depth"] <= _bound(6)
    assert DaCSynthesizer.from_tag("dacsynth:tiled2").k == 2
    with pytest.raises(ValueError):
        DaCSynthesizer.from_tag("gaussian")
