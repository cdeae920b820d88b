"""
Tests for synthesis with parity-carrying ancillas
Run: pytest src/synthesizers/test_ancilla.py
"""
import math

import numpy as np
import pytest

from src.core.circuit import depth_slices, simulate
from src.core.exceptions import RankDeficientError, ShapeMismatchError, VerificationError
from src.core.gf2core import BitMatrix, is_invertible, multiply, rank, vstack
from src.synthesizers import ancilla
from src.synthesizers.ancilla import (
    AncillaSynthesizer,
    ancilla_direct,
    ancilla_synth,
    block_boundaries,
    default_input_table,
    find_partial_permutation,
    make_blocks_invertible,
)


def _random_table(p: int, n: int, rng: np.random.Generator) -> BitMatrix:
    while True:
        table = BitMatrix.random(p, n, rng)
        if rank(table) == n:
            return table


def _maps(result, table_in, table_out) -> bool:
    return multiply(result.out_permutation.apply_rows(simulate(result.circuit)), table_in) == table_out


def test_block_boundaries():
    assert block_boundaries(8, 4) == [(0, 4), (4, 8)]
    assert block_boundaries(11, 4) == [(0, 7), (7, 11)]
    assert block_boundaries(5, 5) == [(0, 5)]


def test_default_input_table():
    table = default_input_table(2, 4)
    assert table.to_rows() == ["10", "01", "00", "00"]
    with pytest.raises(ShapeMismatchError):
        default_input_table(3, 2)


def test_partial_permutation_completes_rank():
    rng = np.random.default_rng(3)
    target = BitMatrix.from_rows(["1100", "0110", "1010", "0000"])
    sigma = find_partial_permutation(target, BitMatrix.identity(4))
    assert len(sigma) == 2
    assert len(set(sigma.values())) == len(sigma)
    fixed = target.copy()
    source = BitMatrix.identity(4)
    for t, s in sigma.items():
        fixed.words[t] ^= source.words[s]
    assert is_invertible(fixed)

    for _ in range(20):
        b = BitMatrix.random(5, 5, rng)
        a = BitMatrix.random_invertible(5, rng)
        sigma = find_partial_permutation(b, a)
        assert len(sigma) == 5 - rank(b)


@pytest.mark.parametrize("n, factor", [(4, 4), (3, 3), (2, 5)])
def test_prepared_blocks_are_invertible(n, factor):
    rng = np.random.default_rng(n * factor)
    p = n * factor
    table = _random_table(p, n, rng)
    prep, order, bounds = make_blocks_invertible(table)
    assert depth_slices(prep) <= math.ceil(math.log2(len(bounds)))
    prepared = order.apply_rows(multiply(simulate(prep), table))
    for start, end in bounds:
        assert is_invertible(prepared.submatrix(list(range(start, start + n)), list(range(n))))


@pytest.mark.parametrize("n", [4, 8])
@pytest.mark.parametrize("factor", [2, 4, 8])
def test_block_method_maps_tables(n, factor):
    rng = np.random.default_rng(10 * n + factor)
    p = n * factor
    for _ in range(5):
        table_in = _random_table(p, n, rng)
        table_out = _random_table(p, n, rng)
        result = ancilla_synth(table_in, table_out)
        assert _maps(result, table_in, table_out)
        assert result.stats["blocks"] == factor
        limit = math.ceil(math.log2(factor))
        assert all(d <= limit for d in result.stats["prep_depths"])


def test_depth_grows_slowly_with_ancillas():
    for seed in range(10):
        depths = {}
        for p in (16, 64):
            rng = np.random.default_rng(seed)
            table_in, table_out = _random_table(p, 8, rng), _random_table(p, 8, rng)
            depths[p] = ancilla_synth(table_in, table_out).depth
        assert depths[64] <= depths[16] + 6, depths


def test_deep_preparation_raises(monkeypatch):
    table = _random_table(16, 4, np.random.default_rng(3))
    monkeypatch.setattr(ancilla, "depth_slices", lambda circuit: 99)
    with pytest.raises(VerificationError):
        make_blocks_invertible(table)


def test_uneven_block_split():
    rng = np.random.default_rng(77)
    table_in = default_input_table(3, 11)
    table_out = _random_table(11, 3, rng)
    result = ancilla_synth(table_in, table_out)
    assert _maps(result, table_in, table_out)


def test_equal_tables():
    table = _random_table(6, 3, np.random.default_rng(1))
    result = ancilla_synth(table, table)
    assert _maps(result, table, table)


def test_table_validation():
    with pytest.raises(ShapeMismatchError):
        ancilla_synth(BitMatrix.zeros(4, 2), BitMatrix.zeros(6, 2))
    low_rank = vstack([BitMatrix.from_rows(["11", "11"]), BitMatrix.zeros(2, 2)])
    with pytest.raises(RankDeficientError):
        ancilla_synth(default_input_table(2, 4), low_rank)


def test_direct_method_checks_operator():
    rng = np.random.default_rng(5)
    operator = BitMatrix.random_invertible(6, rng)
    table_in = default_input_table(3, 6)
    table_out = multiply(operator, table_in)
    result = ancilla_direct(operator, table_in, table_out)
    assert result.method == "ancilla-direct"
    assert _maps(result, table_in, table_out)
    with pytest.raises(VerificationError):
        ancilla_direct(BitMatrix.identity(6), table_in, table_out)


def test_synthesizer_keeps_shallower_method():
    rng = np.random.default_rng(8)
    operator = BitMatrix.random_invertible(8, rng)
    table_in = default_input_table(2, 8)
    table_out = multiply(operator, table_in)
    synthesizer = AncillaSynthesizer()
    result = synthesizer.process(table_in, table_out, operator)
    assert _maps(result, table_in, table_out)
    assert synthesizer.get_stats()["runs"] == 1
    assert sum(synthesizer.get_stats()["wins"].values()) == 1
