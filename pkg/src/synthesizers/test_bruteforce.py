"""
Tests for the exhaustive class search and the block tables
Run: pytest src/synthesizers/test_bruteforce.py  (add -m slow for k=4)
"""
import itertools
import math

import numpy as np
import pytest

from src.core.exceptions import UnsupportedSizeError
from src.core.gf2core import BitMatrix, Permutation
from src.models.schemas import Layer, OpRecord
from src.synthesizers.bruteforce import (
    BlockTables,
    ShapeTable,
    apply_raw_layer,
    bfs_depth_classes,
    bfs_shape,
    canonical_form,
    is_partial_permutation_rows,
    search_layers,
)
from src.synthesizers.dacsynth import apply_layers

KNOWN_COUNTS = {
    1: {0: 2},
    2: {0: 3, 1: 4},
    3: {0: 4, 1: 17, 2: 15},
    4: {0: 5, 1: 69, 2: 243},
}


def _cycle_lengths(perm):
    seen, lengths = set(), []
    for start in range(len(perm)):
        if start in seen:
            continue
        length, x = 0, start
        while x not in seen:
            seen.add(x)
            x = perm[x]
            length += 1
        lengths.append(length)
    return lengths


def _orbit_count(k: int) -> int:
    """Burnside: classes of k×k Boolean matrices under row and column permutations"""
    total = 0
    for sigma in itertools.permutations(range(k)):
        for tau in itertools.permutations(range(k)):
            cycles = sum(math.gcd(a, b) for a in _cycle_lengths(sigma) for b in _cycle_lengths(tau))
            total += 2 ** cycles
    return total // math.factorial(k) ** 2


@pytest.mark.parametrize("k", [1, 2, 3])
def test_depth_classes_match_known_counts(k):
    counts, table = bfs_depth_classes(k)
    assert counts == KNOWN_COUNTS[k]
    assert sum(counts.values()) == _orbit_count(k)
    print(f"   ✅ k={k}: {counts}")


@pytest.mark.slow
def test_depth_classes_k4():
    counts, _ = bfs_depth_classes(4, jobs=2)
    assert counts == KNOWN_COUNTS[4]
    assert sum(counts.values()) == _orbit_count(4) == 317


def test_witnesses_replay_to_partial_permutations():
    table = bfs_shape(3, 3)
    for depth, rep, witness in table.entries.values():
        assert len(witness) == depth
        rows = rep
        for layer in witness:
            rows = apply_raw_layer(rows, 3, layer)
        assert is_partial_permutation_rows(rows)


def test_rectangular_shapes_search():
    table = bfs_shape(2, 3)
    assert table.counts[0] == 3
    assert sum(table.counts.values()) > 3


def test_max_depth_stops_the_search():
    counts, _ = bfs_depth_classes(3, max_depth=1)
    assert counts == {0: 4, 1: 17}


def test_canonical_form_is_permutation_invariant():
    rng = np.random.default_rng(2)
    for _ in range(100):
        m = BitMatrix.random(4, 4, rng)
        rows = Permutation(rng.permutation(4))
        cols = Permutation(rng.permutation(4))
        shuffled = rows.apply_rows(cols.apply_rows(m.transpose()).transpose())
        assert canonical_form(m) == canonical_form(shuffled)

    assert canonical_form(BitMatrix.identity(3)) == canonical_form(Permutation([2, 0, 1]).as_matrix())
    assert canonical_form(BitMatrix.identity(3)) != canonical_form(BitMatrix.from_rows(["110", "010", "001"]))
    with pytest.raises(UnsupportedSizeError):
        canonical_form(BitMatrix.zeros(7, 7))


def test_layer_enumeration_size():
    # disjoint directed pairs on 3 elements: empty, 6 single pairs
    assert len(search_layers(3, 3)) == 7 * 7 - 1
    assert len(search_layers(4, 4)) == 25 * 25 - 1


def test_block_table_witness_reduces_tiles(tmp_path):
    tables = BlockTables(3, tables_dir=tmp_path)
    rng = np.random.default_rng(8)
    for _ in range(30):
        tile = BitMatrix.random(3, 3, rng)
        witness = tables.witness(tile)
        layers = [
            Layer(ops=[OpRecord.row(s, t) for s, t in row_moves] + [OpRecord.col(s, t) for s, t in col_moves])
            for row_moves, col_moves in witness
        ]
        assert apply_layers(tile, layers).is_partial_permutation()
        assert len(layers) <= 2
    assert (tmp_path / "shape-3x3.json.gz").exists()
    assert tables.get_stats()["lookups"] == 30


def test_block_tables_save_and_load(tmp_path):
    _, table = bfs_depth_classes(2)
    tables = BlockTables(2, tables_dir=tmp_path, shapes={(2, 2): table})
    path = tmp_path / "k2.json.gz"
    tables.save(path)
    loaded = BlockTables.load(path, tables_dir=tmp_path)
    assert loaded.shape(2, 2).counts == table.counts
    assert isinstance(loaded.shape(2, 2), ShapeTable)
