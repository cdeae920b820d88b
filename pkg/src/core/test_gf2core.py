"""
Tests for the GF(2) matrix core
Run: pytest src/core/test_gf2core.py
"""
import numpy as np
import pytest

from src.core.exceptions import MatrixParseError, ShapeMismatchError, SingularMatrixError
from src.core.gf2core import (
    BitMatrix,
    Permutation,
    XorBasis,
    decompose_in_basis,
    format_matrix_text,
    invert,
    is_invertible,
    lu_decompose,
    multiply,
    parse_matrix_text,
    rank,
    select_invertible_top_block,
    select_rows_by_rank,
)


def test_row_and_column_operations():
    m = BitMatrix.from_rows(["110", "011", "001"])
    m.row_add(0, 2)
    assert m.to_rows() == ["110", "011", "111"]
    m.col_add(2, 0)
    assert m.to_rows() == ["110", "111", "011"]
    m.swap_rows(0, 2)
    assert m.to_rows() == ["011", "111", "110"]
    assert m[1, 2] == 1
    m.flip(1, 2)
    assert m[1, 2] == 0


def test_wide_rows_pack_across_words():
    rng = np.random.default_rng(7)
    dense = rng.integers(0, 2, size=(5, 150), dtype=np.uint8)
    m = BitMatrix.from_array(dense)
    assert np.array_equal(m.to_array(), dense)
    m.row_add(0, 4)
    assert np.array_equal(m.to_array()[4], dense[4] ^ dense[0])
    assert m.weight() == int(m.to_array().sum())


def test_rank_and_inverse():
    rng = np.random.default_rng(1)
    for n in (1, 2, 7, 65):
        a = BitMatrix.random_invertible(n, rng)
        assert rank(a) == n
        assert multiply(a, invert(a)).is_identity()
        assert multiply(invert(a), a).is_identity()

    singular = BitMatrix.from_rows(["110", "011", "101"])
    assert rank(singular) == 2
    assert not is_invertible(singular)
    with pytest.raises(SingularMatrixError):
        invert(singular)
    with pytest.raises(ShapeMismatchError):
        invert(BitMatrix.zeros(2, 3))


def test_permutation_acts_on_rows():
    m = BitMatrix.from_rows(["100", "110", "111"])
    p = Permutation([2, 0, 1])
    assert p.apply_rows(m).to_rows() == ["111", "100", "110"]
    assert multiply(p.as_matrix(), m) == p.apply_rows(m)

    q = Permutation([1, 2, 0])
    assert (p @ q).apply_rows(m) == p.apply_rows(q.apply_rows(m))
    assert (p @ p.inverse()).is_identity()
    assert Permutation.from_matrix(p.as_matrix()) == p
    with pytest.raises(ValueError):
        Permutation([0, 0, 1])


def test_lu_decompose_both_strategies():
    rng = np.random.default_rng(3)
    for strategy in ("plain", "sparse"):
        for _ in range(10):
            a = BitMatrix.random_invertible(9, rng)
            p, lower, upper = lu_decompose(a, strategy)
            assert p.apply_rows(multiply(lower, upper)) == a
            assert not np.triu(lower.to_array(), 1).any()
            assert not np.tril(upper.to_array(), -1).any()
            assert np.all(np.diag(lower.to_array()) == 1)
            assert np.all(np.diag(upper.to_array()) == 1)


def test_lu_needs_pivoting_on_zero_corner():
    a = BitMatrix.from_rows(["01", "10"])
    p, lower, upper = lu_decompose(a)
    assert lower.is_identity() and upper.is_identity()
    assert p.apply_rows(BitMatrix.identity(2)) == a


def test_top_block_selection():
    a = BitMatrix.from_rows(["0011", "0101", "1000", "0100"])
    perm = select_invertible_top_block(a)
    top = perm.apply_rows(a).submatrix([0, 1], [0, 1])
    assert is_invertible(top)
    assert select_rows_by_rank(a, 2, 2) == [1, 2]


def test_decompose_in_basis():
    basis = BitMatrix.from_rows(["110", "011", "001"])
    vectors = BitMatrix.from_rows(["101", "111"])
    coords = decompose_in_basis(basis, vectors)
    assert multiply(coords, basis) == vectors


def test_xor_basis():
    basis = XorBasis()
    assert basis.add(0b011)
    assert basis.add(0b110)
    assert not basis.add(0b101)
    assert basis.reduce(0b101) == 0
    assert len(basis) == 2


def test_matrix_text_format():
    text = "2 3\n101\n010\n"
    m = parse_matrix_text(text)
    assert m.shape == (2, 3)
    assert format_matrix_text(m) == text


@pytest.mark.parametrize("text, line", [
    ("", 1),
    ("2\n10\n01\n", 1),
    ("2 2\n10\n", 3),
    ("2 2\n10\n0x\n", 3),
    ("2 2\n10\n011\n", 3),
    ("2 2\n10\n01\n11\n", 4),
])
def test_matrix_text_errors_carry_line_numbers(text, line):
    with pytest.raises(MatrixParseError) as info:
        parse_matrix_text(text)
    assert info.value.line == line
