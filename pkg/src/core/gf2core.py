"""
Dense linear algebra over GF(2)

Rows are bit-packed into 64-bit words, little-endian inside a word: entry (i, j)
is bit j % 64 of words[i, j // 64]. Padding bits past n_cols are always zero.
"""
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.exceptions import MatrixParseError, ShapeMismatchError, SingularMatrixError

WORD = 64


def _n_words(n_cols: int) -> int:
    return (n_cols + WORD - 1) // WORD


def _pack(dense: np.ndarray) -> np.ndarray:
    rows, cols = dense.shape
    padded = np.zeros((rows, _n_words(cols) * WORD), dtype=np.uint8)
    padded[:, :cols] = dense
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64)


def _unpack(words: np.ndarray, n_cols: int) -> np.ndarray:
    raw = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return np.unpackbits(raw, axis=1, bitorder="little")[:, :n_cols]


def _column_bits(words: np.ndarray, col: int) -> np.ndarray:
    return (words[:, col // WORD] >> np.uint64(col % WORD)) & np.uint64(1)


class BitMatrix:
    """
    Boolean matrix over GF(2) with bit-packed rows

    Row operations cost O(n / 64) word XORs, which is what keeps the
    reduction loops of the synthesizers cheap.
    """

    __slots__ = ("n_rows", "n_cols", "words")

    def __init__(self, n_rows: int, n_cols: int, words: Optional[np.ndarray] = None):
        if n_rows < 1 or n_cols < 1:
            raise ValueError(f"BitMatrix needs at least one row and one column, got {n_rows}x{n_cols}")
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        if words is None:
            words = np.zeros((self.n_rows, _n_words(self.n_cols)), dtype=np.uint64)
        elif words.shape != (self.n_rows, _n_words(self.n_cols)):
            raise ValueError(f"word storage has shape {words.shape}, expected {(self.n_rows, _n_words(self.n_cols))}")
        self.words = words

    # -- construction -------------------------------------------------

    @classmethod
    def zeros(cls, n_rows: int, n_cols: Optional[int] = None) -> "BitMatrix":
        return cls(n_rows, n_rows if n_cols is None else n_cols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_array(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_array(cls, array) -> "BitMatrix":
        """Build from any 2-D array-like of 0/1 values"""
        dense = np.asarray(array)
        if dense.ndim != 2:
            raise ValueError(f"expected a 2-D array, got {dense.ndim} dimensions")
        if dense.size and np.any((dense != 0) & (dense != 1)):
            raise ValueError("entries must be 0 or 1")
        dense = dense.astype(np.uint8)
        return cls(dense.shape[0], dense.shape[1], _pack(dense))

    @classmethod
    def from_rows(cls, rows: Sequence[Union[str, Sequence[int]]]) -> "BitMatrix":
        """Build from rows given as '0101' strings or int sequences"""
        return cls.from_array([[int(ch) for ch in row] for row in rows])

    @classmethod
    def random(cls, n_rows: int, n_cols: int, rng: np.random.Generator) -> "BitMatrix":
        return cls.from_array(rng.integers(0, 2, size=(n_rows, n_cols), dtype=np.uint8))

    @classmethod
    def random_invertible(cls, n: int, rng: np.random.Generator) -> "BitMatrix":
        """Rejection-sample a uniformly random invertible n x n matrix"""
        while True:
            candidate = cls.random(n, n, rng)
            if rank(candidate) == n:
                return candidate

    # -- views --------------------------------------------------------

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_rows, self.n_cols

    @property
    def is_square(self) -> bool:
        return self.n_rows == self.n_cols

    def to_array(self) -> np.ndarray:
        """Dense uint8 copy"""
        return _unpack(self.words, self.n_cols)

    def to_rows(self) -> List[str]:
        return ["".join("1" if b else "0" for b in row) for row in self.to_array()]

    def row_ints(self) -> List[int]:
        """Each row as a Python int (column j is bit j)"""
        return [int.from_bytes(row.astype("<u8").tobytes(), "little") for row in self.words]

    def copy(self) -> "BitMatrix":
        return BitMatrix(self.n_rows, self.n_cols, self.words.copy())

    def row(self, i: int) -> np.ndarray:
        return _unpack(self.words[i:i + 1], self.n_cols)[0]

    def column(self, j: int) -> np.ndarray:
        self._check_col(j)
        return _column_bits(self.words, j).astype(np.uint8)

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_array(self.to_array().T)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "BitMatrix":
        dense = self.to_array()
        return BitMatrix.from_array(dense[np.ix_(list(rows), list(cols))])

    # -- entries ------------------------------------------------------

    def _check_row(self, i: int) -> None:
        if not 0 <= i < self.n_rows:
            raise IndexError(f"row {i} out of range for {self.n_rows} rows")

    def _check_col(self, j: int) -> None:
        if not 0 <= j < self.n_cols:
            raise IndexError(f"column {j} out of range for {self.n_cols} columns")

    def __getitem__(self, key: Tuple[int, int]) -> int:
        i, j = key
        self._check_row(i)
        self._check_col(j)
        return (int(self.words[i, j // WORD]) >> (j % WORD)) & 1

    def set(self, i: int, j: int, value: int) -> None:
        self._check_row(i)
        self._check_col(j)
        mask = np.uint64(1 << (j % WORD))
        if value & 1:
            self.words[i, j // WORD] |= mask
        else:
            self.words[i, j // WORD] &= ~mask

    def flip(self, i: int, j: int) -> None:
        self._check_row(i)
        self._check_col(j)
        self.words[i, j // WORD] ^= np.uint64(1 << (j % WORD))

    # -- elementary operations ----------------------------------------

    def row_add(self, src: int, tgt: int) -> None:
        """row[tgt] ^= row[src] (left multiplication by E_{tgt,src})"""
        self._check_row(src)
        self._check_row(tgt)
        if src == tgt:
            raise ValueError("row_add needs two distinct rows")
        self.words[tgt] ^= self.words[src]

    def col_add(self, src: int, tgt: int) -> None:
        """col[tgt] ^= col[src] (right multiplication by E_{src,tgt})"""
        self._check_col(src)
        self._check_col(tgt)
        if src == tgt:
            raise ValueError("col_add needs two distinct columns")
        bits = _column_bits(self.words, src)
        self.words[:, tgt // WORD] ^= bits << np.uint64(tgt % WORD)

    def swap_rows(self, i: int, j: int) -> None:
        self._check_row(i)
        self._check_row(j)
        self.words[[i, j]] = self.words[[j, i]]

    # -- statistics ---------------------------------------------------

    def row_weights(self) -> np.ndarray:
        return np.bitwise_count(self.words).sum(axis=1).astype(np.int64)

    def col_weights(self) -> np.ndarray:
        return self.to_array().sum(axis=0).astype(np.int64)

    def weight(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def is_zero(self) -> bool:
        return not self.words.any()

    def is_identity(self) -> bool:
        return self.is_square and self == BitMatrix.identity(self.n_rows)

    def is_partial_permutation(self) -> bool:
        return bool(np.all(self.row_weights() <= 1) and np.all(self.col_weights() <= 1))

    def is_permutation(self) -> bool:
        return self.is_square and bool(np.all(self.row_weights() == 1) and np.all(self.col_weights() == 1))

    # -- dunder -------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.words, other.words)

    __hash__ = None

    def __repr__(self) -> str:
        return f"BitMatrix({self.n_rows}x{self.n_cols}, weight={self.weight()})"

    def __str__(self) -> str:
        return "\n".join(self.to_rows())


class Permutation:
    """
    Bijection on {0..n-1} acting on matrix rows

    The matrix of P has a one at (i, image[i]), so (P·M)[i] = M[image[i]].
    """

    __slots__ = ("image",)

    def __init__(self, image: Iterable[int]):
        image = tuple(int(x) for x in image)
        if sorted(image) != list(range(len(image))):
            raise ValueError(f"not a permutation: {image}")
        self.image = image

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(n))

    @classmethod
    def from_matrix(cls, matrix: BitMatrix) -> "Permutation":
        if not matrix.is_permutation():
            raise ValueError("matrix is not a permutation matrix")
        return cls(int(np.flatnonzero(row)[0]) for row in matrix.to_array())

    @property
    def n(self) -> int:
        return len(self.image)

    def __len__(self) -> int:
        return len(self.image)

    def is_identity(self) -> bool:
        return all(i == x for i, x in enumerate(self.image))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.image)
        for i, x in enumerate(self.image):
            inv[x] = i
        return Permutation(inv)

    def __matmul__(self, other: "Permutation") -> "Permutation":
        """Matrix product: (self @ other)·M == self·(other·M)"""
        if len(other) != len(self):
            raise ValueError("permutation sizes differ")
        return Permutation(other.image[x] for x in self.image)

    def as_matrix(self) -> BitMatrix:
        dense = np.zeros((self.n, self.n), dtype=np.uint8)
        dense[np.arange(self.n), list(self.image)] = 1
        return BitMatrix.from_array(dense)

    def apply_rows(self, matrix: BitMatrix) -> BitMatrix:
        if matrix.n_rows != self.n:
            raise ShapeMismatchError(f"permutation of size {self.n} applied to {matrix.n_rows} rows")
        return BitMatrix(matrix.n_rows, matrix.n_cols, matrix.words[list(self.image)].copy())

    def to_list(self) -> List[int]:
        return list(self.image)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.image == other.image

    def __hash__(self) -> int:
        return hash(self.image)

    def __repr__(self) -> str:
        return f"Permutation({list(self.image)})"


class XorBasis:
    """Incremental echelon basis over int bit-rows, keyed by lowest set bit"""

    def __init__(self):
        self.pivots = {}

    def __len__(self) -> int:
        return len(self.pivots)

    def reduce(self, value: int) -> int:
        while value:
            low = (value & -value).bit_length() - 1
            row = self.pivots.get(low)
            if row is None:
                return value
            value ^= row
        return 0

    def add(self, value: int) -> bool:
        """Insert value; True when it was independent of the basis"""
        reduced = self.reduce(value)
        if not reduced:
            return False
        self.pivots[(reduced & -reduced).bit_length() - 1] = reduced
        return True


# -- module-level operations -------------------------------------------

def row_add(matrix: BitMatrix, src: int, tgt: int) -> None:
    """In-place row[tgt] ^= row[src]"""
    matrix.row_add(src, tgt)


def rank(matrix: BitMatrix) -> int:
    """GF(2) rank; the input is left untouched"""
    words = matrix.words.copy()
    r = 0
    for col in range(matrix.n_cols):
        if r == matrix.n_rows:
            break
        hits = np.flatnonzero(_column_bits(words[r:], col))
        if hits.size == 0:
            continue
        pivot = r + int(hits[0])
        if pivot != r:
            words[[r, pivot]] = words[[pivot, r]]
        below = r + 1 + np.flatnonzero(_column_bits(words[r + 1:], col))
        if below.size:
            words[below] ^= words[r]
        r += 1
    return r


def is_invertible(matrix: BitMatrix) -> bool:
    return matrix.is_square and rank(matrix) == matrix.n_rows


def invert(matrix: BitMatrix) -> BitMatrix:
    """
    Gauss-Jordan inverse

    Raises:
        ShapeMismatchError: matrix is not square
        SingularMatrixError: matrix is not invertible
    """
    if not matrix.is_square:
        raise ShapeMismatchError(f"cannot invert a {matrix.n_rows}x{matrix.n_cols} matrix")
    n = matrix.n_rows
    work = matrix.words.copy()
    inverse = BitMatrix.identity(n).words.copy()
    for col in range(n):
        hits = np.flatnonzero(_column_bits(work[col:], col))
        if hits.size == 0:
            raise SingularMatrixError()
        pivot = col + int(hits[0])
        if pivot != col:
            work[[col, pivot]] = work[[pivot, col]]
            inverse[[col, pivot]] = inverse[[pivot, col]]
        others = np.flatnonzero(_column_bits(work, col))
        others = others[others != col]
        if others.size:
            work[others] ^= work[col]
            inverse[others] ^= inverse[col]
    return BitMatrix(n, n, inverse)


def multiply(left: BitMatrix, right: BitMatrix) -> BitMatrix:
    """GF(2) product left·right"""
    if left.n_cols != right.n_rows:
        raise ValueError(f"cannot multiply {left.shape} by {right.shape}")
    # float64 matmul is exact far beyond any size used here and goes through BLAS
    product = left.to_array().astype(np.float64) @ right.to_array().astype(np.float64)
    return BitMatrix.from_array(np.remainder(product, 2).astype(np.uint8))


def lu_decompose(matrix: BitMatrix, strategy: str = "plain") -> Tuple[Permutation, BitMatrix, BitMatrix]:
    """
    Factor A = P·L·U with unit lower L and unit upper U

    Args:
        matrix: square invertible A
        strategy: "plain" takes the first usable pivot; "sparse" takes the
                  candidate whose remaining row (the next row of U) has the
                  fewest ones, lowest index on ties; the new column of L holds
                  every other candidate whatever the choice, so this is also
                  the lowest combined row-plus-column weight

    Returns:
        (P, L, U)
    """
    strategy = str(getattr(strategy, "value", strategy))
    if strategy not in ("plain", "sparse"):
        raise ValueError(f"unknown LU strategy: {strategy}")
    if not matrix.is_square:
        raise ShapeMismatchError(f"cannot factor a {matrix.n_rows}x{matrix.n_cols} matrix")
    n = matrix.n_rows
    upper = matrix.to_array().copy()
    lower = np.eye(n, dtype=np.uint8)
    order = np.arange(n)
    for k in range(n):
        candidates = k + np.flatnonzero(upper[k:, k])
        if candidates.size == 0:
            raise SingularMatrixError()
        if strategy == "sparse":
            pivot = int(candidates[np.argmin(upper[candidates, k:].sum(axis=1))])
        else:
            pivot = int(candidates[0])
        if pivot != k:
            upper[[k, pivot]] = upper[[pivot, k]]
            lower[[k, pivot], :k] = lower[[pivot, k], :k]
            order[[k, pivot]] = order[[pivot, k]]
        below = k + 1 + np.flatnonzero(upper[k + 1:, k])
        if below.size:
            upper[below] ^= upper[k]
            lower[below, k] = 1
    # rows of L·U are the rows of A taken in `order`
    return Permutation(order).inverse(), BitMatrix.from_array(lower), BitMatrix.from_array(upper)


def select_rows_by_rank(matrix: BitMatrix, count: int, n_cols: Optional[int] = None) -> List[int]:
    """
    Greedily collect row indices whose restriction to the first n_cols
    columns increases the rank, stopping after `count` rows
    """
    n_cols = matrix.n_cols if n_cols is None else n_cols
    mask = (1 << n_cols) - 1
    basis = XorBasis()
    selected = []
    for i, value in enumerate(matrix.row_ints()):
        if len(selected) == count:
            break
        if basis.add(value & mask):
            selected.append(i)
    return selected


def select_invertible_top_block(matrix: BitMatrix) -> Permutation:
    """
    Permutation moving ceil(n/2) rows to the top so the top-left block is invertible

    Selected rows keep their relative order, as do the remaining rows below.
    """
    if not matrix.is_square:
        raise ShapeMismatchError("top block selection needs a square matrix")
    n = matrix.n_rows
    half = (n + 1) // 2
    selected = select_rows_by_rank(matrix, half, half)
    if len(selected) < half:
        raise SingularMatrixError()
    chosen = set(selected)
    return Permutation(selected + [i for i in range(n) if i not in chosen])


def decompose_in_basis(basis: BitMatrix, vectors: BitMatrix) -> BitMatrix:
    """Coordinates W of each row of `vectors` in the row basis: W·basis = vectors"""
    if vectors.n_cols != basis.n_rows:
        raise ShapeMismatchError(f"vectors have {vectors.n_cols} columns, basis has {basis.n_rows} rows")
    return multiply(vectors, invert(basis))


def vstack(blocks: Sequence[BitMatrix]) -> BitMatrix:
    return BitMatrix.from_array(np.vstack([b.to_array() for b in blocks]))


def hstack(blocks: Sequence[BitMatrix]) -> BitMatrix:
    return BitMatrix.from_array(np.hstack([b.to_array() for b in blocks]))


# -- matrix text format --------------------------------------------------

def parse_matrix_text(text: str) -> BitMatrix:
    """
    Parse '<rows> <cols>' followed by one 0/1 string per row

    Raises:
        MatrixParseError: with the offending 1-based line number
    """
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise MatrixParseError("missing '<rows> <cols>' header", line=1)
    header = lines[0].split()
    if len(header) != 2 or not all(tok.isdigit() for tok in header):
        raise MatrixParseError(f"bad header {lines[0].strip()!r}, expected '<rows> <cols>'", line=1)
    n_rows, n_cols = int(header[0]), int(header[1])
    if n_rows < 1 or n_cols < 1:
        raise MatrixParseError("dimensions must be positive", line=1)

    rows = []
    for idx in range(n_rows):
        lineno = idx + 2
        if idx + 1 >= len(lines):
            raise MatrixParseError(f"expected {n_rows} rows, found {idx}", line=lineno)
        row = lines[idx + 1].rstrip()
        for pos, ch in enumerate(row):
            if ch not in "01":
                raise MatrixParseError(f"unexpected character {ch!r} at column {pos + 1}", line=lineno)
        if len(row) != n_cols:
            raise MatrixParseError(f"expected {n_cols} entries, found {len(row)}", line=lineno)
        rows.append([int(ch) for ch in row])

    for extra, line in enumerate(lines[n_rows + 1:], start=n_rows + 2):
        if line.strip():
            raise MatrixParseError("unexpected content after the last row", line=extra)
    return BitMatrix.from_array(rows)


def format_matrix_text(matrix: BitMatrix) -> str:
    return f"{matrix.n_rows} {matrix.n_cols}\n" + "\n".join(matrix.to_rows()) + "\n"


def read_matrix(path: Union[str, Path]) -> BitMatrix:
    return parse_matrix_text(Path(path).read_text(encoding="utf-8"))


def write_matrix(matrix: BitMatrix, path: Union[str, Path]) -> None:
    Path(path).write_text(format_matrix_text(matrix), encoding="utf-8")
