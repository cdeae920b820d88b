"""
Exhaustive search over small Boolean matrices

Breadth-first enumeration of r×c matrix classes (up to independent row and
column permutations) by the number of parallel row/column layers needed to
reach a partial permutation. The search doubles as the source of the optimal
reduction tables used by the tiled zeroing strategy.

Rows are stored as ints with column j at bit (c-1-j), so comparing ints
compares rows lexicographically.
"""
import gzip
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from loguru import logger

from src.core.exceptions import MissingTableError, UnsupportedSizeError
from src.core.gf2core import BitMatrix
from src.utils.config import get_settings

TABLE_VERSION = 1
MAX_CANONICAL_SIZE = 6
EXACT_CANONICAL_SIZE = 4
BUILD_ON_DEMAND = 4

CanonicalKey = bytes
Moves = Tuple[Tuple[int, int], ...]
RawLayer = Tuple[Moves, Moves]  # (row moves, column moves), each (src, tgt)


# -- canonical form ------------------------------------------------------

@lru_cache(maxsize=None)
def _column_map(n_cols: int, order: Tuple[int, ...]) -> Tuple[int, ...]:
    """Lookup table: row int -> row int with column b taken from column order[b]"""
    table = []
    for value in range(1 << n_cols):
        mapped = 0
        for b, src in enumerate(order):
            if value >> (n_cols - 1 - src) & 1:
                mapped |= 1 << (n_cols - 1 - b)
        table.append(mapped)
    return tuple(table)


@lru_cache(maxsize=None)
def _all_column_orders(n_cols: int) -> Tuple[Tuple[int, ...], ...]:
    return tuple(itertools.permutations(range(n_cols)))


def _weight_consistent_orders(rows: Sequence[int], n_cols: int) -> Iterator[Tuple[int, ...]]:
    """Column orders that list columns by non-decreasing weight"""
    weights = [sum(row >> (n_cols - 1 - j) & 1 for row in rows) for j in range(n_cols)]
    groups = [[j for j in range(n_cols) if weights[j] == w] for w in sorted(set(weights))]
    for parts in itertools.product(*(itertools.permutations(g) for g in groups)):
        yield tuple(j for part in parts for j in part)


def _canonicalize(rows: Sequence[int], n_cols: int) -> Tuple[Tuple[int, ...], List[int], Tuple[int, ...]]:
    """
    Canonical representative of a matrix class

    Returns:
        (representative rows, row_order, col_order) with
        representative[a] = rows[row_order[a]] restricted to columns col_order
    """
    if n_cols <= EXACT_CANONICAL_SIZE:
        orders = _all_column_orders(n_cols)
    else:
        orders = _weight_consistent_orders(rows, n_cols)
    best = None
    for order in orders:
        table = _column_map(n_cols, order)
        mapped = [table[x] for x in rows]
        row_order = sorted(range(len(rows)), key=mapped.__getitem__)
        candidate = tuple(mapped[i] for i in row_order)
        if best is None or candidate < best[0]:
            best = (candidate, row_order, order)
    return best


def _key(n_rows: int, n_cols: int, rows: Sequence[int]) -> CanonicalKey:
    return bytes([n_rows, n_cols, *rows])


def canonical_form(matrix: BitMatrix) -> CanonicalKey:
    """
    Key shared exactly by matrices equal up to row and column permutations

    Raises:
        UnsupportedSizeError: a dimension above 6
    """
    n_rows, n_cols = matrix.shape
    if max(n_rows, n_cols) > MAX_CANONICAL_SIZE:
        raise UnsupportedSizeError(f"canonical forms are limited to {MAX_CANONICAL_SIZE}x{MAX_CANONICAL_SIZE}")
    rep, _, _ = _canonicalize([int(text, 2) for text in matrix.to_rows()], n_cols)
    return _key(n_rows, n_cols, rep)


# -- layers ----------------------------------------------------------------

@lru_cache(maxsize=None)
def _directed_matchings(size: int) -> Tuple[Moves, ...]:
    """Every set of vertex-disjoint ordered pairs over range(size)"""

    def extend(free: Tuple[int, ...]) -> List[List[Tuple[int, int]]]:
        if not free:
            return [[]]
        head, rest = free[0], free[1:]
        out = [m for m in extend(rest)]
        for partner in rest:
            remaining = tuple(x for x in rest if x != partner)
            for tail in extend(remaining):
                out.append([(head, partner)] + tail)
                out.append([(partner, head)] + tail)
        return out

    return tuple(tuple(m) for m in extend(tuple(range(size))))


@lru_cache(maxsize=None)
def search_layers(n_rows: int, n_cols: int) -> Tuple[RawLayer, ...]:
    """All non-empty depth-1 layers mixing row and column moves"""
    layers = []
    for row_moves in _directed_matchings(n_rows):
        for col_moves in _directed_matchings(n_cols):
            if row_moves or col_moves:
                layers.append((row_moves, col_moves))
    return tuple(layers)


def apply_raw_layer(rows: Sequence[int], n_cols: int, layer: RawLayer) -> Tuple[int, ...]:
    out = list(rows)
    row_moves, col_moves = layer
    for src, tgt in row_moves:
        out[tgt] ^= out[src]
    for src, tgt in col_moves:
        src_bit = 1 << (n_cols - 1 - src)
        tgt_bit = 1 << (n_cols - 1 - tgt)
        for i, value in enumerate(out):
            if value & src_bit:
                out[i] = value ^ tgt_bit
    return tuple(out)


def _map_layer(layer: RawLayer, row_map: Sequence[int], col_map: Sequence[int]) -> RawLayer:
    row_moves, col_moves = layer
    return (
        tuple((row_map[s], row_map[t]) for s, t in row_moves),
        tuple((col_map[s], col_map[t]) for s, t in col_moves),
    )


def _inverse(order: Sequence[int]) -> List[int]:
    inv = [0] * len(order)
    for a, x in enumerate(order):
        inv[x] = a
    return inv


def is_partial_permutation_rows(rows: Sequence[int]) -> bool:
    seen = 0
    for value in rows:
        if value & (value - 1):
            return False
        if value & seen:
            return False
        seen |= value
    return True


# -- tables ----------------------------------------------------------------

class ShapeTable:
    """
    Minimal reduction depth and witness of every r×c class

    entries: key -> (depth, representative rows, witness layers)
    """

    def __init__(self, n_rows: int, n_cols: int):
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.entries: Dict[CanonicalKey, Tuple[int, Tuple[int, ...], List[RawLayer]]] = {}

    @property
    def counts(self) -> Dict[int, int]:
        counts: Dict[int, int] = {}
        for depth, _, _ in self.entries.values():
            counts[depth] = counts.get(depth, 0) + 1
        return dict(sorted(counts.items()))

    @property
    def max_depth(self) -> int:
        return max((depth for depth, _, _ in self.entries.values()), default=0)

    def witness_for(self, rows: Sequence[int]) -> List[RawLayer]:
        """Layers reducing `rows` (this shape) to a partial permutation"""
        rep, row_order, col_order = _canonicalize(rows, self.n_cols)
        key = _key(self.n_rows, self.n_cols, rep)
        if key not in self.entries:
            raise MissingTableError(f"class missing from the {self.n_rows}x{self.n_cols} table")
        _, _, witness = self.entries[key]
        return [_map_layer(layer, row_order, col_order) for layer in witness]

    def to_dict(self) -> dict:
        return {
            "rows": self.n_rows,
            "cols": self.n_cols,
            "counts": {str(d): c for d, c in self.counts.items()},
            "entries": [
                [key.hex(), depth, list(rep), [[list(map(list, r)), list(map(list, c))] for r, c in witness]]
                for key, (depth, rep, witness) in self.entries.items()
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ShapeTable":
        table = cls(int(data["rows"]), int(data["cols"]))
        for key_hex, depth, rep, witness in data["entries"]:
            layers = [
                (tuple((s, t) for s, t in r), tuple((s, t) for s, t in c)) for r, c in witness
            ]
            table.entries[bytes.fromhex(key_hex)] = (int(depth), tuple(rep), layers)
        return table


def _expand_chunk(args: Tuple[int, int, List[Tuple[CanonicalKey, Tuple[int, ...]]]]) -> list:
    """Apply every layer to a slice of the frontier; first occurrence of each class wins"""
    n_rows, n_cols, chunk = args
    layers = search_layers(n_rows, n_cols)
    seen = set()
    found = []
    for parent_key, rows in chunk:
        for index, layer in enumerate(layers):
            reached = apply_raw_layer(rows, n_cols, layer)
            rep, row_order, col_order = _canonicalize(reached, n_cols)
            key = _key(n_rows, n_cols, rep)
            if key in seen:
                continue
            seen.add(key)
            found.append((parent_key, index, key, rep, row_order, col_order))
    return found


def _save_json(data: dict, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with gzip.open(path, "wt", encoding="utf-8") as fh:
        json.dump(data, fh)


def _load_json(path: Union[str, Path]) -> dict:
    with gzip.open(path, "rt", encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("version") != TABLE_VERSION:
        raise MissingTableError(f"{path} has table version {data.get('version')}, expected {TABLE_VERSION}")
    return data


def bfs_shape(n_rows: int, n_cols: int, max_depth: Optional[int] = None, jobs: int = 1,
              checkpoint: Optional[Union[str, Path]] = None) -> ShapeTable:
    """
    Breadth-first search over the classes of one shape

    Frontier 0 holds the partial permutations of every rank; each step
    applies every layer to every frontier class and keeps the classes seen
    for the first time. Results are merged in frontier order, so the table
    does not depend on `jobs`.
    """
    if max(n_rows, n_cols) > MAX_CANONICAL_SIZE:
        raise UnsupportedSizeError(f"search is limited to {MAX_CANONICAL_SIZE}x{MAX_CANONICAL_SIZE}")
    table = ShapeTable(n_rows, n_cols)
    if checkpoint is not None and Path(checkpoint).exists():
        table = ShapeTable.from_dict(_load_json(checkpoint)["shape"])
        logger.info(f"♻️ Resuming {n_rows}x{n_cols} search at depth {table.max_depth}")
    else:
        for rank in range(min(n_rows, n_cols) + 1):
            rows = [1 << (n_cols - 1 - i) if i < rank else 0 for i in range(n_rows)]
            rep, _, _ = _canonicalize(rows, n_cols)
            table.entries.setdefault(_key(n_rows, n_cols, rep), (0, rep, []))

    depth = table.max_depth
    frontier = [key for key, (d, _, _) in table.entries.items() if d == depth]
    layers = search_layers(n_rows, n_cols)
    while frontier and (max_depth is None or depth < max_depth):
        work = [(key, table.entries[key][1]) for key in frontier]
        if jobs > 1 and len(work) > jobs:
            size = math.ceil(len(work) / (jobs * 4))
            chunks = [(n_rows, n_cols, work[i:i + size]) for i in range(0, len(work), size)]
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_expand_chunk, chunks))
        else:
            results = [_expand_chunk((n_rows, n_cols, work))]

        frontier = []
        for found in results:
            for parent_key, index, key, rep, row_order, col_order in found:
                if key in table.entries:
                    continue
                row_map, col_map = _inverse(row_order), _inverse(col_order)
                parent_witness = table.entries[parent_key][2]
                witness = [_map_layer(layers[index], row_map, col_map)]
                witness += [_map_layer(layer, row_map, col_map) for layer in parent_witness]
                table.entries[key] = (depth + 1, rep, witness)
                frontier.append(key)
        depth += 1
        logger.debug(f"{n_rows}x{n_cols} depth {depth}: {len(frontier)} new classes")
        if checkpoint is not None:
            _save_json({"version": TABLE_VERSION, "shape": table.to_dict()}, checkpoint)
    return table


def bfs_depth_classes(k: int, max_depth: Optional[int] = None, jobs: int = 1,
                      checkpoint: Optional[Union[str, Path]] = None) -> Tuple[Dict[int, int], ShapeTable]:
    """
    Class counts per minimal depth for k×k matrices, plus the square table

    Raises:
        UnsupportedSizeError: k outside 1..6
    """
    if not 1 <= k <= MAX_CANONICAL_SIZE:
        raise UnsupportedSizeError(f"k must be in 1..{MAX_CANONICAL_SIZE}, got {k}")
    table = bfs_shape(k, k, max_depth=max_depth, jobs=jobs, checkpoint=checkpoint)
    return table.counts, table


class BlockTables:
    """
    Reduction tables for every tile shape r×c with r, c <= k

    Shapes are loaded from the cache directory or searched on first use
    (k <= 4); larger shapes need a table file written by the table2 command.
    """

    def __init__(self, k: int, tables_dir: Optional[Union[str, Path]] = None,
                 shapes: Optional[Dict[Tuple[int, int], ShapeTable]] = None):
        if not 1 <= k <= MAX_CANONICAL_SIZE:
            raise UnsupportedSizeError(f"block size must be in 1..{MAX_CANONICAL_SIZE}, got {k}")
        self.k = k
        self.tables_dir = Path(tables_dir if tables_dir is not None else get_settings().tables_dir)
        self.shapes: Dict[Tuple[int, int], ShapeTable] = dict(shapes or {})
        self._witness_cache: Dict[Tuple[int, int, Tuple[int, ...]], List[RawLayer]] = {}
        self.lookups = 0
        self.cache_hits = 0
        self.searches = 0

    def _shape_path(self, n_rows: int, n_cols: int) -> Path:
        return self.tables_dir / f"shape-{n_rows}x{n_cols}.json.gz"

    def shape(self, n_rows: int, n_cols: int) -> ShapeTable:
        if max(n_rows, n_cols) > self.k:
            raise ValueError(f"{n_rows}x{n_cols} tile is larger than the block size {self.k}")
        key = (n_rows, n_cols)
        if key in self.shapes:
            return self.shapes[key]
        path = self._shape_path(n_rows, n_cols)
        if path.exists():
            logger.debug(f"Loading block table {path}")
            self.shapes[key] = ShapeTable.from_dict(_load_json(path)["shape"])
            return self.shapes[key]
        if max(n_rows, n_cols) > BUILD_ON_DEMAND:
            raise MissingTableError(f"no table for {n_rows}x{n_cols} tiles, run table2 --k {self.k} first")
        logger.info(f"🔎 Searching {n_rows}x{n_cols} block classes")
        table = bfs_shape(n_rows, n_cols)
        self.searches += 1
        self.shapes[key] = table
        try:
            _save_json({"version": TABLE_VERSION, "shape": table.to_dict()}, path)
        except OSError as e:
            logger.warning(f"Could not cache block table at {path}: {e}")
        return table

    @property
    def depth_bound(self) -> int:
        """Largest table depth over the shapes loaded so far"""
        return max((t.max_depth for t in self.shapes.values()), default=0)

    def witness(self, tile: BitMatrix) -> List[RawLayer]:
        """Optimal layers reducing `tile` to a partial permutation, in tile coordinates"""
        n_rows, n_cols = tile.shape
        rows = tuple(int(text, 2) for text in tile.to_rows())
        cache_key = (n_rows, n_cols, rows)
        self.lookups += 1
        if cache_key in self._witness_cache:
            self.cache_hits += 1
            return self._witness_cache[cache_key]
        witness = self.shape(n_rows, n_cols).witness_for(rows)
        self._witness_cache[cache_key] = witness
        return witness

    def save(self, path: Union[str, Path]) -> None:
        _save_json({
            "version": TABLE_VERSION,
            "k": self.k,
            "shapes": [table.to_dict() for _, table in sorted(self.shapes.items())],
        }, path)

    @classmethod
    def load(cls, path: Union[str, Path], tables_dir: Optional[Union[str, Path]] = None) -> "BlockTables":
        data = _load_json(path)
        shapes = {}
        for item in data["shapes"]:
            table = ShapeTable.from_dict(item)
            shapes[(table.n_rows, table.n_cols)] = table
        return cls(int(data["k"]), tables_dir=tables_dir, shapes=shapes)

    def get_stats(self) -> dict:
        return {
            "k": self.k,
            "shapes_loaded": len(self.shapes),
            "depth_bound": self.depth_bound,
            "lookups": self.lookups,
            "cache_hits": self.cache_hits,
            "searches": self.searches,
        }


_tables: Dict[Tuple[int, str], BlockTables] = {}


def get_block_tables(k: int, tables_dir: Optional[Union[str, Path]] = None) -> BlockTables:
    """Get or create the shared tables for block size k"""
    directory = str(tables_dir if tables_dir is not None else get_settings().tables_dir)
    key = (k, directory)
    if key not in _tables:
        _tables[key] = BlockTables(k, tables_dir=directory)
    return _tables[key]
