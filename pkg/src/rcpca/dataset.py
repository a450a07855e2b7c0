"""Block loading, preprocessing and superblock assembly.

A block is an n x J matrix of variables observed on the same n individuals
across blocks. Columns are always centered at load; unit-variance scaling
(1/n convention) is optional. The superblock is the column concatenation of
the blocks, in order, and is never re-centered separately.

All objects here are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DataError,
    DegenerateColumnError,
    DimensionError,
    ParseError,
)

# |column mean| must stay below this times the column norm after centering
_CENTER_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class Preprocessing:
    """Centering/scaling record for one block, kept for reporting."""

    means: np.ndarray
    scales: np.ndarray | None  # None when unit-variance scaling was off
    columns: tuple[str, ...]
    row_ids: tuple[str, ...] | None


@dataclass(frozen=True, eq=False)
class Block:
    """One centered (optionally scaled) data matrix plus its provenance."""

    id: str
    matrix: np.ndarray
    preprocessing: Preprocessing

    def __post_init__(self):
        x = self.matrix
        if x.ndim != 2:
            raise DimensionError(f"block {self.id!r}: expected a 2-d matrix")
        n, j = x.shape
        if n < 2:
            raise DimensionError(f"block {self.id!r}: need at least 2 rows, got {n}")
        if j < 1:
            raise DimensionError(f"block {self.id!r}: need at least 1 column")
        norms = np.linalg.norm(x, axis=0)
        means = np.abs(x.mean(axis=0))
        if np.any(means > _CENTER_RTOL * np.maximum(norms, 1.0)):
            raise DataError(f"block {self.id!r}: columns are not centered")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_vars(self) -> int:
        return self.matrix.shape[1]

    @property
    def columns(self) -> tuple[str, ...]:
        return self.preprocessing.columns


@dataclass(frozen=True, eq=False)
class BlockSet:
    """Ordered blocks plus their column-concatenated superblock."""

    blocks: tuple[Block, ...]
    superblock: np.ndarray

    @property
    def n(self) -> int:
        return self.superblock.shape[0]

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(b.id for b in self.blocks)

    @property
    def row_ids(self) -> tuple[str, ...] | None:
        for b in self.blocks:
            if b.preprocessing.row_ids is not None:
                return b.preprocessing.row_ids
        return None

    @property
    def superblock_columns(self) -> tuple[str, ...]:
        """Block-qualified variable names, in superblock column order."""
        out = []
        for b in self.blocks:
            out.extend(f"{b.id}:{c}" for c in b.columns)
        return tuple(out)


def _preprocess(
    raw: np.ndarray,
    id: str,
    columns: Sequence[str],
    row_ids: Sequence[str] | None,
    scale: bool,
) -> Block:
    raw = np.asarray(raw, dtype=float)
    means = raw.mean(axis=0)
    centered = raw - means
    # second pass kills the roundoff residual left by large offsets
    shift = centered.mean(axis=0)
    centered -= shift
    means = means + shift
    scales = None
    if scale:
        sd = np.sqrt((centered**2).mean(axis=0))  # 1/n convention
        floor = 1e-12 * np.maximum(1.0, np.abs(raw).max(axis=0))
        bad = np.flatnonzero(sd <= floor)
        if bad.size:
            name = columns[bad[0]]
            raise DegenerateColumnError(
                f"block {id!r}: column {name!r} has zero variance and cannot "
                "be scaled to unit variance"
            )
        centered = centered / sd
        scales = sd
    pre = Preprocessing(
        means=means,
        scales=scales,
        columns=tuple(columns),
        row_ids=tuple(row_ids) if row_ids is not None else None,
    )
    matrix = centered.copy()
    matrix.setflags(write=False)
    return Block(id=id, matrix=matrix, preprocessing=pre)


def from_matrix(
    id: str,
    data: np.ndarray,
    *,
    scale: bool = False,
    columns: Sequence[str] | None = None,
    row_ids: Sequence[str] | None = None,
) -> Block:
    """Build a Block from an in-memory array, centering (and scaling) it."""
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if columns is None:
        columns = [f"v{j + 1}" for j in range(data.shape[1])]
    if not np.all(np.isfinite(data)):
        raise DataError(f"block {id!r}: non-finite values are not supported")
    return _preprocess(data, id, columns, row_ids, scale)


def load_block(
    source,
    id: str | None = None,
    *,
    delimiter: str = ",",
    scale: bool = False,
    id_column: bool = False,
) -> Block:
    """Load one block from a delimiter-separated text table.

    The first row must hold column names. When ``id_column`` is true the
    first column carries row identifiers. Cells must parse as finite
    numbers; missing values are rejected rather than imputed.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        if id is None:
            id = path.stem
        text = path.read_text(encoding="utf-8")
    else:
        text = source.read()
        if id is None:
            id = "block"
    rows = list(csv.reader(io.StringIO(text), delimiter=delimiter))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise ParseError(f"block {id!r}: need a header row plus data rows")
    header = [c.strip() for c in rows[0]]
    if id_column:
        if len(header) < 2:
            raise ParseError(f"block {id!r}: id column declared but only one column present")
        columns = header[1:]
    else:
        columns = header
    if not columns:
        raise ParseError(f"block {id!r}: header row has no variable names")

    data = np.empty((len(rows) - 1, len(columns)), dtype=float)
    row_ids: list[str] | None = [] if id_column else None
    for i, row in enumerate(rows[1:], start=2):  # line numbers are 1-based
        if len(row) != len(header):
            raise ParseError(
                f"block {id!r}: row {i} has {len(row)} fields, expected {len(header)}"
            )
        cells = row[1:] if id_column else row
        if id_column:
            row_ids.append(row[0].strip())
        for j, cell in enumerate(cells):
            s = cell.strip()
            if not s:
                raise ParseError(
                    f"block {id!r}: missing value at row {i}, column {columns[j]!r}"
                )
            try:
                value = float(s)
            except ValueError:
                raise ParseError(
                    f"block {id!r}: non-numeric value {s!r} at row {i}, "
                    f"column {columns[j]!r}"
                ) from None
            if not np.isfinite(value):
                raise ParseError(
                    f"block {id!r}: non-finite value at row {i}, column {columns[j]!r}"
                )
            data[i - 2, j] = value
    if data.shape[0] < 2:
        raise DimensionError(f"block {id!r}: need at least 2 data rows")
    return _preprocess(data, id, columns, row_ids, scale)


def build_blockset(blocks: Iterable[Block]) -> BlockSet:
    """Concatenate blocks (order preserved) into a BlockSet.

    All blocks must share the same number of rows; when several carry row
    identifiers those must agree as well (same individuals, same order).
    """
    blocks = tuple(blocks)
    if not blocks:
        raise ValueError("need at least one block")
    n = blocks[0].n
    for b in blocks[1:]:
        if b.n != n:
            raise DimensionError(
                f"block {b.id!r} has {b.n} rows but block {blocks[0].id!r} has {n}"
            )
    with_ids = [b for b in blocks if b.preprocessing.row_ids is not None]
    for b in with_ids[1:]:
        if b.preprocessing.row_ids != with_ids[0].preprocessing.row_ids:
            raise DataError(
                f"row identifiers of block {b.id!r} do not match those of "
                f"block {with_ids[0].id!r}"
            )
    superblock = np.hstack([b.matrix for b in blocks])
    superblock.setflags(write=False)
    return BlockSet(blocks=blocks, superblock=superblock)


def sample_cov(x: np.ndarray, y: np.ndarray) -> float:
    """Sample covariance of two centered vectors, 1/n convention."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise DimensionError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    return float(x @ y) / x.shape[0]
