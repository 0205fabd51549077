"""Physical adjacency formats: CSR, COO, and per-community dense blocks.

CSR is laid out over destinations: row r lists the source neighbors of
destination vertex r in ascending order. All index arrays are 32-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, VALUE_DTYPE, VERTEX_DTYPE


@dataclass(frozen=True)
class CooMatrix:
    """Coordinate-format adjacency, sorted lexicographically by (row, col)."""

    num_vertices: int
    row: np.ndarray
    col: np.ndarray
    val: np.ndarray

    def __post_init__(self):
        for arr in (self.row, self.col, self.val):
            arr.setflags(write=False)

    @property
    def num_edges(self) -> int:
        return int(self.row.size)


@dataclass(frozen=True)
class CsrMatrix:
    """Compressed sparse row adjacency over destination vertices."""

    num_vertices: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    val: np.ndarray

    def __post_init__(self):
        for arr in (self.row_ptr, self.col_idx, self.val):
            arr.setflags(write=False)

    @property
    def num_edges(self) -> int:
        return int(self.col_idx.size)


@dataclass(frozen=True)
class DenseBlockSet:
    """Diagonal dense blocks of an intra-community adjacency matrix.

    Only communities with at least one edge are stored. ``blocks[k]`` is
    the block_size x block_size adjacency block of community
    ``community_ids[k]``, zero-padded when the last community is ragged.
    ``row_touched[k][i]`` marks rows with at least one nonzero.
    """

    num_vertices: int
    block_size: int
    community_ids: np.ndarray
    blocks: np.ndarray
    row_touched: np.ndarray

    def __post_init__(self):
        for arr in (self.community_ids, self.blocks, self.row_touched):
            arr.setflags(write=False)

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.blocks))


def to_csr(g: Graph) -> CsrMatrix:
    """Convert a graph to CSR; missing weights default to 1.0."""
    counts = np.bincount(g.dst, minlength=g.num_vertices)
    row_ptr = np.zeros(g.num_vertices + 1, dtype=VERTEX_DTYPE)
    np.cumsum(counts, out=row_ptr[1:])
    # Canonical edge order is (dst, src), so col_idx is already grouped by
    # row with strictly increasing columns.
    return CsrMatrix(
        num_vertices=g.num_vertices,
        row_ptr=row_ptr,
        col_idx=g.src.astype(VERTEX_DTYPE),
        val=g.edge_weights().astype(VALUE_DTYPE),
    )


def to_coo(g: Graph | CsrMatrix) -> CooMatrix:
    """Convert a graph (or a CSR matrix) to canonical sorted COO."""
    if isinstance(g, CsrMatrix):
        counts = np.diff(g.row_ptr)
        row = np.repeat(np.arange(g.num_vertices, dtype=VERTEX_DTYPE), counts)
        return CooMatrix(g.num_vertices, row, g.col_idx.copy(), g.val.copy())
    return CooMatrix(
        num_vertices=g.num_vertices,
        row=g.dst.astype(VERTEX_DTYPE),
        col=g.src.astype(VERTEX_DTYPE),
        val=g.edge_weights().astype(VALUE_DTYPE),
    )


def to_dense_blocks(g: Graph, block_size: int) -> DenseBlockSet:
    """Pack an intra-community subgraph into per-community dense blocks.

    Every edge must be diagonal-block-local: floor(dst / B) == floor(src / B).
    Communities with no edges are omitted.
    """
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    b = block_size
    dst = g.dst.astype(np.int64)
    src = g.src.astype(np.int64)
    comm = dst // b
    off = np.flatnonzero(comm != src // b)
    if off.size:
        e = int(off[0])
        raise ValueError(
            f"off-diagonal edge (dst={int(dst[e])}, src={int(src[e])}) "
            f"is not block-local for block_size={b}"
        )
    stored = np.unique(comm)
    k = stored.size
    blocks = np.zeros((k, b, b), dtype=VALUE_DTYPE)
    touched = np.zeros((k, b), dtype=bool)
    if k:
        slot = np.searchsorted(stored, comm)
        li = dst - comm * b
        lj = src - comm * b
        blocks[slot, li, lj] = g.edge_weights()
        touched[slot, li] = True
    return DenseBlockSet(
        num_vertices=g.num_vertices,
        block_size=b,
        community_ids=stored.astype(VERTEX_DTYPE),
        blocks=blocks,
        row_touched=touched,
    )


def feature_matrix(data, num_vertices: int | None = None) -> np.ndarray:
    """Validate and normalize a per-vertex feature matrix.

    Returns a C-contiguous float32 array of shape (num_vertices, dim) with
    all entries finite.
    """
    x = np.ascontiguousarray(data, dtype=VALUE_DTYPE)
    if x.ndim != 2:
        raise ValueError(f"features must be 2-d, got shape {x.shape}")
    if num_vertices is not None and x.shape[0] != num_vertices:
        raise ValueError(f"feature rows {x.shape[0]} != num_vertices {num_vertices}")
    if not np.isfinite(x).all():
        raise ValueError("features contain NaN or Inf")
    return x


def random_features(num_vertices: int, dim: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((num_vertices, dim)).astype(VALUE_DTYPE)
