"""Density-specialized aggregation kernels and the dense reference oracle.

Four production kernel families plus a brute-force dense oracle:

  csr_inter          row-parallel CSR gather, for sparse irregular subgraphs
  csr_intra_blocked  CSR with per-community feature staging and tiling,
                     for diagonal-block intra subgraphs
  coo_atomic         edge-parallel scatter-add with atomic-style
                     accumulation, for extremely sparse subgraphs
  dense_block        batched dense GEMM over per-community blocks
  dense_reference    literal dense-adjacency oracle (tests, crossover)

All arithmetic is float32. The CSR and dense kernels reduce each
destination row in ascending source-id order, so their outputs are
bitwise reproducible; the COO kernel accumulates in a scrambled edge
order and is only guaranteed to a looser tolerance.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .decompose import DecomposedGraph
from .formats import CooMatrix, CsrMatrix, DenseBlockSet, to_coo, to_csr, to_dense_blocks
from .graph import Graph, VALUE_DTYPE

DEFAULT_TILE_BUDGET_BYTES = 48 * 1024
DENSE_ORACLE_CAP = 4096

# Row-chunk edge budget: bounds the gathered-contribution temporary.
_CSR_CHUNK_EDGES = 1 << 19


class KernelError(ValueError):
    """Raised on kernel precondition violations (dims, op, block locality)."""


class AggregateOp(enum.Enum):
    SUM = "sum"
    MEAN = "mean"
    MAX = "max"


class KernelKind(enum.Enum):
    CSR_INTER = "csr_inter"
    CSR_INTRA_BLOCKED = "csr_intra_blocked"
    COO_ATOMIC = "coo_atomic"
    DENSE_BLOCK = "dense_block"
    DENSE_REFERENCE = "dense_reference"


@dataclass
class PartialResult:
    """Aggregation output of one subgraph, before intra/inter combination.

    ``touched[v]`` is set iff vertex v received at least one message.
    Untouched vertices hold the neutral fill 0 for every op.
    """

    values: np.ndarray
    touched: np.ndarray
    op: AggregateOp
    note: str | None = None


def _check_features(num_vertices: int, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=VALUE_DTYPE)
    if x.ndim != 2 or x.shape[0] != num_vertices:
        raise KernelError(
            f"feature matrix shape {x.shape} does not match {num_vertices} vertices"
        )
    return np.ascontiguousarray(x)


def empty_partial(num_vertices: int, dim: int, op: AggregateOp) -> PartialResult:
    return PartialResult(
        values=np.zeros((num_vertices, dim), dtype=VALUE_DTYPE),
        touched=np.zeros(num_vertices, dtype=bool),
        op=op,
    )


def _csr_rows_into(a: CsrMatrix, x: np.ndarray, op: AggregateOp,
                   nz_rows: np.ndarray, out: np.ndarray) -> None:
    """Reduce the given nonempty CSR rows into ``out``.

    Reduction within each row is sequential in ascending column order
    (np.ufunc.reduceat), which pins the floating-point result bitwise.
    """
    if nz_rows.size == 0:
        return
    row_ptr = a.row_ptr.astype(np.int64)
    # Chunk by edge budget so the gathered temporary stays bounded.
    start = 0
    while start < nz_rows.size:
        stop = start + 1
        e0 = row_ptr[nz_rows[start]]
        while stop < nz_rows.size and row_ptr[nz_rows[stop] + 1] - e0 <= _CSR_CHUNK_EDGES:
            stop += 1
        rows = nz_rows[start:stop]
        e1 = row_ptr[rows[-1] + 1]
        cols = a.col_idx[e0:e1]
        starts = row_ptr[rows] - e0
        if op is AggregateOp.MAX:
            # max reduces over raw neighbor features; weights are ignored.
            out[rows] = np.maximum.reduceat(x[cols], starts, axis=0)
        else:
            contrib = a.val[e0:e1, None] * x[cols]
            out[rows] = np.add.reduceat(contrib, starts, axis=0)
        start = stop


def aggregate_csr_inter(a: CsrMatrix, x: np.ndarray, op: AggregateOp,
                        threads: int = 1) -> PartialResult:
    """Row-parallel CSR aggregation (the inter-subgraph kernel)."""
    x = _check_features(a.num_vertices, x)
    counts = np.diff(a.row_ptr)
    touched = counts > 0
    out = np.zeros((a.num_vertices, x.shape[1]), dtype=VALUE_DTYPE)
    nz = np.flatnonzero(counts)
    if nz.size:
        if threads > 1 and a.num_edges > _CSR_CHUNK_EDGES:
            # Destination rows are disjoint across workers, so the result
            # is identical to the single-threaded one.
            chunks = np.array_split(nz, threads)
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(lambda c: _csr_rows_into(a, x, op, c, out), chunks))
        else:
            _csr_rows_into(a, x, op, nz, out)
    return PartialResult(values=out, touched=touched, op=op)


def aggregate_csr_intra_blocked(a: CsrMatrix, x: np.ndarray, op: AggregateOp,
                                block_size: int,
                                tile_budget_bytes: int = DEFAULT_TILE_BUDGET_BYTES,
                                threads: int = 1) -> PartialResult:
    """CSR aggregation for intra subgraphs with per-community staging.

    Each community's B x F source-feature slab is copied into a contiguous
    scratch buffer before the gather; when the slab exceeds the scratch
    budget, the feature dimension is tiled in chunks of
    max(1, tile_budget_bytes // (B * 4)). The per-row reduction order is
    unchanged by tiling, so the output is bitwise identical across
    budgets and equals aggregate_csr_inter on the same input.
    """
    del threads  # community loop is cheap relative to the numpy calls
    if block_size < 1:
        raise KernelError("block_size must be >= 1")
    x = _check_features(a.num_vertices, x)
    b = block_size
    n, f = a.num_vertices, x.shape[1]
    counts = np.diff(a.row_ptr)
    rows = np.repeat(np.arange(n, dtype=np.int64), counts)
    cols = a.col_idx.astype(np.int64)
    bad = np.flatnonzero(rows // b != cols // b)
    if bad.size:
        e = int(bad[0])
        raise KernelError(
            f"off-diagonal edge (dst={int(rows[e])}, src={int(cols[e])}) "
            f"for block_size={b}"
        )
    out = np.zeros((n, f), dtype=VALUE_DTYPE)
    touched = counts > 0
    row_ptr = a.row_ptr.astype(np.int64)
    tile = f if b * f * VALUE_DTYPE().itemsize <= tile_budget_bytes else max(
        1, tile_budget_bytes // (b * VALUE_DTYPE().itemsize))
    scratch = np.empty((b, min(tile, f)), dtype=VALUE_DTYPE)
    for c in np.unique(rows // b) if rows.size else ():
        r0 = int(c) * b
        r1 = min(r0 + b, n)
        e0, e1 = row_ptr[r0], row_ptr[r1]
        lcol = cols[e0:e1] - r0
        val = a.val[e0:e1]
        crows = np.flatnonzero(counts[r0:r1])
        starts = row_ptr[r0 + crows] - e0
        for f0 in range(0, f, tile):
            f1 = min(f0 + tile, f)
            slab = scratch[: r1 - r0, : f1 - f0]
            np.copyto(slab, x[r0:r1, f0:f1])
            if op is AggregateOp.MAX:
                out[r0 + crows, f0:f1] = np.maximum.reduceat(slab[lcol], starts, axis=0)
            else:
                contrib = val[:, None] * slab[lcol]
                out[r0 + crows, f0:f1] = np.add.reduceat(contrib, starts, axis=0)
    return PartialResult(values=out, touched=touched, op=op)


def aggregate_coo_atomic(a: CooMatrix, x: np.ndarray, op: AggregateOp) -> PartialResult:
    """Edge-parallel aggregation with atomic-style accumulation.

    Edges are processed in a scrambled (but per-graph deterministic)
    order to model unordered atomic read-modify-write accumulation; sums
    therefore agree with the CSR kernels only to a looser tolerance.
    """
    x = _check_features(a.num_vertices, x)
    n, f = a.num_vertices, x.shape[1]
    out = np.zeros((n, f), dtype=VALUE_DTYPE)
    touched = np.zeros(n, dtype=bool)
    note = None
    if a.num_edges:
        perm = np.random.default_rng(a.num_edges).permutation(a.num_edges)
        row = a.row[perm].astype(np.int64)
        col = a.col[perm].astype(np.int64)
        val = a.val[perm]
        touched[row] = True
        if op is AggregateOp.MAX:
            # Emulated atomic compare-exchange path.
            note = "max via atomic compare-exchange emulation"
            tmp = np.full((n, f), -np.inf, dtype=VALUE_DTYPE)
            np.maximum.at(tmp, row, x[col])
            out[touched] = tmp[touched]
        else:
            # Per-dim bincount keeps the scatter fast at desk scale; the
            # float64 accumulator is within the kernel's loose tolerance.
            for chunk in range(0, row.size, _CSR_CHUNK_EDGES):
                r = row[chunk:chunk + _CSR_CHUNK_EDGES]
                contrib = val[chunk:chunk + _CSR_CHUNK_EDGES, None] * x[col[chunk:chunk + _CSR_CHUNK_EDGES]]
                for d in range(f):
                    out[:, d] += np.bincount(r, weights=contrib[:, d],
                                             minlength=n).astype(VALUE_DTYPE)
    return PartialResult(values=out, touched=touched, op=op, note=note)


def aggregate_dense_block(d: DenseBlockSet, x: np.ndarray, op: AggregateOp) -> PartialResult:
    """Batched dense GEMM over per-community diagonal blocks.

    Only valid for sum-style accumulation: zero padding corrupts max
    semantics, so op == max is rejected.
    """
    if op is AggregateOp.MAX:
        raise KernelError("dense_block kernel does not support max aggregation")
    x = _check_features(d.num_vertices, x)
    n, f = d.num_vertices, x.shape[1]
    b = d.block_size
    out = np.zeros((n, f), dtype=VALUE_DTYPE)
    touched = np.zeros(n, dtype=bool)
    k = d.community_ids.size
    if k:
        idx = d.community_ids.astype(np.int64)[:, None] * b + np.arange(b)[None, :]
        valid = idx < n
        xs = np.zeros((k, b, f), dtype=VALUE_DTYPE)
        xs[valid] = x[idx[valid]]
        res = np.matmul(d.blocks, xs)
        out[idx[valid]] = res[valid]
        touched[idx[valid]] = d.row_touched[valid]
    return PartialResult(values=out, touched=touched, op=op)


def combine(intra: PartialResult, inter: PartialResult, op: AggregateOp,
            full_in_degree: np.ndarray | None = None) -> np.ndarray:
    """Merge intra and inter partial results into the full-graph output."""
    if intra.op is not op or inter.op is not op:
        raise KernelError(
            f"op mismatch: combine({intra.op}, {inter.op}) as {op}"
        )
    if intra.values.shape != inter.values.shape:
        raise KernelError("partial result shapes differ")
    if op is AggregateOp.SUM:
        return intra.values + inter.values
    if op is AggregateOp.MEAN:
        if full_in_degree is None:
            raise KernelError("mean combine requires the full-graph degree vector")
        deg = np.maximum(np.asarray(full_in_degree), 1).astype(VALUE_DTYPE)
        return (intra.values + inter.values) / deg[:, None]
    out = np.zeros_like(intra.values)
    only_a = intra.touched & ~inter.touched
    only_b = inter.touched & ~intra.touched
    both = intra.touched & inter.touched
    out[only_a] = intra.values[only_a]
    out[only_b] = inter.values[only_b]
    out[both] = np.maximum(intra.values[both], inter.values[both])
    return out


def dense_adjacency(g: Graph) -> np.ndarray:
    """Materialize the V x V float32 adjacency matrix of a graph."""
    a = np.zeros((g.num_vertices, g.num_vertices), dtype=VALUE_DTYPE)
    a[g.dst, g.src] = g.edge_weights()
    return a


def aggregate_dense_reference(g: Graph, x: np.ndarray, op: AggregateOp,
                              cap: int = DENSE_ORACLE_CAP) -> np.ndarray:
    """Brute-force oracle over the dense adjacency matrix."""
    if g.num_vertices > cap:
        raise KernelError(f"dense oracle capped at {cap} vertices, got {g.num_vertices}")
    x = _check_features(g.num_vertices, x)
    if op is AggregateOp.MAX:
        out = np.zeros((g.num_vertices, x.shape[1]), dtype=VALUE_DTYPE)
        counts = np.bincount(g.dst, minlength=g.num_vertices)
        starts = np.zeros(g.num_vertices + 1, dtype=np.int64)
        np.cumsum(counts, out=starts[1:])
        for v in range(g.num_vertices):
            if counts[v]:
                out[v] = x[g.src[starts[v]:starts[v + 1]]].max(axis=0)
        return out
    a = dense_adjacency(g)
    out = a @ x
    if op is AggregateOp.MEAN:
        deg = np.maximum(g.in_degrees(), 1).astype(VALUE_DTYPE)
        out = out / deg[:, None]
    return out.astype(VALUE_DTYPE)


def backward_sum(g_transposed: Graph, d_y: np.ndarray, threads: int = 1) -> np.ndarray:
    """Gradient of sum-aggregation: dX = A^T dY, i.e. aggregation over the
    edge-reversed graph."""
    return aggregate_csr_inter(to_csr(g_transposed), d_y, AggregateOp.SUM,
                               threads=threads).values


@dataclass
class SubgraphExec:
    """Pre-built formats for one subgraph, reused across iterations."""

    graph: Graph
    block_size: int
    csr: CsrMatrix
    coo: CooMatrix
    blocks: DenseBlockSet | None = None

    @classmethod
    def for_intra(cls, g: Graph, block_size: int) -> "SubgraphExec":
        return cls(graph=g, block_size=block_size, csr=to_csr(g), coo=to_coo(g),
                   blocks=to_dense_blocks(g, block_size))

    @classmethod
    def for_inter(cls, g: Graph, block_size: int) -> "SubgraphExec":
        return cls(graph=g, block_size=block_size, csr=to_csr(g), coo=to_coo(g))

    def run(self, kind: KernelKind, x: np.ndarray, op: AggregateOp,
            tile_budget_bytes: int = DEFAULT_TILE_BUDGET_BYTES,
            threads: int = 1) -> PartialResult:
        if kind is KernelKind.CSR_INTER:
            return aggregate_csr_inter(self.csr, x, op, threads=threads)
        if kind is KernelKind.CSR_INTRA_BLOCKED:
            return aggregate_csr_intra_blocked(self.csr, x, op, self.block_size,
                                               tile_budget_bytes=tile_budget_bytes)
        if kind is KernelKind.COO_ATOMIC:
            return aggregate_coo_atomic(self.coo, x, op)
        if kind is KernelKind.DENSE_BLOCK:
            if self.blocks is None:
                raise KernelError("dense_block kernel requires an intra subgraph")
            return aggregate_dense_block(self.blocks, x, op)
        if kind is KernelKind.DENSE_REFERENCE:
            values = aggregate_dense_reference(self.graph, x, op)
            return PartialResult(values=values, touched=self.graph.in_degrees() > 0, op=op)
        raise KernelError(f"unknown kernel {kind}")


def aggregate_full(g: Graph, x: np.ndarray, op: AggregateOp,
                   kernel: KernelKind = KernelKind.CSR_INTER,
                   threads: int = 1) -> np.ndarray:
    """Aggregate over the full graph with one kernel and finalize the op."""
    exec_ = SubgraphExec.for_inter(g, block_size=max(g.num_vertices, 1))
    partial = exec_.run(kernel, x, op, threads=threads)
    other = empty_partial(g.num_vertices, np.asarray(x).shape[1], op)
    return combine(partial, other, op, full_in_degree=g.in_degrees())


def aggregate_decomposed(d: DecomposedGraph, x: np.ndarray, op: AggregateOp,
                         kernel_intra: KernelKind = KernelKind.CSR_INTRA_BLOCKED,
                         kernel_inter: KernelKind = KernelKind.COO_ATOMIC,
                         tile_budget_bytes: int = DEFAULT_TILE_BUDGET_BYTES,
                         threads: int = 1) -> np.ndarray:
    """Aggregate a decomposed graph with one kernel per subgraph role."""
    intra = SubgraphExec.for_intra(d.intra, d.block_size)
    inter = SubgraphExec.for_inter(d.inter, d.block_size)
    p_intra = intra.run(kernel_intra, x, op, tile_budget_bytes=tile_budget_bytes,
                        threads=threads)
    p_inter = inter.run(kernel_inter, x, op, threads=threads)
    return combine(p_intra, p_inter, op, full_in_degree=d.full_in_degree)
