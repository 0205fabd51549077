"""Toy forward-only GNN layers over the aggregation kernels.

The aggregation half of each layer runs through the sparse kernels on
either a full Graph (static CSR) or a DecomposedGraph (subgraph kernels);
the update half is a single dense linear transform. GCN normalization is
realized as precomputed edge weights so every kernel stays a plain
weighted SpMM.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decompose import DecomposedGraph
from .graph import Graph, VALUE_DTYPE
from .kernels import (
    AggregateOp,
    KernelKind,
    aggregate_decomposed,
    aggregate_full,
)

MODELS = ("gcn", "gin", "agg_only")


@dataclass(frozen=True)
class LayerParams:
    model: str
    in_dim: int
    out_dim: int
    weight: np.ndarray | None
    gin_eps: float = 0.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.weight is not None:
            if self.weight.shape != (self.in_dim, self.out_dim):
                raise ValueError(
                    f"weight shape {self.weight.shape} != ({self.in_dim}, {self.out_dim})"
                )
            self.weight.setflags(write=False)

    @classmethod
    def seeded(cls, model: str, in_dim: int, out_dim: int, seed: int = 0,
               gin_eps: float = 0.0) -> "LayerParams":
        if model == "agg_only":
            return cls(model=model, in_dim=in_dim, out_dim=in_dim, weight=None)
        rng = np.random.default_rng(seed)
        w = rng.uniform(-0.1, 0.1, size=(in_dim, out_dim)).astype(VALUE_DTYPE)
        return cls(model=model, in_dim=in_dim, out_dim=out_dim, weight=w,
                   gin_eps=gin_eps)


def gcn_normalize(g: Graph) -> Graph:
    """Add self-loops and set edge weights to 1/sqrt(deg(d) * deg(s)).

    Degrees are in-degrees of A + I (each edge counted once after the
    union with self-loops). Applied before reordering/decomposition so
    self-loop edges always land in the intra subgraph.
    """
    loops = np.arange(g.num_vertices, dtype=np.int64)
    dst = np.concatenate([g.dst.astype(np.int64), loops])
    src = np.concatenate([g.src.astype(np.int64), loops])
    # Union without weight merging: binary A + I.
    keys = np.unique(dst * g.num_vertices + src)
    dst = keys // g.num_vertices
    src = keys % g.num_vertices
    deg = np.bincount(dst, minlength=g.num_vertices).astype(np.float64)
    w = 1.0 / np.sqrt(deg[dst] * deg[src])
    return Graph.from_edges(g.num_vertices, dst, src, w.astype(VALUE_DTYPE))


def _aggregate(subject, x, op: AggregateOp, *, kernel_intra, kernel_inter,
               threads: int = 1) -> np.ndarray:
    if isinstance(subject, DecomposedGraph):
        return aggregate_decomposed(subject, x, op, kernel_intra=kernel_intra,
                                    kernel_inter=kernel_inter, threads=threads)
    if isinstance(subject, Graph):
        return aggregate_full(subject, x, op, threads=threads)
    raise TypeError(f"expected Graph or DecomposedGraph, got {type(subject)!r}")


def gcn_layer_forward(subject, x: np.ndarray, params: LayerParams,
                      kernel_intra: KernelKind = KernelKind.CSR_INTRA_BLOCKED,
                      kernel_inter: KernelKind = KernelKind.COO_ATOMIC,
                      threads: int = 1) -> np.ndarray:
    """One GCN layer: (normalized-A @ X) @ W.

    ``subject`` must already carry GCN-normalized edge weights (see
    gcn_normalize), applied before any decomposition.
    """
    if params.model != "gcn":
        raise ValueError(f"gcn_layer_forward called with model {params.model!r}")
    agg = _aggregate(subject, x, AggregateOp.SUM, kernel_intra=kernel_intra,
                     kernel_inter=kernel_inter, threads=threads)
    return (agg @ params.weight).astype(VALUE_DTYPE)


def gin_layer_forward(subject, x: np.ndarray, params: LayerParams,
                      kernel_intra: KernelKind = KernelKind.CSR_INTRA_BLOCKED,
                      kernel_inter: KernelKind = KernelKind.COO_ATOMIC,
                      threads: int = 1) -> np.ndarray:
    """One GIN layer: ((1 + eps) * X + A @ X) @ W with a single-linear MLP."""
    if params.model != "gin":
        raise ValueError(f"gin_layer_forward called with model {params.model!r}")
    agg = _aggregate(subject, x, AggregateOp.SUM, kernel_intra=kernel_intra,
                     kernel_inter=kernel_inter, threads=threads)
    h = np.float32(1.0 + params.gin_eps) * np.asarray(x, dtype=VALUE_DTYPE) + agg
    return (h @ params.weight).astype(VALUE_DTYPE)
