"""Intra-/inter-community decomposition and density statistics.

After reordering, community c owns the fixed id range [c*B, (c+1)*B).
An edge whose endpoints share a block index floor(id / B) lies on the
diagonal of the adjacency matrix and is routed to the intra-community
subgraph; everything else goes to the inter-community subgraph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph

# Byte widths of the CSR arrays (32-bit indices, float32 values).
INDEX_BYTES = 4
VALUE_BYTES = 4


@dataclass(frozen=True)
class DecomposedGraph:
    intra: Graph
    inter: Graph
    block_size: int
    num_vertices: int
    full_in_degree: np.ndarray

    def __post_init__(self):
        self.full_in_degree.setflags(write=False)

    @property
    def num_communities(self) -> int:
        return math.ceil(self.num_vertices / self.block_size)


@dataclass(frozen=True)
class DensityReport:
    full_density: float
    intra_density: float
    inter_density: float
    num_communities: int
    intra_edge_fraction: float

    def as_dict(self) -> dict:
        return {
            "full": self.full_density,
            "intra": self.intra_density,
            "inter": self.inter_density,
            "num_communities": self.num_communities,
            "intra_edge_fraction": self.intra_edge_fraction,
        }


def decompose(g: Graph, block_size: int) -> DecomposedGraph:
    """Split a (reordered) graph by the diagonal block-index rule."""
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    dst = g.dst.astype(np.int64)
    src = g.src.astype(np.int64)
    intra_mask = (dst // block_size) == (src // block_size)
    w = g.weights
    intra = Graph.from_edges(g.num_vertices, dst[intra_mask], src[intra_mask],
                             None if w is None else w[intra_mask])
    inter = Graph.from_edges(g.num_vertices, dst[~intra_mask], src[~intra_mask],
                             None if w is None else w[~intra_mask])
    return DecomposedGraph(
        intra=intra,
        inter=inter,
        block_size=block_size,
        num_vertices=g.num_vertices,
        full_in_degree=g.in_degrees(),
    )


def density_report(d: DecomposedGraph) -> DensityReport:
    """Densities of the full graph and its intra/inter subgraphs.

    full = E / V^2; intra = E_intra over the diagonal block area
    num_communities * B^2; inter = E_inter over the remaining area.
    """
    v = d.num_vertices
    ncomm = d.num_communities
    e_intra = d.intra.num_edges
    e_inter = d.inter.num_edges
    e = e_intra + e_inter
    total = v * v
    diag_area = ncomm * d.block_size * d.block_size
    off_area = total - diag_area
    return DensityReport(
        full_density=e / total if total else 0.0,
        intra_density=e_intra / diag_area if diag_area else 0.0,
        # diag_area can exceed V^2 when B does not divide V; the off-
        # diagonal area is then degenerate and the density reads 0.
        inter_density=e_inter / off_area if off_area > 0 else 0.0,
        num_communities=ncomm,
        intra_edge_fraction=e_intra / e if e else 0.0,
    )


def csr_bytes(num_vertices: int, num_edges: int) -> int:
    """Storage footprint of a CSR matrix: row_ptr + col_idx + val."""
    return (num_vertices + 1) * INDEX_BYTES + num_edges * (INDEX_BYTES + VALUE_BYTES)


def topology_memory_bytes(d: DecomposedGraph) -> tuple[int, int, int]:
    """CSR byte counts for (intra, inter, full) topology storage."""
    return (
        csr_bytes(d.num_vertices, d.intra.num_edges),
        csr_bytes(d.num_vertices, d.inter.num_edges),
        csr_bytes(d.num_vertices, d.intra.num_edges + d.inter.num_edges),
    )
