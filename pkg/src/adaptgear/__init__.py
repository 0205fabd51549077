"""Subgraph-level adaptive sparse kernels for GNN aggregation on CPU.

Decomposes a reordered graph into dense intra-community and sparse
inter-community subgraphs, runs each with a density-specialized kernel,
and adaptively locks in the fastest kernel per subgraph from early-
iteration timing feedback.
"""

from .decompose import (
    DecomposedGraph,
    DensityReport,
    csr_bytes,
    decompose,
    density_report,
    topology_memory_bytes,
)
from .formats import (
    CooMatrix,
    CsrMatrix,
    DenseBlockSet,
    feature_matrix,
    random_features,
    to_coo,
    to_csr,
    to_dense_blocks,
)
from .graph import (
    EdgeListError,
    Graph,
    generate_planted_partition,
    generate_rmat,
    load_edge_list,
)
from .kernels import (
    AggregateOp,
    KernelError,
    KernelKind,
    PartialResult,
    SubgraphExec,
    aggregate_coo_atomic,
    aggregate_csr_inter,
    aggregate_csr_intra_blocked,
    aggregate_decomposed,
    aggregate_dense_block,
    aggregate_dense_reference,
    aggregate_full,
    backward_sum,
    combine,
    empty_partial,
)
from .models import LayerParams, gcn_layer_forward, gcn_normalize, gin_layer_forward
from .reorder import Partition, apply_reorder, cluster_bfs, identity_partition, load_partition
from .selector import (
    IterationPlan,
    IterationRecord,
    Phase,
    SelectorError,
    SelectorState,
    plan_iteration,
    record_timing,
    run_training_loop,
)

__version__ = "0.1.0"
