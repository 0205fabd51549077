"""Community-based vertex reordering.

Provides a built-in connectivity-greedy BFS packer as the default
clusterer, plus an import path for partition files produced by external
tools (e.g. METIS). A reordering is represented by a Partition: the
community assignment and the old-id -> new-id permutation that lays the
communities out contiguously.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .graph import Graph


@dataclass(frozen=True)
class Partition:
    """Vertex -> community assignment with its induced relabeling.

    ``community_of[v]`` is the community of original vertex v;
    ``permutation[v]`` its new id. After relabeling, every community
    occupies a contiguous id range of length <= comm_size, and community
    indices are contiguous from 0 in new-id order.
    """

    num_vertices: int
    community_of: np.ndarray
    permutation: np.ndarray
    comm_size: int

    def __post_init__(self):
        self.community_of.setflags(write=False)
        self.permutation.setflags(write=False)

    @property
    def num_communities(self) -> int:
        return int(self.community_of.max()) + 1 if self.num_vertices else 0


def _undirected_adjacency(g: Graph) -> list[np.ndarray]:
    """Sorted unique neighbor lists ignoring edge direction."""
    n = g.num_vertices
    both_a = np.concatenate([g.dst, g.src])
    both_b = np.concatenate([g.src, g.dst])
    order = np.argsort(both_a, kind="stable")
    both_a = both_a[order]
    both_b = both_b[order]
    starts = np.searchsorted(both_a, np.arange(n + 1))
    return [np.unique(both_b[starts[v]:starts[v + 1]]) for v in range(n)]


def _refine_swaps(adj: list[np.ndarray], assigned: np.ndarray, sweeps: int = 3) -> np.ndarray:
    """Size-preserving local refinement of a community assignment.

    For each vertex whose edges point mostly into another community, swap
    it with that community's weakest member when the exchange strictly
    increases the total intra-community edge count. Deterministic: vertices
    are visited in id order.
    """
    n = assigned.size
    assigned = assigned.copy()
    ncomm = int(assigned.max()) + 1 if n else 0
    nbr_sets = [set(a.tolist()) for a in adj]
    for _ in range(sweeps):
        moved = 0
        for v in range(n):
            c0 = int(assigned[v])
            cnt = np.bincount(assigned[adj[v]], minlength=ncomm)
            cstar = int(np.argmax(cnt))
            if cstar == c0 or cnt[cstar] <= cnt[c0]:
                continue
            best_delta, best_u = 0, -1
            for u in np.flatnonzero(assigned == cstar):
                u = int(u)
                cu = np.bincount(assigned[adj[u]], minlength=ncomm)
                vu = 2 if u in nbr_sets[v] else 0
                delta = int(cnt[cstar] + cu[c0] - cnt[c0] - cu[cstar]) - vu
                if delta > best_delta:
                    best_delta, best_u = delta, u
            if best_u >= 0:
                assigned[v], assigned[best_u] = cstar, c0
                moved += 1
        if not moved:
            break
    return assigned


def cluster_bfs(g: Graph, comm_size: int, seed: int = 0) -> Partition:
    """Greedy BFS packing into communities of at most ``comm_size``.

    Repeatedly seeds a region at the unassigned vertex of highest degree
    (ties by lowest id) and grows it over unassigned neighbors, admitting
    the frontier vertex with the most connections into the region first
    (ties by lowest id), until comm_size vertices are collected or the
    frontier is exhausted. A size-preserving swap refinement then corrects
    vertices packed away from their strongest community. Deterministic for
    fixed inputs; ``seed`` is accepted for interface stability but the
    algorithm is tie-broken by vertex id and does not consume randomness.
    """
    del seed
    if comm_size < 1:
        raise ValueError("comm_size must be >= 1")
    n = g.num_vertices
    adj = _undirected_adjacency(g)
    degree = np.array([a.size for a in adj], dtype=np.int64)
    assigned = np.full(n, -1, dtype=np.int64)
    seed_order = np.lexsort((np.arange(n), -degree))
    seed_pos = 0
    new_order: list[int] = []
    comm = 0
    while len(new_order) < n:
        while assigned[seed_order[seed_pos]] >= 0:
            seed_pos += 1
        start = int(seed_order[seed_pos])
        assigned[start] = comm
        new_order.append(start)
        size = 1
        # Frontier as a heap keyed by (-attachment count, vertex id).
        attach: dict[int, int] = {}
        heap: list[tuple[int, int]] = []
        for u in adj[start]:
            u = int(u)
            if assigned[u] < 0:
                attach[u] = 1
                heapq.heappush(heap, (-1, u))
        while size < comm_size and heap:
            neg, v = heapq.heappop(heap)
            if assigned[v] >= 0 or attach.get(v, 0) != -neg:
                continue  # stale heap entry
            assigned[v] = comm
            new_order.append(v)
            size += 1
            del attach[v]
            for u in adj[v]:
                u = int(u)
                if assigned[u] < 0:
                    attach[u] = attach.get(u, 0) + 1
                    heapq.heappush(heap, (-attach[u], u))
        comm += 1
    assigned = _refine_swaps(adj, assigned)
    order = np.lexsort((np.arange(n), assigned))
    permutation = np.empty(n, dtype=np.int64)
    permutation[order] = np.arange(n)
    return Partition(
        num_vertices=n,
        community_of=assigned,
        permutation=permutation,
        comm_size=comm_size,
    )


def load_partition(path, comm_size: int) -> Partition:
    """Load an externally computed partition (one community id per line).

    Vertices are stable-sorted by community id to form the permutation.
    Communities larger than ``comm_size`` are split into chunks of
    comm_size in the sorted order, and community indices are renumbered
    contiguously from 0.
    """
    if comm_size < 1:
        raise ValueError("comm_size must be >= 1")
    raw: list[int] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                cid = int(line)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer community id {line!r}")
            if cid < 0:
                raise ValueError(f"{path}:{lineno}: negative community id {cid}")
            raw.append(cid)
    ids = np.array(raw, dtype=np.int64)
    n = ids.size
    order = np.argsort(ids, kind="stable")
    # Chunk each original community into runs of <= comm_size, then
    # renumber chunks 0, 1, ... in new-id order.
    sorted_ids = ids[order]
    if n:
        is_run_start = np.concatenate([[True], sorted_ids[1:] != sorted_ids[:-1]])
        run_id = np.cumsum(is_run_start) - 1
        run_starts = np.flatnonzero(is_run_start)
        within = np.arange(n) - run_starts[run_id]
        boundary = (within % comm_size) == 0
    else:
        boundary = np.ones(0, dtype=bool)
    chunk_index = np.cumsum(boundary) - 1
    community_of = np.empty(n, dtype=np.int64)
    community_of[order] = chunk_index
    permutation = np.empty(n, dtype=np.int64)
    permutation[order] = np.arange(n)
    return Partition(
        num_vertices=n,
        community_of=community_of,
        permutation=permutation,
        comm_size=comm_size,
    )


def identity_partition(num_vertices: int, comm_size: int) -> Partition:
    """No-op reordering: communities are consecutive id ranges."""
    ids = np.arange(num_vertices, dtype=np.int64)
    return Partition(
        num_vertices=num_vertices,
        community_of=ids // comm_size,
        permutation=ids.copy(),
        comm_size=comm_size,
    )


def apply_reorder(g: Graph, p: Partition) -> Graph:
    """Relabel a graph by a partition's permutation; weights carry over."""
    if p.num_vertices != g.num_vertices:
        raise ValueError(
            f"partition covers {p.num_vertices} vertices, graph has {g.num_vertices}"
        )
    return Graph.from_edges(
        g.num_vertices,
        p.permutation[g.dst],
        p.permutation[g.src],
        g.weights,
    )
