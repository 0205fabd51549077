"""Graph representation, edge-list I/O, and synthetic graph generators.

The internal edge convention is (dst, src) everywhere: an edge (d, s)
carries a message from source vertex s to destination vertex d, i.e. it is
the nonzero A[d][s] of the adjacency matrix. Edge-list files on disk use
the common "src dst" column order and are translated on load.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VERTEX_DTYPE = np.int32
VALUE_DTYPE = np.float32

#: Conventional RMAT quadrant probabilities (a, b, c, d).
RMAT_DEFAULT_PROBS = (0.57, 0.19, 0.19, 0.05)

MAX_VERTICES = 2**31 - 1


class EdgeListError(ValueError):
    """Raised when an edge-list file cannot be parsed."""


@dataclass(frozen=True)
class Graph:
    """Directed graph as a canonical (dst, src) edge set.

    Edges are sorted lexicographically by (dst, src) and duplicates are
    merged (weights summed). Instances are immutable and safe to share
    across threads.
    """

    num_vertices: int
    dst: np.ndarray
    src: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        for arr in (self.dst, self.src, self.weights):
            if arr is not None:
                arr.setflags(write=False)

    @classmethod
    def from_edges(cls, num_vertices, dst, src, weights=None) -> "Graph":
        """Build a canonical graph from raw edge arrays.

        Duplicate (dst, src) pairs are merged; weights, if given, are
        summed over duplicates.
        """
        if num_vertices < 0 or num_vertices > MAX_VERTICES:
            raise ValueError(f"invalid vertex count {num_vertices}")
        dst = np.asarray(dst, dtype=np.int64)
        src = np.asarray(src, dtype=np.int64)
        if dst.shape != src.shape or dst.ndim != 1:
            raise ValueError("dst and src must be 1-d arrays of equal length")
        if weights is not None:
            weights = np.asarray(weights, dtype=VALUE_DTYPE)
            if weights.shape != dst.shape:
                raise ValueError("weights must have one entry per edge")
        if dst.size:
            lo = min(dst.min(), src.min())
            hi = max(dst.max(), src.max())
            if lo < 0 or hi >= num_vertices:
                raise ValueError(
                    f"edge endpoint out of range [0, {num_vertices}): {lo if lo < 0 else hi}"
                )
        keys = dst * num_vertices + src
        uniq, inverse = np.unique(keys, return_inverse=True)
        if weights is not None:
            merged = np.zeros(uniq.size, dtype=np.float64)
            np.add.at(merged, inverse, weights.astype(np.float64))
            weights = merged.astype(VALUE_DTYPE)
        return cls(
            num_vertices=int(num_vertices),
            dst=(uniq // max(num_vertices, 1)).astype(VERTEX_DTYPE),
            src=(uniq % max(num_vertices, 1)).astype(VERTEX_DTYPE),
            weights=weights,
        )

    @property
    def num_edges(self) -> int:
        return int(self.dst.size)

    def edge_weights(self) -> np.ndarray:
        """Per-edge weights; implicit 1.0 when the graph is unweighted."""
        if self.weights is not None:
            return self.weights
        return np.ones(self.num_edges, dtype=VALUE_DTYPE)

    def in_degrees(self) -> np.ndarray:
        """Number of incoming edges per vertex (row counts of A)."""
        return np.bincount(self.dst, minlength=self.num_vertices).astype(np.int64)

    def out_degrees(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.num_vertices).astype(np.int64)

    def reverse(self) -> "Graph":
        """Edge-reversed graph (transpose of the adjacency matrix)."""
        return Graph.from_edges(self.num_vertices, self.src, self.dst, self.weights)

    def edge_set(self) -> set[tuple[int, int]]:
        return set(zip(self.dst.tolist(), self.src.tolist()))


def load_edge_list(path, weighted: bool = False) -> Graph:
    """Load a graph from a plain-text edge list.

    Each data line is "src dst" (or "src dst weight" when ``weighted``),
    whitespace separated. Lines starting with '#' are comments. An
    optional header line "% vertices N" fixes the vertex count; otherwise
    it is 1 + the largest id seen.
    """
    dsts: list[int] = []
    srcs: list[int] = []
    wts: list[float] = []
    header_vertices = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("%"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "vertices":
                    try:
                        header_vertices = int(parts[1])
                    except ValueError:
                        raise EdgeListError(f"{path}:{lineno}: bad vertex header {line!r}")
                continue
            parts = line.split()
            if len(parts) < 2 or (weighted and len(parts) < 3):
                raise EdgeListError(f"{path}:{lineno}: expected "
                                    f"{'src dst weight' if weighted else 'src dst'}, got {line!r}")
            try:
                s = int(parts[0])
                d = int(parts[1])
            except ValueError:
                raise EdgeListError(f"{path}:{lineno}: non-integer vertex id in {line!r}")
            if s < 0 or d < 0:
                raise EdgeListError(f"{path}:{lineno}: negative vertex id in {line!r}")
            if s > MAX_VERTICES or d > MAX_VERTICES:
                raise EdgeListError(f"{path}:{lineno}: vertex id exceeds 32-bit range")
            if weighted:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise EdgeListError(f"{path}:{lineno}: non-numeric weight in {line!r}")
                wts.append(w)
            srcs.append(s)
            dsts.append(d)
    if not dsts:
        raise EdgeListError(f"{path}: no edges found")
    num_vertices = header_vertices
    if num_vertices is None:
        num_vertices = 1 + max(max(dsts), max(srcs))
    return Graph.from_edges(num_vertices, dsts, srcs, wts if weighted else None)


def _next_power_of_two(n: int) -> int:
    return 1 if n <= 1 else 1 << (n - 1).bit_length()


def generate_rmat(num_vertices: int, num_edges: int,
                  probs=RMAT_DEFAULT_PROBS, seed: int = 0) -> Graph:
    """Generate a random graph with recursive-quadrant (RMAT) structure.

    The recursion runs on the next power of two >= ``num_vertices``;
    samples landing outside the requested range are discarded. Exactly
    ``num_edges`` distinct edges are produced (collisions are resampled),
    and the output is deterministic for a fixed seed.
    """
    if num_vertices <= 0:
        raise ValueError("num_vertices must be positive")
    a, b, c, d = (float(p) for p in probs)
    if min(a, b, c, d) < 0 or abs(a + b + c + d - 1.0) > 1e-9:
        raise ValueError(f"quadrant probabilities must be >= 0 and sum to 1, got {probs}")
    total_cells = num_vertices * num_vertices
    if num_edges < 0 or num_edges > total_cells:
        raise ValueError(f"cannot place {num_edges} distinct edges in "
                         f"{num_vertices}x{num_vertices} cells")
    rng = np.random.default_rng(seed)
    if num_edges == total_cells:
        # Complete graph: every cell is an edge, no sampling needed.
        ids = np.arange(num_vertices, dtype=np.int64)
        dst = np.repeat(ids, num_vertices)
        src = np.tile(ids, num_vertices)
        return Graph.from_edges(num_vertices, dst, src)

    vp = _next_power_of_two(num_vertices)
    levels = vp.bit_length() - 1
    bins = np.array([a, a + b, a + b + c])
    bit_values = (1 << np.arange(levels - 1, -1, -1)).astype(np.int64) if levels else None

    keys = np.empty(0, dtype=np.int64)
    stalls = 0
    while keys.size < num_edges:
        need = num_edges - keys.size
        batch = max(4 * need, 1024)
        if levels == 0:
            cand = np.zeros(batch, dtype=np.int64)  # single-vertex graph
        else:
            quad = np.digitize(rng.random((batch, levels)), bins)
            dst = (quad >> 1).astype(np.int64) @ bit_values
            src = (quad & 1).astype(np.int64) @ bit_values
            ok = (dst < num_vertices) & (src < num_vertices)
            cand = dst[ok] * num_vertices + src[ok]
        merged = np.unique(np.concatenate([keys, cand]))
        if merged.size == keys.size:
            stalls += 1
        else:
            stalls = 0
        keys = merged[:num_edges] if merged.size > num_edges else merged
        if stalls >= 50:
            # Skewed probabilities make some cells effectively unreachable;
            # fill the remainder uniformly from the complement.
            if total_cells > 1 << 27:
                raise ValueError("RMAT sampling stalled and the cell space is "
                                 "too large for complement filling")
            complement = np.setdiff1d(np.arange(total_cells, dtype=np.int64), keys)
            extra = rng.choice(complement, size=num_edges - keys.size, replace=False)
            keys = np.sort(np.concatenate([keys, extra]))
            break
    return Graph.from_edges(num_vertices, keys // num_vertices, keys % num_vertices)


def generate_planted_partition(num_groups: int, group_size: int,
                               p_in: float, p_out: float, seed: int = 0,
                               shuffle: bool = True) -> tuple[Graph, np.ndarray]:
    """Generate a directed planted-partition graph with known communities.

    Each ordered pair (u, v), u != v, is an edge with probability ``p_in``
    when u and v share a group and ``p_out`` otherwise. With ``shuffle``
    the vertex ids are randomly permuted so community structure is not
    visible in the ordinal numbering. Returns the graph and the per-vertex
    planted group labels.
    """
    if num_groups < 1 or group_size < 1:
        raise ValueError("num_groups and group_size must be >= 1")
    n = num_groups * group_size
    rng = np.random.default_rng(seed)
    groups = np.repeat(np.arange(num_groups), group_size)
    same = groups[:, None] == groups[None, :]
    thresh = np.where(same, p_in, p_out)
    mask = rng.random((n, n)) < thresh
    np.fill_diagonal(mask, False)
    dst, src = np.nonzero(mask)
    if shuffle:
        id_map = rng.permutation(n)
        dst = id_map[dst]
        src = id_map[src]
        labels = np.empty(n, dtype=np.int64)
        labels[id_map] = groups
    else:
        labels = groups.astype(np.int64)
    return Graph.from_edges(n, dst, src), labels
