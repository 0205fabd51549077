import numpy as np
import pytest

from adaptgear import Graph


def random_graph(rng, num_vertices=None, density=None, weighted=False):
    """Random directed graph for equivalence testing."""
    if num_vertices is None:
        num_vertices = int(rng.integers(2, 513))
    if density is None:
        density = float(rng.uniform(0.001, 0.2))
    num_edges = max(1, int(density * num_vertices * num_vertices))
    num_edges = min(num_edges, num_vertices * num_vertices)
    keys = rng.choice(num_vertices * num_vertices, size=num_edges, replace=False)
    dst = keys // num_vertices
    src = keys % num_vertices
    weights = rng.uniform(0.1, 2.0, size=num_edges).astype(np.float32) if weighted else None
    return Graph.from_edges(num_vertices, dst, src, weights)


def rel_error(values, reference):
    ref = np.asarray(reference, dtype=np.float64)
    diff = np.abs(np.asarray(values, dtype=np.float64) - ref)
    scale = np.maximum(np.abs(ref), 1.0)
    return float((diff / scale).max()) if diff.size else 0.0


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
