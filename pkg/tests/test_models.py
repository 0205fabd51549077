import numpy as np
import pytest

from adaptgear import (
    AggregateOp,
    LayerParams,
    aggregate_dense_reference,
    apply_reorder,
    cluster_bfs,
    decompose,
    gcn_layer_forward,
    gcn_normalize,
    gin_layer_forward,
)
from adaptgear.kernels import dense_adjacency

from conftest import random_graph, rel_error


class TestGcnNormalize:
    def test_triangle(self):
        # 3-cycle; after adding self-loops every vertex has in-degree 2
        from adaptgear import Graph
        g = gcn_normalize(Graph.from_edges(3, [1, 2, 0], [0, 1, 2]))
        assert g.num_edges == 6
        np.testing.assert_allclose(g.edge_weights(), 0.5)

    def test_existing_self_loop_not_double_counted(self):
        from adaptgear import Graph
        g = gcn_normalize(Graph.from_edges(2, [0, 1], [0, 0]))
        # edges: (0,0), (1,0), (1,1); deg = [1, 2]
        assert g.num_edges == 3
        w = {(int(d), int(s)): float(v)
             for d, s, v in zip(g.dst, g.src, g.edge_weights())}
        assert w[(0, 0)] == pytest.approx(1.0)
        assert w[(1, 0)] == pytest.approx(1 / np.sqrt(2))
        assert w[(1, 1)] == pytest.approx(0.5)

    def test_symmetric_normalization_oracle(self, rng):
        g = random_graph(rng, num_vertices=40)
        gn = gcn_normalize(g)
        a = dense_adjacency(g)
        a_hat = a + np.eye(40, dtype=np.float32)
        a_hat = (a_hat > 0).astype(np.float64)
        deg = a_hat.sum(axis=1)
        expect = a_hat / np.sqrt(np.outer(deg, deg))
        np.testing.assert_allclose(dense_adjacency(gn), expect, rtol=1e-6)


class TestLayerParams:
    def test_seeded_deterministic(self):
        a = LayerParams.seeded("gcn", 8, 4, seed=5)
        b = LayerParams.seeded("gcn", 8, 4, seed=5)
        assert np.array_equal(a.weight, b.weight)
        assert a.weight.dtype == np.float32
        assert np.abs(a.weight).max() <= 0.1

    def test_agg_only_has_no_weight(self):
        p = LayerParams.seeded("agg_only", 8, 4)
        assert p.weight is None and p.out_dim == 8

    def test_bad_model(self):
        with pytest.raises(ValueError):
            LayerParams(model="mlp", in_dim=2, out_dim=2, weight=None)


class TestForward:
    def _setup(self, rng, model):
        g = gcn_normalize(random_graph(rng, num_vertices=64, density=0.06))
        p = cluster_bfs(g, 16)
        d = decompose(apply_reorder(g, p), 16)
        x = rng.standard_normal((64, 8)).astype(np.float32)
        x_perm = np.empty_like(x)
        x_perm[np.asarray(p.permutation)] = x
        params = LayerParams.seeded(model, 8, 4, seed=1, gin_eps=0.2)
        return g, p, d, x, x_perm, params

    def test_gcn_decomposed_matches_dense(self, rng):
        g, p, d, x, x_perm, params = self._setup(rng, "gcn")
        got = gcn_layer_forward(d, x_perm, params)
        ref = aggregate_dense_reference(g, x, AggregateOp.SUM) @ params.weight
        got_back = got[np.asarray(p.permutation)]
        assert rel_error(got_back, ref) < 1e-4

    def test_gin_decomposed_matches_dense(self, rng):
        g, p, d, x, x_perm, params = self._setup(rng, "gin")
        got = gin_layer_forward(d, x_perm, params)
        agg = aggregate_dense_reference(g, x, AggregateOp.SUM)
        ref = (np.float32(1.2) * x + agg) @ params.weight
        got_back = got[np.asarray(p.permutation)]
        assert rel_error(got_back, ref) < 1e-4

    def test_full_graph_path(self, rng):
        g = gcn_normalize(random_graph(rng, num_vertices=32))
        x = rng.standard_normal((32, 4)).astype(np.float32)
        params = LayerParams.seeded("gcn", 4, 3, seed=2)
        got = gcn_layer_forward(g, x, params)
        ref = aggregate_dense_reference(g, x, AggregateOp.SUM) @ params.weight
        assert rel_error(got, ref) < 1e-5

    def test_model_mismatch(self, rng):
        g = random_graph(rng, num_vertices=8)
        params = LayerParams.seeded("gin", 2, 2)
        with pytest.raises(ValueError):
            gcn_layer_forward(g, np.zeros((8, 2), np.float32), params)
