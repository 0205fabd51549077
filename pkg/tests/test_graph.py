import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptgear import (
    EdgeListError,
    Graph,
    generate_planted_partition,
    generate_rmat,
    load_edge_list,
    to_coo,
    to_csr,
    to_dense_blocks,
)

from conftest import random_graph


def write_lines(tmp_path, lines, name="g.txt"):
    p = tmp_path / name
    p.write_text("\n".join(lines) + "\n")
    return p


class TestLoadEdgeList:
    def test_basic(self, tmp_path):
        p = write_lines(tmp_path, ["0\t1", "2\t3"])
        g = load_edge_list(p)
        assert g.num_vertices == 4
        assert g.edge_set() == {(1, 0), (3, 2)}

    def test_duplicate_lines_collapse(self, tmp_path):
        p = write_lines(tmp_path, ["0 1", "0 1"])
        g = load_edge_list(p)
        assert g.num_edges == 1

    def test_comments_and_header(self, tmp_path):
        p = write_lines(tmp_path, ["# a comment", "% vertices 10", "0 1"])
        g = load_edge_list(p)
        assert g.num_vertices == 10
        assert g.num_edges == 1

    def test_weighted(self, tmp_path):
        p = write_lines(tmp_path, ["0 1 2.5", "1 0 0.5"])
        g = load_edge_list(p, weighted=True)
        assert g.weights is not None
        assert g.edge_weights().tolist() == [0.5, 2.5]  # sorted by (dst, src)

    def test_duplicate_weighted_edges_sum(self, tmp_path):
        p = write_lines(tmp_path, ["0 1 2.0", "0 1 3.0"])
        g = load_edge_list(p, weighted=True)
        assert g.num_edges == 1
        assert g.edge_weights()[0] == pytest.approx(5.0)

    def test_parse_error_reports_line(self, tmp_path):
        p = write_lines(tmp_path, ["0 1", "junk"])
        with pytest.raises(EdgeListError, match=":2:"):
            load_edge_list(p)

    def test_negative_id_rejected(self, tmp_path):
        p = write_lines(tmp_path, ["0 -3"])
        with pytest.raises(EdgeListError):
            load_edge_list(p)

    def test_empty_file_rejected(self, tmp_path):
        p = write_lines(tmp_path, ["# nothing here"])
        with pytest.raises(EdgeListError, match="no edges"):
            load_edge_list(p)

    def test_citeseer_if_available(self):
        import os
        path = os.environ.get("CITESEER_EDGE_FILE")
        if not path or not os.path.exists(path):
            pytest.skip("citeseer edge file not available")
        g = load_edge_list(path)
        assert g.num_vertices == 3327
        assert g.num_edges == 9228


class TestRmat:
    def test_complete_four_vertices(self):
        g = generate_rmat(4, 16, (0.25, 0.25, 0.25, 0.25), seed=99)
        assert g.num_edges == 16
        assert g.edge_set() == {(d, s) for d in range(4) for s in range(4)}

    def test_exact_count_distinct_in_range(self):
        g = generate_rmat(1024, 2048, (0.57, 0.19, 0.19, 0.05), seed=7)
        assert g.num_edges == 2048
        keys = g.dst.astype(np.int64) * 1024 + g.src
        assert np.unique(keys).size == 2048
        assert g.dst.max() < 1024 and g.src.max() < 1024
        assert g.dst.min() >= 0 and g.src.min() >= 0

    def test_deterministic(self):
        a = generate_rmat(256, 1000, seed=42)
        b = generate_rmat(256, 1000, seed=42)
        assert np.array_equal(a.dst, b.dst) and np.array_equal(a.src, b.src)
        c = generate_rmat(256, 1000, seed=43)
        assert not (np.array_equal(a.dst, c.dst) and np.array_equal(a.src, c.src))

    def test_non_power_of_two_vertices(self):
        g = generate_rmat(100, 500, seed=3)
        assert g.num_edges == 500
        assert g.dst.max() < 100 and g.src.max() < 100

    def test_infeasible_edge_count(self):
        with pytest.raises(ValueError):
            generate_rmat(4, 17, seed=0)

    def test_bad_probabilities(self):
        with pytest.raises(ValueError):
            generate_rmat(16, 10, probs=(0.5, 0.5, 0.5, 0.5), seed=0)


class TestFormats:
    def test_csr_example(self):
        g = Graph.from_edges(4, [1, 3], [0, 2])
        a = to_csr(g)
        assert a.row_ptr.tolist() == [0, 0, 1, 1, 2]
        assert a.col_idx.tolist() == [0, 2]

    def test_csr_empty(self):
        g = Graph.from_edges(3, [], [])
        a = to_csr(g)
        assert a.row_ptr.tolist() == [0, 0, 0, 0]
        assert a.col_idx.size == 0

    def test_coo_example(self):
        g = Graph.from_edges(4, [1, 3], [0, 2])
        m = to_coo(g)
        assert m.row.tolist() == [1, 3]
        assert m.col.tolist() == [0, 2]
        assert m.val.tolist() == [1.0, 1.0]

    def test_coo_self_loop(self):
        g = Graph.from_edges(1, [0], [0])
        m = to_coo(g)
        assert m.row.tolist() == [0] and m.col.tolist() == [0]

    def test_round_trip_random(self, rng):
        for _ in range(10):
            g = random_graph(rng, num_vertices=64, weighted=True)
            direct = to_coo(g)
            via_csr = to_coo(to_csr(g))
            assert np.array_equal(direct.row, via_csr.row)
            assert np.array_equal(direct.col, via_csr.col)
            assert np.array_equal(direct.val, via_csr.val)

    def test_dense_blocks_example(self):
        g = Graph.from_edges(4, [1, 3], [0, 2])
        d = to_dense_blocks(g, 2)
        assert d.community_ids.tolist() == [0, 1]
        assert d.nonzero_count() == 2
        assert d.blocks[0][1][0] == 1.0
        assert d.blocks[1][1][0] == 1.0

    def test_dense_blocks_empty(self):
        g = Graph.from_edges(8, [], [])
        d = to_dense_blocks(g, 4)
        assert d.community_ids.size == 0

    def test_dense_blocks_rejects_off_diagonal(self):
        g = Graph.from_edges(4, [3], [0])
        with pytest.raises(ValueError, match="off-diagonal"):
            to_dense_blocks(g, 2)

    def test_dense_blocks_nonzero_count(self, rng):
        from adaptgear import cluster_bfs, apply_reorder, decompose
        g, _ = generate_planted_partition(8, 16, 0.5, 0.01, seed=5)
        d = decompose(apply_reorder(g, cluster_bfs(g, 16)), 16)
        blocks = to_dense_blocks(d.intra, 16)
        assert blocks.nonzero_count() == d.intra.num_edges


@settings(max_examples=40, deadline=None)
@given(
    num_vertices=st.integers(min_value=1, max_value=512),
    data=st.data(),
)
def test_property_round_trip(num_vertices, data):
    max_edges = min(num_vertices * num_vertices, 2000)
    n_edges = data.draw(st.integers(min_value=0, max_value=max_edges))
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    keys = rng.choice(num_vertices * num_vertices, size=n_edges, replace=False)
    g = Graph.from_edges(num_vertices, keys // num_vertices, keys % num_vertices)
    direct = to_coo(g)
    via = to_coo(to_csr(g))
    assert np.array_equal(direct.row, via.row)
    assert np.array_equal(direct.col, via.col)
    assert np.array_equal(direct.val, via.val)


def test_planted_partition_shape():
    g, labels = generate_planted_partition(4, 8, 0.6, 0.02, seed=11)
    assert g.num_vertices == 32
    assert labels.shape == (32,)
    assert set(labels.tolist()) == {0, 1, 2, 3}
    # In-group edge rate should far exceed the out-group rate.
    same = labels[g.dst] == labels[g.src]
    assert same.mean() > 0.5
