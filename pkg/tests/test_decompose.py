import numpy as np
import pytest

from adaptgear import (
    Graph,
    csr_bytes,
    decompose,
    density_report,
    generate_planted_partition,
    topology_memory_bytes,
)

from conftest import random_graph


class TestDecompose:
    def test_example_split(self):
        # 4 vertices, B=2: (1,0) is intra, (3,0) is inter
        g = Graph.from_edges(4, [1, 3], [0, 0])
        d = decompose(g, 2)
        assert d.intra.edge_set() == {(1, 0)}
        assert d.inter.edge_set() == {(3, 0)}
        assert d.num_communities == 2

    def test_partition_of_edges(self, rng):
        for _ in range(20):
            g = random_graph(rng, weighted=True)
            b = int(rng.integers(1, g.num_vertices + 1))
            d = decompose(g, b)
            assert d.intra.num_edges + d.inter.num_edges == g.num_edges
            assert d.intra.edge_set() | d.inter.edge_set() == g.edge_set()
            assert not (d.intra.edge_set() & d.inter.edge_set())
            # membership rule
            for part, want_intra in ((d.intra, True), (d.inter, False)):
                same = (part.dst.astype(np.int64) // b) == (part.src // b)
                assert bool(same.all()) is want_intra or part.num_edges == 0

    def test_weights_carried(self):
        g = Graph.from_edges(4, [1, 3], [0, 0], [2.0, 5.0])
        d = decompose(g, 2)
        assert d.intra.edge_weights().tolist() == [2.0]
        assert d.inter.edge_weights().tolist() == [5.0]

    def test_full_in_degree(self):
        g = Graph.from_edges(4, [1, 3, 3], [0, 0, 2])
        d = decompose(g, 2)
        assert d.full_in_degree.tolist() == [0, 1, 0, 2]

    def test_ragged_last_community(self):
        g = Graph.from_edges(5, [4], [4])
        d = decompose(g, 2)
        assert d.num_communities == 3
        assert d.intra.num_edges == 1

    def test_invalid_block_size(self):
        g = Graph.from_edges(2, [1], [0])
        with pytest.raises(ValueError):
            decompose(g, 0)


class TestDensityReport:
    def test_exact_values(self):
        # V=4, B=2: diag area 8, off area 8
        g = Graph.from_edges(4, [1, 3], [0, 0])
        r = density_report(decompose(g, 2))
        assert r.full_density == pytest.approx(2 / 16)
        assert r.intra_density == pytest.approx(1 / 8)
        assert r.inter_density == pytest.approx(1 / 8)
        assert r.intra_edge_fraction == pytest.approx(0.5)

    def test_degenerate_off_area(self):
        # V=3, B=2 -> diag area 2*4=8 <= 9 is fine; use B=3 w/ V=3: off area 0
        g = Graph.from_edges(3, [1], [0])
        r = density_report(decompose(g, 3))
        assert r.inter_density == 0.0
        assert r.intra_density == pytest.approx(1 / 9)

    def test_planted_separation(self):
        g, _ = generate_planted_partition(8, 16, 0.5, 0.01, seed=3)
        r = density_report(decompose(g, 16))
        # identity layout of the generator groups vertices before shuffling,
        # so the raw decomposition gives no guarantee; just sanity-check ranges
        assert 0.0 <= r.intra_density <= 1.0
        assert 0.0 <= r.inter_density <= 1.0
        assert r.as_dict()["num_communities"] == 8


class TestTopologyBytes:
    def test_csr_bytes_formula(self):
        assert csr_bytes(4, 2) == 5 * 4 + 2 * 8
        assert csr_bytes(0, 0) == 4

    def test_overhead_algebra(self, rng):
        # intra + inter CSR bytes exceed full by exactly one row_ptr array
        for _ in range(10):
            g = random_graph(rng)
            d = decompose(g, 8)
            intra_b, inter_b, full_b = topology_memory_bytes(d)
            assert intra_b + inter_b - full_b == (g.num_vertices + 1) * 4
