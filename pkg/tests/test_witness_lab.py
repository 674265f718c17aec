import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import floyd_warshall, graphs, random_connected, reference_partition
from oracle_recon.distance_oracle import DistanceOracle
from oracle_recon.errors import NearPairError
from oracle_recon.graph_core import (
    Graph,
    GraphParams,
    complete_graph,
    cycle_graph,
    gnp_generate,
    p_from_c,
    path_graph,
)
from oracle_recon.witness_lab import (
    chernoff_tail,
    common_sphere,
    degree_concentration_check,
    isolated_non_witnesses,
    isolated_vertex_check,
    near_pair_count,
    partition_census,
    profile_census,
    sample_non_edges,
    sphere_partition,
    witness_census,
    witness_set,
)
from oracle_recon.witness_lab.partition import horizon_index


def as_set(a):
    return set(np.asarray(a).tolist())


class TestWitnessSet:
    def test_path(self):
        w = witness_set(path_graph(5), 0, 3)
        assert as_set(w.witnesses) == {0, 3, 4}
        assert w.count == 3 and w.dist_uv == 3

    def test_cycle(self):
        assert as_set(witness_set(cycle_graph(4), 0, 2).witnesses) == {0, 2}

    def test_k4_minus_edge(self):
        g = Graph.from_edges(4, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
        assert as_set(witness_set(g, 0, 1).witnesses) == {0, 1}

    def test_rejects_edges_and_self(self):
        with pytest.raises(ValueError):
            witness_set(path_graph(4), 0, 1)
        with pytest.raises(ValueError):
            witness_set(path_graph(4), 2, 2)

    def test_density_ratio(self):
        g = path_graph(5)
        w = witness_set(g, 0, 3, delta=2.0)
        assert w.density_ratio == pytest.approx(3 / (5 / 4))

    @settings(max_examples=60)
    @given(graphs(min_n=3, max_n=40, connected=True), st.data())
    def test_soundness_through_oracle(self, g, data):
        non_edges = [(u, v) for u in range(g.n) for v in range(u + 1, g.n)
                     if not g.has_edge(u, v)]
        if not non_edges:
            return
        u, v = data.draw(st.sampled_from(non_edges))
        o = DistanceOracle(g)
        for x in witness_set(g, u, v).witnesses.tolist():
            assert abs(o.query(x, u) - o.query(x, v)) >= 2
        # and conversely no edge is ever witnessed
        D = floyd_warshall(g)
        for a, b in g.edges().tolist():
            assert np.all(np.abs(D[:, a] - D[:, b]) <= 1)


class TestSpheres:
    def test_path_spheres(self):
        g = path_graph(5)
        assert as_set(common_sphere(g, 0, 4, 1)) == {1, 3}
        assert as_set(common_sphere(g, 0, 4, 2)) == {2}
        assert as_set(common_sphere(g, 0, 4, 0)) == {0, 4}

    @given(graphs(min_n=2, max_n=30, connected=True), st.data())
    def test_spheres_cover_vertices(self, g, data):
        u = data.draw(st.integers(0, g.n - 1))
        v = data.draw(st.integers(0, g.n - 1).filter(lambda x: x != u))
        seen = []
        for k in range(g.n):
            seen.extend(common_sphere(g, u, v, k).tolist())
        assert sorted(seen) == list(range(g.n))


class TestPartition:
    def test_path_example(self):
        part = sphere_partition(path_graph(5), 0, 4)
        L1, L2 = part.layer(1), part.layer(2)
        assert as_set(L1.a) == {1, 3} and L1.b.size == 0
        assert L2.bad1.size == 0 and L2.bad2.size == 0 and as_set(L2.bad3) == {2}
        assert as_set(L2.b) == {2} and L2.a.size == 0
        assert L2.b_fraction == 1.0

    def test_pendant_example(self):
        # Path 0-1-2-3 with a pendant 4 hanging off vertex 1.
        g = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (1, 4)])
        part = sphere_partition(g, 0, 3)
        assert as_set(part.layer(1).a) == {1, 2}
        L2 = part.layer(2)
        assert as_set(L2.sphere) == {4}
        assert as_set(L2.bad2) == {4} and as_set(L2.b) == {4} and L2.a.size == 0

    def test_tree_like_pair_is_clean(self):
        # u=0 and v=3 joined by a path of length 3, with disjoint trees hanging
        # off each endpoint: every layer beyond the first is edge-free and
        # single-parent, so nothing is ever contaminated.
        edges = [(0, 1), (1, 2), (2, 3), (0, 4), (0, 5), (4, 6), (5, 7), (3, 8), (8, 9)]
        g = Graph.from_edges(10, edges)
        part = sphere_partition(g, 0, 3)
        assert [as_set(L.sphere) for L in part.layers] == [{1, 2, 4, 5, 8}, {6, 7, 9}]
        assert all(L.b.size == 0 for L in part.layers)
        census = partition_census(g, [(0, 3)], min_layer_size=1)
        assert all(f == 0 for fs in census.b_fraction_by_k.values() for f in fs)
        assert census.pairs[0].isolated_non_witnesses == 0
        assert witness_set(g, 0, 3).witnesses.tolist() == [0, 3, 4, 5, 6, 7, 8, 9]

    def test_near_pairs_rejected(self):
        with pytest.raises(NearPairError):
            sphere_partition(path_graph(5), 0, 2)
        with pytest.raises(NearPairError):
            sphere_partition(path_graph(5), 0, 1)

    def test_horizon_prefix_rule(self):
        assert horizon_index([2, 3, 9, 50], 10.0) == 3
        assert horizon_index([2, 3, 11, 5], 10.0) == 2
        assert horizon_index([2, 30], 1.0) == 0
        assert horizon_index([2, 3, 4], 100.0) == 2   # capped at the last layer

    @settings(max_examples=80)
    @given(graphs(min_n=4, max_n=40, connected=True), st.data())
    def test_matches_reference_recursion(self, g, data):
        D = floyd_warshall(g)
        far = [(u, v) for u in range(g.n) for v in range(u + 1, g.n) if D[u, v] >= 3]
        if not far:
            return
        u, v = data.draw(st.sampled_from(far))
        part = sphere_partition(g, u, v)
        ref = reference_partition(g, u, v)
        assert len(part.layers) == len(ref)
        for L, R in zip(part.layers, ref):
            for key in ("sphere", "a", "b", "bad1", "bad2", "bad3"):
                assert as_set(getattr(L, key)) == R[key], key
            assert as_set(L.a) | as_set(L.b) == as_set(L.sphere)
            assert not as_set(L.a) & as_set(L.b)
        # Clean vertices with no neighbour in their own sphere are witnesses.
        assert isolated_non_witnesses(g, part) == []

    def test_census_on_gnp(self):
        n = 1024
        g, _ = gnp_generate(GraphParams(n, p_from_c(n, 4), seed=3))
        rng = np.random.default_rng(0)
        pairs = [(u, v) for u, v, du, _, _ in sample_non_edges(g, rng, 20, far_only=True)
                 if du[v] >= 3]
        census = partition_census(g, pairs)
        assert len(census.pairs) == len(pairs)
        assert census.total_isolated_non_witnesses == 0
        for row in census.layer_rows:
            _, _, size, a, b, b1, b2, b3 = row
            assert a + b == size and b <= b1 + b2 + b3
        assert all(0 <= f <= 1 for fs in census.b_fraction_by_k.values() for f in fs)

    def test_census_rejects_empty(self):
        with pytest.raises(ValueError):
            partition_census(path_graph(5), [])

    def test_small_layers_excluded(self):
        census = partition_census(path_graph(5), [(0, 4)])
        assert census.excluded_layers == 2
        assert census.b_fraction_by_k == {}


class TestProfileCensus:
    def test_path(self):
        c = profile_census(path_graph(4), 0, 3)
        assert c.cells == {(0, 3): 1, (1, 2): 1, (2, 1): 1, (3, 0): 1}
        assert c.total == 4
        assert c.rows() == [(0, 3, 1), (1, 2, 1), (2, 1, 1), (3, 0, 1)]

    @given(graphs(min_n=2, max_n=40, connected=True), st.data())
    def test_invariants(self, g, data):
        u = data.draw(st.integers(0, g.n - 1))
        v = data.draw(st.integers(0, g.n - 1).filter(lambda x: x != u))
        c = profile_census(g, u, v)
        D = floyd_warshall(g)
        d = int(D[u, v])
        assert c.total == g.n
        assert c.cell(0, d) == 1
        for (i, j), cnt in c.cells.items():
            assert cnt > 0 and abs(i - j) <= d and i + j >= d
        if c.cell(1, 1):
            assert d <= 2
        assert c.row_sums() == {i: int(np.sum(D[u] == i)) for i in set(D[u].tolist())}
        assert c.col_sums() == {j: int(np.sum(D[v] == j)) for j in set(D[v].tolist())}


class TestNearPairs:
    def test_examples(self):
        assert near_pair_count(complete_graph(4)) == 6
        assert near_pair_count(path_graph(5)) == 7

    @given(graphs(min_n=2, max_n=40, connected=True))
    def test_matches_all_pairs(self, g):
        D = floyd_warshall(g)
        iu = np.triu_indices(g.n, 1)
        assert near_pair_count(g) == int(np.count_nonzero(D[iu] <= 2))

    def test_softened_bound_gnp(self):
        n = 4096
        g, _ = gnp_generate(GraphParams(n, p_from_c(n, 4), seed=0))
        d = 2 * g.m / n
        assert near_pair_count(g) <= 3 * n * d * d


class TestCensus:
    def test_single_non_edge(self):
        g = Graph.from_edges(5, [e for e in complete_graph(5).edges().tolist() if e != [1, 3]])
        c = witness_census(g, 10, np.random.default_rng(0))
        assert c.sampled == 1 and (c.u[0], c.v[0]) == (1, 3)
        ex = witness_census(g, 0, None, exact=True)
        assert ex.sampled == 1 and ex.count[0] == c.count[0]

    def test_fractions(self):
        g, _ = gnp_generate(GraphParams(400, p_from_c(400, 3), seed=2))
        c = witness_census(g, 150, np.random.default_rng(1))
        assert c.near_fraction + c.far_fraction == pytest.approx(1.0)
        assert 0.0 <= c.far_fraction_dense <= 1.0
        pairs = list(zip(c.u.tolist(), c.v.tolist()))
        assert len(set(pairs)) == len(pairs)
        D = floyd_warshall(g)
        for i, (u, v) in enumerate(pairs):
            assert not g.has_edge(u, v)
            assert c.dist_uv[i] == D[u, v]
            assert c.count[i] == np.count_nonzero(np.abs(D[u] - D[v]) >= 2)

    def test_exact_mode_matches_bruteforce_and_is_gated(self):
        g = random_connected(np.random.default_rng(4), 60, 0.06)
        ex = witness_census(g, 0, None, exact=True)
        D = floyd_warshall(g)
        non_edges = [(u, v) for u in range(60) for v in range(u + 1, 60) if D[u, v] >= 2]
        assert ex.sampled == len(non_edges)
        lookup = {(int(a), int(b)): int(c) for a, b, c in zip(ex.u, ex.v, ex.count)}
        for u, v in non_edges:
            assert lookup[(u, v)] == np.count_nonzero(np.abs(D[u] - D[v]) >= 2)
        with pytest.raises(ValueError):
            witness_census(g, 0, None, exact=True, exact_max_n=50)

    def test_far_only_quota(self):
        g, _ = gnp_generate(GraphParams(500, p_from_c(500, 3), seed=5))
        c = witness_census(g, 30, np.random.default_rng(2), far_only=True)
        assert c.far_count == 30

    def test_density_uses_realized_degree_by_default(self):
        g, _ = gnp_generate(GraphParams(300, p_from_c(300, 4), seed=6))
        c = witness_census(g, 5, np.random.default_rng(0), p=p_from_c(300, 4))
        d = 2 * g.m / g.n
        assert c.delta_used == pytest.approx(d)
        assert np.allclose(c.density_ratio, c.count / (300 / d ** 2))


class TestChernoff:
    def test_examples(self):
        assert chernoff_tail(0.5, 12) == pytest.approx(2 * math.exp(-1), rel=1e-12)
        assert chernoff_tail(0.5, 12) == pytest.approx(0.73576, abs=1e-5)
        assert chernoff_tail(1.0, 3, "upper") == pytest.approx(math.exp(-1))
        assert chernoff_tail(0.0, 17.0, "upper") == 1.0

    def test_domains(self):
        for bad in (0.0, 1.0, -0.1):
            with pytest.raises(ValueError):
                chernoff_tail(bad, 5)
        with pytest.raises(ValueError):
            chernoff_tail(-0.1, 5, "upper")
        with pytest.raises(ValueError):
            chernoff_tail(0.5, 5, "sideways")
        with pytest.raises(ValueError):
            chernoff_tail(0.5, -1)

    @given(st.floats(0.01, 0.99), st.floats(0.01, 0.99),
           st.floats(0.0, 500.0), st.floats(0.0, 500.0))
    def test_monotone_two_sided(self, d1, d2, m1, m2):
        (d1, d2), (m1, m2) = sorted((d1, d2)), sorted((m1, m2))
        assert chernoff_tail(d2, m1) <= chernoff_tail(d1, m1)
        assert chernoff_tail(d1, m2) <= chernoff_tail(d1, m1)

    @given(st.floats(0.0, 50.0), st.floats(0.0, 50.0),
           st.floats(0.0, 500.0), st.floats(0.0, 500.0))
    def test_monotone_upper(self, d1, d2, m1, m2):
        (d1, d2), (m1, m2) = sorted((d1, d2)), sorted((m1, m2))
        assert chernoff_tail(d2, m1, "upper") <= chernoff_tail(d1, m1, "upper")
        assert chernoff_tail(d1, m2, "upper") <= chernoff_tail(d1, m1, "upper")


class TestConcentration:
    def test_budget_at_delta_100(self):
        rep = degree_concentration_check(GraphParams(10_000, 0.01, seed=0), 3)
        assert rep.budget == pytest.approx(2 * math.exp(-rep.delta / 12))
        assert rep.budget == pytest.approx(4.8e-4, rel=0.02)
        assert rep.expected_out_of_band < 5

    def test_complete_graph_has_no_outliers(self):
        rep = degree_concentration_check(GraphParams(50, 1.0), 2)
        assert rep.out_of_band.tolist() == [0, 0]

    def test_band_counts_match_direct_degrees(self):
        params = GraphParams(300, 0.05, seed=9)
        rep = degree_concentration_check(params, 4)
        rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(9).spawn(4)]
        from oracle_recon.graph_core import gnp_edges
        for t, r in enumerate(rngs):
            lo, hi = gnp_edges(300, 0.05, r)
            g = Graph.from_edges(300, np.column_stack([lo, hi]))
            d = g.degrees
            assert rep.out_of_band[t] == np.count_nonzero((d < 0.5 * rep.delta)
                                                          | (d > 1.5 * rep.delta))

    def test_c8_share_below_ten_budgets(self):
        n = 4096
        rep = degree_concentration_check(GraphParams(n, p_from_c(n, 8), seed=1), 40)
        assert rep.share_below(10.0) >= 0.95

    def test_rejects_sparse(self):
        with pytest.raises(ValueError):
            degree_concentration_check(GraphParams(10, 0.05), 1)

    def test_isolated_bounds(self):
        rep = isolated_vertex_check(1000, 10, 50, seed=0)
        assert rep.p == pytest.approx(1e-4)
        assert rep.bound == 400
        assert rep.failure_bound == pytest.approx(2 * math.exp(-1000 / 30))
        assert rep.exceedances == 0
        assert 40 < rep.non_isolated.mean() < 200

    def test_isolated_empty_limit(self):
        rep = isolated_vertex_check(100, 5, 5, p=0.0)
        assert rep.non_isolated.tolist() == [0] * 5

    def test_isolated_rejects_large_p(self):
        with pytest.raises(ValueError):
            isolated_vertex_check(100, 5, 1, p=0.5)


def test_partition_census_median_contamination_at_horizon():
    n = 8192
    g, _ = gnp_generate(GraphParams(n, p_from_c(n, 4), seed=0))
    rng = np.random.default_rng(1)
    pairs = [(u, v) for u, v, du, _, _ in sample_non_edges(g, rng, 100, far_only=True)
             if du[v] >= 3]
    assert len(pairs) == 100
    census = partition_census(g, pairs)
    assert census.median_b_fraction_at_ell < 0.5
    assert census.total_isolated_non_witnesses == 0
