import random

import numpy as np
import pytest

from densecf import (
    EditConflictError,
    EditList,
    Graph,
    GraphMismatchError,
    UndefinedRatioError,
    apply_edits,
    edit_distance_ratio,
    eigenvector_centrality,
    maximal_cliques_containing,
    symmetric_difference_distance,
    triangle_counts,
    two_hop_neighborhood,
)
from densecf.graph import adjacency_matrix, total_triangles, triangles_within

from conftest import (
    brute_force_maximal_cliques,
    brute_force_triangle_total,
    is_maximal_clique,
    random_graph,
)


def triangle(*extra_edges):
    return Graph(5, [(0, 1), (1, 2), (0, 2), *extra_edges])


class TestGraphBasics:
    def test_normalizes_and_dedupes_edges(self):
        g = Graph(3, [(1, 0), (0, 1), (2, 1)])
        assert g.edges == {(0, 1), (1, 2)}

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            Graph(3, [(1, 1)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Graph(3, [(0, 3)])

    def test_add_remove_edges_are_persistent(self):
        g = Graph(3, [(0, 1)])
        h = g.add_edge(1, 2)
        assert g.edges == {(0, 1)}
        assert h.edges == {(0, 1), (1, 2)}
        assert h.remove_edge(0, 1).edges == {(1, 2)}

    def test_add_present_edge_conflicts(self):
        g = Graph(3, [(0, 1)])
        with pytest.raises(EditConflictError):
            g.add_edge(1, 0)
        with pytest.raises(EditConflictError):
            g.remove_edge(1, 2)

    def test_equality_and_hash(self):
        g = Graph(4, [(0, 1), (2, 3)])
        h = Graph(4, [(2, 3), (1, 0)])
        assert g == h
        assert hash(g) == hash(h)
        assert g != Graph(5, [(0, 1), (2, 3)])


class TestDistance:
    def test_identical_graphs_distance_zero(self):
        g = random_graph(8, 0.4, random.Random(1))
        assert symmetric_difference_distance(g, g) == 0

    def test_direct_formula(self):
        g = Graph(4, [(0, 1), (1, 2)])
        h = Graph(4, [(0, 1), (2, 3)])
        assert symmetric_difference_distance(g, h) == 2

    def test_mismatched_node_count(self):
        with pytest.raises(GraphMismatchError):
            symmetric_difference_distance(Graph(3), Graph(4))

    def test_matches_set_xor_oracle(self):
        rng = random.Random(7)
        for _ in range(200):
            g = random_graph(10, rng.uniform(0.1, 0.9), rng)
            h = random_graph(10, rng.uniform(0.1, 0.9), rng)
            assert symmetric_difference_distance(g, h) == len(set(g.edges) ^ set(h.edges))

    def test_metric_axioms_on_random_triples(self):
        rng = random.Random(13)
        for _ in range(1000):
            g = random_graph(8, rng.uniform(0.1, 0.9), rng)
            h = random_graph(8, rng.uniform(0.1, 0.9), rng)
            k = random_graph(8, rng.uniform(0.1, 0.9), rng)
            assert symmetric_difference_distance(g, g) == 0
            assert symmetric_difference_distance(g, h) == symmetric_difference_distance(h, g)
            assert symmetric_difference_distance(g, k) <= (
                symmetric_difference_distance(g, h) + symmetric_difference_distance(h, k)
            )


class TestDistanceRatio:
    def test_identical_nonempty(self):
        g = Graph(3, [(0, 1)])
        assert edit_distance_ratio(g, g) == 0.0

    def test_disjoint_edge_sets(self):
        g = Graph(4, [(0, 1)])
        h = Graph(4, [(2, 3)])
        assert edit_distance_ratio(g, h) == 1.0

    def test_direct_formula(self):
        g = Graph(4, [(0, 1), (1, 2)])
        h = Graph(4, [(0, 1), (2, 3)])
        assert edit_distance_ratio(g, h) == pytest.approx(2 / 3)

    def test_undefined_for_two_empty_graphs(self):
        with pytest.raises(UndefinedRatioError):
            edit_distance_ratio(Graph(4), Graph(4))

    def test_always_in_unit_interval(self):
        rng = random.Random(3)
        for _ in range(200):
            g = random_graph(9, rng.uniform(0.1, 0.9), rng)
            h = random_graph(9, rng.uniform(0.1, 0.9), rng)
            if g.edge_count or h.edge_count:
                assert 0.0 <= edit_distance_ratio(g, h) <= 1.0


class TestTriangleCounts:
    def test_k3(self):
        assert triangle_counts(Graph(3, [(0, 1), (1, 2), (0, 2)])) == [1, 1, 1]

    def test_k4(self):
        assert triangle_counts(Graph.complete(4)) == [3, 3, 3, 3]

    def test_path_has_no_triangles(self):
        assert triangle_counts(Graph(3, [(0, 1), (1, 2)])) == [0, 0, 0]

    def test_sum_equals_three_times_total(self):
        rng = random.Random(11)
        for _ in range(50):
            g = random_graph(10, rng.uniform(0.2, 0.8), rng)
            assert sum(triangle_counts(g)) == 3 * brute_force_triangle_total(g)
            assert total_triangles(g) == brute_force_triangle_total(g)

    def test_triangles_within_subset(self):
        g = Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
        assert triangles_within(g, {0, 1, 2}) == 1
        assert triangles_within(g, {0, 1, 2, 3}) == 1
        assert triangles_within(g, range(6)) == 2


class TestMaximalCliques:
    def test_k4_single_clique(self):
        assert maximal_cliques_containing(Graph.complete(4), 0) == {frozenset({0, 1, 2, 3})}

    def test_triangle_plus_pendant(self):
        g = triangle((2, 3))
        assert maximal_cliques_containing(g, 2) == {frozenset({0, 1, 2}), frozenset({2, 3})}

    def test_isolated_node_yields_singleton(self):
        assert maximal_cliques_containing(Graph(3), 1) == {frozenset({1})}

    def test_matches_exhaustive_enumeration(self):
        rng = random.Random(5)
        for _ in range(20):
            g = random_graph(10, 0.5, rng)
            expected = brute_force_maximal_cliques(g)
            for v in range(g.node_count):
                got = maximal_cliques_containing(g, v)
                assert got == {c for c in expected if v in c}

    def test_every_result_passes_independent_checker(self):
        rng = random.Random(17)
        for _ in range(20):
            g = random_graph(11, rng.uniform(0.3, 0.7), rng)
            v = rng.randrange(g.node_count)
            for clique in maximal_cliques_containing(g, v):
                assert v in clique
                assert is_maximal_clique(g, clique)


class TestTwoHop:
    def test_path(self):
        g = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
        assert two_hop_neighborhood(g, 0) == {1, 2}

    def test_isolated(self):
        assert two_hop_neighborhood(Graph(4), 2) == frozenset()

    def test_complete(self):
        assert two_hop_neighborhood(Graph.complete(4), 0) == {1, 2, 3}

    def test_excludes_center(self):
        rng = random.Random(23)
        for _ in range(30):
            g = random_graph(9, 0.4, rng)
            v = rng.randrange(9)
            assert v not in two_hop_neighborhood(g, v)


class TestApplyEdits:
    def test_empty_edits_is_identity(self):
        g = random_graph(7, 0.5, random.Random(2))
        assert apply_edits(g, EditList.empty()) == g

    def test_k3_minus_edge_is_path(self):
        g = Graph(3, [(0, 1), (1, 2), (0, 2)])
        h = apply_edits(g, EditList(removals=((0, 1),), additions=()))
        assert h.edges == {(1, 2), (0, 2)}
        assert symmetric_difference_distance(g, h) == 1

    def test_round_trip_through_inverse(self):
        rng = random.Random(31)
        for _ in range(100):
            g = random_graph(8, 0.5, rng)
            h = random_graph(8, 0.5, rng)
            edits = EditList.between(g, h)
            assert apply_edits(g, edits) == h
            assert apply_edits(h, edits.inverse()) == g
            assert edits.size == symmetric_difference_distance(g, h)

    def test_conflicting_edits_rejected(self):
        g = Graph(4, [(0, 1)])
        with pytest.raises(EditConflictError):
            apply_edits(g, EditList(removals=((2, 3),), additions=()))
        with pytest.raises(EditConflictError):
            apply_edits(g, EditList(removals=(), additions=((0, 1),)))
        with pytest.raises(EditConflictError):
            apply_edits(g, EditList(removals=((0, 1),), additions=((0, 1),)))


def power_iteration_centrality(g: Graph, tol: float = 1e-12) -> list[float]:
    a = adjacency_matrix(g)
    vec = np.ones(g.node_count)
    for _ in range(100_000):
        nxt = a @ vec
        norm = np.linalg.norm(nxt)
        if norm == 0:
            return [0.0] * g.node_count
        nxt /= norm
        if np.linalg.norm(nxt - vec) < tol:
            vec = nxt
            break
        vec = nxt
    vec = np.clip(vec, 0.0, None)
    return list(vec / vec.max())


class TestEigenvectorCentrality:
    def test_complete_graph_all_equal(self):
        for n in (3, 5, 8):
            scores = eigenvector_centrality(Graph.complete(n))
            assert scores == pytest.approx([1.0] * n)

    def test_star_center_highest(self):
        star = Graph(6, [(0, i) for i in range(1, 6)])
        scores = eigenvector_centrality(star)
        assert scores[0] == 1.0
        assert all(scores[0] > s for s in scores[1:])

    def test_empty_graph_zero_vector(self):
        assert eigenvector_centrality(Graph(4)) == [0.0] * 4

    def test_matches_power_iteration_oracle(self):
        rng = random.Random(41)
        checked = 0
        while checked < 30:
            g = random_graph(10, 0.4, rng)
            expected = power_iteration_centrality(g)
            if g.edge_count == 0 or max(expected) == 0:
                continue
            # connected check via reachability from the highest-degree node
            seen = {0}
            frontier = [0]
            while frontier:
                nxt = [w for v in frontier for w in g.neighbors(v) if w not in seen]
                seen.update(nxt)
                frontier = nxt
            if len(seen) != g.node_count:
                continue
            got = eigenvector_centrality(g)
            assert got == pytest.approx(expected, rel=1e-6, abs=1e-6)
            checked += 1
