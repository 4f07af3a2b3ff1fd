"""Tests for elimination-induced graphs, orderings, and sparsity patterns."""

import itertools

import numpy as np
import pytest

from sing.graphops import (
    Graph,
    Ordering,
    elimination_fill_count,
    graph_from_json_dict,
    graph_to_json_dict,
    induced_graph,
    order_min_degree,
    order_min_fill,
    order_reverse_cholesky,
    permute_columns,
    relabel_graph,
    sparsity_pattern,
)

from _oracles import eliminate_brute

FIVE_NODE = Graph.from_edges(5, [(1, 2), (1, 3), (2, 3), (3, 4), (4, 5)])


def oracle_induced(g: Graph, ordering: Ordering) -> Graph:
    positions = {v: ordering.position(v) for v in range(1, g.p + 1)}
    return Graph(g.p, frozenset(eliminate_brute(g.p, set(g.edges), positions)))


def random_graph(rng: np.random.Generator, p: int, edge_prob: float = 0.45) -> Graph:
    edges = {
        (j, k)
        for j in range(1, p + 1)
        for k in range(j + 1, p + 1)
        if rng.uniform() < edge_prob
    }
    return Graph(p, frozenset(edges))


def random_ordering(rng: np.random.Generator, p: int) -> Ordering:
    return Ordering(tuple(int(v) for v in rng.permutation(p) + 1))


def random_ktree(rng: np.random.Generator, p: int, k: int = 2) -> Graph:
    """Proper random k-tree: each new vertex joins an existing k-clique, so
    every vertex's lower neighborhood is a clique and the identity ordering
    has zero fill in the position-p-first game."""
    k = min(k, p - 1)
    edges = set()
    init = list(range(1, k + 2))
    for a, b in itertools.combinations(init, 2):
        edges.add((a, b))
    cliques = [tuple(c) for c in itertools.combinations(init, k)]
    for m in range(k + 2, p + 1):
        base = cliques[int(rng.integers(0, len(cliques)))]
        for a in base:
            edges.add((a, m))
        for sub in itertools.combinations(base, k - 1):
            cliques.append(tuple(sorted(sub + (m,))))
    return Graph.from_edges(p, edges)


class TestInducedGraph:
    def test_five_node_identity_no_fill(self):
        got = induced_graph(FIVE_NODE, Ordering.identity(5))
        assert got.edges == FIVE_NODE.edges
        assert got == oracle_induced(FIVE_NODE, Ordering.identity(5))

    def test_complete_graph_no_fill(self):
        g = Graph.complete(6)
        for _ in range(3):
            ordering = random_ordering(np.random.default_rng(1), 6)
            assert induced_graph(g, ordering).edges == relabel_graph(g, ordering).edges

    def test_star_graph_fill_depends_on_center_position(self):
        # center = 1, leaves 2..5
        star = Graph.from_edges(5, [(1, v) for v in range(2, 6)])
        center_first_pos = Ordering((1, 2, 3, 4, 5))  # center eliminated last
        assert elimination_fill_count(star, center_first_pos) == 0
        center_last_pos = Ordering((5, 1, 2, 3, 4))  # center at position 5: eliminated first
        induced = induced_graph(star, center_last_pos)
        # leaves (positions 1..4) must form a clique
        for a, b in itertools.combinations(range(1, 5), 2):
            assert induced.has_edge(a, b)

    def test_matches_brute_oracle_on_random_graphs(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            p = int(rng.integers(2, 8))
            g = random_graph(rng, p)
            for _ in range(5):
                ordering = random_ordering(rng, p)
                assert induced_graph(g, ordering) == oracle_induced(g, ordering)


class TestSparsityPattern:
    def test_five_node_identity_matches_expected_pairs(self):
        pat = sparsity_pattern(induced_graph(FIVE_NODE))
        assert pat.inactive_pairs == frozenset({(1, 4), (2, 4), (1, 5), (2, 5), (3, 5)})

    def test_complete_graph_dense_pattern(self):
        pat = sparsity_pattern(induced_graph(Graph.complete(4)))
        assert pat.inactive_pairs == frozenset()

    def test_empty_graph_diagonal_pattern(self):
        pat = sparsity_pattern(induced_graph(Graph.empty(4)))
        assert pat.inactive_pairs == frozenset(
            (j, k) for k in range(2, 5) for j in range(1, k)
        )

    def test_active_inputs_from_pattern(self):
        pat = sparsity_pattern(induced_graph(FIVE_NODE))
        assert pat.active_inputs(4) == (3, 4)
        assert pat.active_inputs(5) == (4, 5)


class TestOrderings:
    def test_empty_graph_identity_by_tiebreak(self):
        for fn in (order_min_degree, order_min_fill):
            assert fn(Graph.empty(5)) == Ordering.identity(5)

    def test_path_graph_min_degree_zero_fill(self):
        p = 7
        path = Graph.from_edges(p, [(i, i + 1) for i in range(1, p)])
        ordering = order_min_degree(path)
        assert elimination_fill_count(path, ordering) == 0

    def test_reverse_cholesky_is_reverse_of_min_degree(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            g = random_graph(rng, 6)
            md = order_min_degree(g)
            rc = order_reverse_cholesky(g)
            assert rc == md.reverse()

    def test_min_fill_zero_fill_on_chordal_graphs(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            g = random_ktree(rng, int(rng.integers(4, 9)))
            ordering = order_min_fill(g)
            # replay the greedy's own elimination direction
            assert elimination_fill_count(g, ordering.reverse()) == 0

    def test_chordal_graph_zero_fill_under_construction_order(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            g = random_ktree(rng, int(rng.integers(4, 9)))
            assert elimination_fill_count(g, Ordering.identity(g.p)) == 0

    def test_heuristics_never_beat_exhaustive_best(self):
        rng = np.random.default_rng(6)
        for _ in range(8):
            p = int(rng.integers(3, 7))
            g = random_graph(rng, p)
            best = min(
                elimination_fill_count(g, Ordering(perm))
                for perm in itertools.permutations(range(1, p + 1))
            )
            for ordering in (
                order_reverse_cholesky(g),
                order_min_degree(g).reverse(),
                order_min_fill(g).reverse(),
            ):
                assert elimination_fill_count(g, ordering) >= best

    def test_star_graph_reverse_cholesky_zero_fill(self):
        star = Graph.from_edges(6, [(1, v) for v in range(2, 7)])
        assert elimination_fill_count(star, order_reverse_cholesky(star)) == 0


class TestPermute:
    def test_identity_ordering_unchanged(self):
        g = FIVE_NODE
        assert relabel_graph(g, Ordering.identity(5)) == g
        X = np.arange(15.0).reshape(3, 5)
        np.testing.assert_array_equal(permute_columns(X, Ordering.identity(5)), X)

    def test_round_trip_identity(self):
        rng = np.random.default_rng(7)
        g = random_graph(rng, 6)
        ordering = random_ordering(rng, 6)
        back = relabel_graph(relabel_graph(g, ordering), ordering.inverse())
        assert back == g
        X = rng.normal(size=(4, 6))
        np.testing.assert_array_equal(
            permute_columns(permute_columns(X, ordering), ordering.inverse()), X
        )

    def test_permute_columns_semantics(self):
        X = np.array([[10.0, 20.0, 30.0]])
        ordering = Ordering((2, 3, 1))  # variable 1 -> position 2, etc.
        out = permute_columns(X, ordering)
        np.testing.assert_array_equal(out, [[30.0, 10.0, 20.0]])

    def test_suboptimal_ordering_of_five_node_graph(self):
        # exhaustive: identity is optimal (5 inactive pairs); some ordering
        # induces fill and the specific 2-pair pattern appears among them
        sizes = {}
        for perm in itertools.permutations(range(1, 6)):
            ordering = Ordering(perm)
            pat = sparsity_pattern(induced_graph(FIVE_NODE, ordering))
            sizes[perm] = pat.inactive_pairs
        assert max(len(v) for v in sizes.values()) == 5
        assert frozenset({(1, 5), (2, 5)}) in sizes.values()
        suboptimal = [
            perm
            for perm, pairs in sizes.items()
            if pairs == frozenset({(1, 5), (2, 5)})
        ]
        for perm in suboptimal:
            assert elimination_fill_count(FIVE_NODE, Ordering(perm)) >= 1


class TestIO:
    def test_json_round_trip(self):
        g = FIVE_NODE
        doc = graph_to_json_dict(g)
        assert doc == {"p": 5, "edges": [[1, 2], [1, 3], [2, 3], [3, 4], [4, 5]]}
        assert graph_from_json_dict(doc) == g

    def test_adjacency_matrix_round_trip(self):
        rng = np.random.default_rng(8)
        g = random_graph(rng, 6)
        assert Graph.from_adjacency_matrix(g.adjacency_matrix()) == g
