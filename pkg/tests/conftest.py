"""Shared helpers: random graphs and independent brute-force oracles."""

from __future__ import annotations

import random
from itertools import combinations

from densecf import Graph


def random_graph(n: int, p: float, rng: random.Random) -> Graph:
    edges = [(u, v) for u, v in combinations(range(n), 2) if rng.random() < p]
    return Graph(n, edges)


def brute_force_maximal_cliques(g: Graph) -> set[frozenset[int]]:
    """Enumerate every maximal clique by scanning all node subsets (n <= ~15)."""
    nodes = range(g.node_count)
    cliques = []
    for size in range(1, g.node_count + 1):
        for subset in combinations(nodes, size):
            if all(g.has_edge(u, v) for u, v in combinations(subset, 2)):
                cliques.append(frozenset(subset))
    maximal = set()
    for c in cliques:
        if not any(c < other for other in cliques):
            maximal.add(c)
    return maximal


def is_clique(g: Graph, nodes: frozenset[int]) -> bool:
    return all(g.has_edge(u, v) for u, v in combinations(sorted(nodes), 2))


def is_maximal_clique(g: Graph, nodes: frozenset[int]) -> bool:
    if not is_clique(g, nodes):
        return False
    outside = set(range(g.node_count)) - nodes
    return not any(all(g.has_edge(w, v) for v in nodes) for w in outside)


def brute_force_triangle_total(g: Graph) -> int:
    return sum(
        1
        for a, b, c in combinations(range(g.node_count), 3)
        if g.has_edge(a, b) and g.has_edge(a, c) and g.has_edge(b, c)
    )


class CountingClassifier:
    """External instrumentation: counts invocations independently of Oracle."""

    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, g: Graph) -> int:
        self.calls += 1
        return self.fn(g)
