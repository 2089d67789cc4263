"""Immutable undirected graphs over a fixed node set.

All graphs in a dataset share one node set 0..node_count-1; searches only ever
edit the edge set. Edits return new graphs, so instances can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

import numpy as np

Edge = tuple[int, int]


class GraphMismatchError(ValueError):
    """Two graphs do not live on the same node set."""


class UndefinedRatioError(ValueError):
    """Relative edit distance is undefined because both edge sets are empty."""


class EditConflictError(ValueError):
    """An edit removes an absent edge or adds a present one."""


def _normalize_edge(u: int, v: int, node_count: int) -> Edge:
    if u == v:
        raise ValueError(f"self-loop ({u},{v}) not allowed")
    if not (0 <= u < node_count and 0 <= v < node_count):
        raise ValueError(f"edge ({u},{v}) outside node range 0..{node_count - 1}")
    return (u, v) if u < v else (v, u)


class Graph:
    """Simple undirected graph on nodes 0..node_count-1.

    Edges are unordered pairs stored as (u, v) with u < v; self-loops and
    duplicates are rejected. Instances are immutable: ``add_edge``,
    ``remove_edge`` and ``apply_edits`` return new graphs.
    """

    __slots__ = ("node_count", "_edges", "_adj", "_hash")

    def __init__(self, node_count: int, edges: Iterable[tuple[int, int]] = ()) -> None:
        if node_count < 0:
            raise ValueError("node_count must be non-negative")
        self.node_count = node_count
        self._edges = frozenset(_normalize_edge(u, v, node_count) for u, v in edges)
        adj: list[set[int]] = [set() for _ in range(node_count)]
        for u, v in self._edges:
            adj[u].add(v)
            adj[v].add(u)
        self._adj = tuple(frozenset(s) for s in adj)
        self._hash = None

    @classmethod
    def complete(cls, node_count: int) -> "Graph":
        return cls(node_count, combinations(range(node_count), 2))

    @property
    def edges(self) -> frozenset[Edge]:
        return self._edges

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def has_edge(self, u: int, v: int) -> bool:
        return _normalize_edge(u, v, self.node_count) in self._edges

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    @classmethod
    def _from_parts(cls, node_count, edges, adj) -> "Graph":
        # edges already normalized and consistent with adj; skips revalidation
        g = object.__new__(cls)
        g.node_count = node_count
        g._edges = edges
        g._adj = adj
        g._hash = None
        return g

    def add_edge(self, u: int, v: int) -> "Graph":
        edge = _normalize_edge(u, v, self.node_count)
        if edge in self._edges:
            raise EditConflictError(f"edge {edge} already present")
        a, b = edge
        adj = list(self._adj)
        adj[a] = adj[a] | {b}
        adj[b] = adj[b] | {a}
        return Graph._from_parts(self.node_count, self._edges | {edge}, tuple(adj))

    def remove_edge(self, u: int, v: int) -> "Graph":
        edge = _normalize_edge(u, v, self.node_count)
        if edge not in self._edges:
            raise EditConflictError(f"edge {edge} not present")
        a, b = edge
        adj = list(self._adj)
        adj[a] = adj[a] - {b}
        adj[b] = adj[b] - {a}
        return Graph._from_parts(self.node_count, self._edges - {edge}, tuple(adj))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.node_count == other.node_count and self._edges == other._edges

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.node_count, self._edges))
        return self._hash

    def __repr__(self) -> str:
        return f"Graph(node_count={self.node_count}, edge_count={self.edge_count})"


@dataclass(frozen=True)
class EditList:
    """Edge removals and additions relative to some original graph."""

    removals: tuple[Edge, ...]
    additions: tuple[Edge, ...]

    @classmethod
    def between(cls, original: Graph, target: Graph) -> "EditList":
        """Edits turning ``original`` into ``target``, each list sorted."""
        _check_same_nodes(original, target)
        return cls(
            removals=tuple(sorted(original.edges - target.edges)),
            additions=tuple(sorted(target.edges - original.edges)),
        )

    @classmethod
    def empty(cls) -> "EditList":
        return cls((), ())

    def inverse(self) -> "EditList":
        return EditList(removals=self.additions, additions=self.removals)

    @property
    def size(self) -> int:
        return len(self.removals) + len(self.additions)


def _check_same_nodes(g: Graph, h: Graph) -> None:
    if g.node_count != h.node_count:
        raise GraphMismatchError(
            f"graphs live on different node sets ({g.node_count} vs {h.node_count})"
        )


def symmetric_difference_distance(g: Graph, h: Graph) -> int:
    """Number of edges present in exactly one of the two graphs."""
    _check_same_nodes(g, h)
    return len(g.edges ^ h.edges)


def edit_distance_ratio(g: Graph, h: Graph) -> float:
    """Symmetric-difference distance normalized by the size of the edge union."""
    _check_same_nodes(g, h)
    union = len(g.edges | h.edges)
    if union == 0:
        raise UndefinedRatioError("both edge sets are empty")
    return len(g.edges ^ h.edges) / union


def apply_edits(g: Graph, edits: EditList) -> Graph:
    """Apply an edit list, verifying it is consistent with ``g``."""
    removals = {_normalize_edge(u, v, g.node_count) for u, v in edits.removals}
    additions = {_normalize_edge(u, v, g.node_count) for u, v in edits.additions}
    if removals & additions:
        raise EditConflictError("an edge appears both as removal and addition")
    missing = removals - g.edges
    if missing:
        raise EditConflictError(f"removal of absent edges: {sorted(missing)}")
    present = additions & g.edges
    if present:
        raise EditConflictError(f"addition of present edges: {sorted(present)}")
    adj = list(g._adj)
    for u, v in removals:
        adj[u] = adj[u] - {v}
        adj[v] = adj[v] - {u}
    for u, v in additions:
        adj[u] = adj[u] | {v}
        adj[v] = adj[v] | {u}
    return Graph._from_parts(g.node_count, (g.edges - removals) | additions, tuple(adj))


def triangle_counts(g: Graph) -> list[int]:
    """Per-node count of distinct triangles the node participates in."""
    counts = [0] * g.node_count
    for u, v in g.edges:
        # the triangle {u, v, w} is charged to w exactly once per edge (u, v)
        for w in g.neighbors(u) & g.neighbors(v):
            counts[w] += 1
    return counts


def total_triangles(g: Graph) -> int:
    return sum(triangle_counts(g)) // 3


def triangles_within(g: Graph, nodes: Iterable[int]) -> int:
    """Number of triangles of ``g`` whose three nodes all lie in ``nodes``."""
    index = {v: i for i, v in enumerate(sorted(set(nodes)))}
    a = np.zeros((len(index), len(index)))
    for u, v in g.edges:
        if u in index and v in index:
            a[index[u], index[v]] = 1.0
            a[index[v], index[u]] = 1.0
    # each triangle is an adjacent ordered pair with a common neighbor, six ways
    return int(round(((a @ a) * a).sum() / 6))


def edges_within(g: Graph, nodes: Iterable[int]) -> int:
    inside = frozenset(nodes)
    return sum(1 for u, v in g.edges if u in inside and v in inside)


def maximal_cliques_containing(g: Graph, v: int) -> set[frozenset[int]]:
    """All maximal cliques of ``g`` that contain node ``v``.

    Pivoted Bron-Kerbosch seeded with {v}, so only the closed neighborhood of
    ``v`` is explored. An isolated node yields the 1-clique {v}.
    """
    if not 0 <= v < g.node_count:
        raise ValueError(f"node {v} outside node range 0..{g.node_count - 1}")
    out: set[frozenset[int]] = set()

    def expand(clique: set[int], candidates: set[int], excluded: set[int]) -> None:
        if not candidates and not excluded:
            out.add(frozenset(clique))
            return
        pivot = max(sorted(candidates | excluded), key=lambda u: len(candidates & g.neighbors(u)))
        for u in sorted(candidates - g.neighbors(pivot)):
            expand(clique | {u}, candidates & g.neighbors(u), excluded & g.neighbors(u))
            candidates.remove(u)
            excluded.add(u)

    expand({v}, set(g.neighbors(v)), set())
    return out


def two_hop_neighborhood(g: Graph, v: int) -> frozenset[int]:
    """Nodes at shortest-path distance 1 or 2 from ``v``, excluding ``v``."""
    if not 0 <= v < g.node_count:
        raise ValueError(f"node {v} outside node range 0..{g.node_count - 1}")
    reach = set(g.neighbors(v))
    for u in g.neighbors(v):
        reach |= g.neighbors(u)
    reach.discard(v)
    return frozenset(reach)


def adjacency_matrix(g: Graph) -> np.ndarray:
    a = np.zeros((g.node_count, g.node_count))
    for u, v in g.edges:
        a[u, v] = 1.0
        a[v, u] = 1.0
    return a


def eigenvector_centrality(g: Graph) -> list[float]:
    """Principal-eigenvector node scores, non-negative, scaled to unit maximum.

    Returns the all-zero vector for a graph with no edges.
    """
    if g.node_count == 0:
        return []
    if g.edge_count == 0:
        return [0.0] * g.node_count
    _, vectors = np.linalg.eigh(adjacency_matrix(g))
    vec = vectors[:, -1]
    if vec[int(np.argmax(np.abs(vec)))] < 0:
        vec = -vec
    vec = np.clip(vec, 0.0, None)
    return [float(x) for x in vec / vec.max()]
