"""Density-driven counterfactual searches.

Two families of edits share one loop shape: swap single edges guided by
triangle scores, or rewrite whole maximal cliques around ranked nodes
(optionally with a region-aware two-level ranking). Each search repeatedly
perturbs the input graph and queries the oracle until the predicted class
flips or an iteration budget runs out.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .evaluation import RegionPartition
from .graph import (
    EditList,
    Graph,
    apply_edits,
    eigenvector_centrality,
    maximal_cliques_containing,
    symmetric_difference_distance,
    triangle_counts,
    two_hop_neighborhood,
)
from .spectral import Oracle

DEFAULT_MAX_ITERATIONS = 200
DEFAULT_CLIQUE_BUDGET = 10

RANKING_STRATEGIES = ("triangles", "eigenvector", "regional")


class ConfigurationError(ValueError):
    """Invalid search configuration (unknown strategy, missing partition, ...)."""


@dataclass
class SearchConfig:
    """Knobs common to the density searches.

    ``max_iterations`` of None means the method default: clique searches cap
    at 200 outer iterations, the triangle search runs until either candidate
    list is exhausted.
    """

    max_iterations: int | None = None
    clique_budget: int = DEFAULT_CLIQUE_BUDGET
    ranking: str = "triangles"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ConfigurationError("max_iterations must be non-negative")
        if self.clique_budget < 0:
            raise ConfigurationError("clique_budget must be non-negative")
        if self.ranking not in RANKING_STRATEGIES:
            raise ConfigurationError(
                f"unknown ranking strategy {self.ranking!r}, expected one of {RANKING_STRATEGIES}"
            )


@dataclass(frozen=True)
class CounterfactualResult:
    """Outcome of one counterfactual search.

    When ``found``, the counterfactual is guaranteed (re-checked at
    construction with an uncounted classifier call) to classify opposite to
    the input, and ``edits`` reproduces it from the input via ``apply_edits``.
    """

    found: bool
    counterfactual: Graph | None
    edits: EditList
    iterations: int
    oracle_calls: int
    distance: int
    distance_ratio: float | None
    note: str | None = None


def _finish(
    oracle: Oracle,
    original: Graph,
    original_class: int,
    final: Graph,
    found: bool,
    iterations: int,
    calls_before: int,
    note: str | None = None,
) -> CounterfactualResult:
    calls = oracle.call_count - calls_before
    if not found:
        return CounterfactualResult(
            found=False,
            counterfactual=None,
            edits=EditList.empty(),
            iterations=iterations,
            oracle_calls=calls,
            distance=0,
            distance_ratio=None,
            note=note,
        )
    if int(oracle.classifier(final)) == original_class:
        raise RuntimeError("search produced a candidate that does not flip the class")
    edits = EditList.between(original, final)
    union = len(original.edges | final.edges)
    return CounterfactualResult(
        found=True,
        counterfactual=final,
        edits=edits,
        iterations=iterations,
        oracle_calls=calls,
        distance=edits.size,
        distance_ratio=edits.size / union if union else None,
        note=note,
    )


class ScoredEdgeList:
    """Candidate edges in fixed score order, consumed front to back."""

    __slots__ = ("entries", "_cursor")

    def __init__(self, entries) -> None:
        self.entries = tuple(entries)
        self._cursor = 0

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def remaining(self) -> int:
        return len(self.entries) - self._cursor

    def next_best(self):
        if self._cursor >= len(self.entries):
            return None
        _, edge = self.entries[self._cursor]
        self._cursor += 1
        return edge


def triangle_score_lists(g: Graph) -> tuple[ScoredEdgeList, ScoredEdgeList]:
    """Score every node pair by the summed per-node triangle counts.

    Existing edges become removal candidates (ascending score, so the least
    triangle-entangled edges go first); absent edges become addition
    candidates (descending score, so new edges close as many wedges as
    possible). Score ties break on lexicographic edge order.
    """
    scores = triangle_counts(g)
    removals, additions = [], []
    for u, v in combinations(range(g.node_count), 2):
        entry = (scores[u] + scores[v], (u, v))
        if g.has_edge(u, v):
            removals.append(entry)
        else:
            additions.append(entry)
    removals.sort(key=lambda e: (e[0], e[1]))
    additions.sort(key=lambda e: (-e[0], e[1]))
    return ScoredEdgeList(removals), ScoredEdgeList(additions)


def tri_search(
    oracle: Oracle,
    g: Graph,
    lists: tuple[ScoredEdgeList, ScoredEdgeList] | None = None,
    config: SearchConfig | None = None,
) -> CounterfactualResult:
    """Swap one removal and one addition candidate per iteration.

    The edge count of every intermediate graph equals the input's. Stops on a
    class flip or when either list is exhausted, i.e. after at most
    min(|removals|, |additions|) iterations.
    """
    config = config or SearchConfig()
    calls_before = oracle.call_count
    y0 = oracle.predict(g)
    if lists is None:
        lists = triangle_score_lists(g)
    removals, additions = lists
    cap = min(removals.remaining, additions.remaining)
    if config.max_iterations is not None:
        cap = min(cap, config.max_iterations)
    current = g
    found = False
    i = 0
    while i < cap:
        edge_out = removals.next_best()
        edge_in = additions.next_best()
        current = apply_edits(current, EditList(removals=(edge_out,), additions=(edge_in,)))
        i += 1
        if oracle.predict(current) != y0:
            found = True
            break
    return _finish(oracle, g, y0, current, found, i, calls_before)


class RankedNodes:
    """Node permutation with a dense-end and a sparse-end cursor.

    ``next_best`` walks from the dense end, ``next_worst`` from the sparse
    end; no node is handed out twice, so a search exhausts after
    floor(n/2) best/worst pairs.
    """

    def __init__(self, order, strategy: str) -> None:
        self.order = tuple(order)
        self.strategy = strategy
        self._front = 0
        self._back = len(self.order) - 1

    def next_best(self) -> int | None:
        if self._front > self._back:
            return None
        node = self.order[self._front]
        self._front += 1
        return node

    def next_worst(self) -> int | None:
        if self._back < self._front:
            return None
        node = self.order[self._back]
        self._back -= 1
        return node

    @property
    def remaining(self) -> int:
        return max(0, self._back - self._front + 1)


def rank_nodes(g: Graph, strategy: str = "triangles") -> RankedNodes:
    """Order nodes by how dense their surroundings are (descending).

    Strategies: per-node triangle counts or eigenvector centrality. Ties break
    on ascending node index.
    """
    if strategy == "triangles":
        scores = triangle_counts(g)
    elif strategy == "eigenvector":
        scores = eigenvector_centrality(g)
    else:
        raise ConfigurationError(f"unknown ranking strategy {strategy!r}")
    order = sorted(range(g.node_count), key=lambda v: (-scores[v], v))
    return RankedNodes(order, strategy)


def rank_nodes_regional(g: Graph, partition: RegionPartition) -> RankedNodes:
    """Two-level ranking: regions by induced edge count, nodes by triangles.

    Regions with denser induced subgraphs come first; within a region, nodes
    are ordered by descending triangle count. Ties break on lexicographic
    region name, then node index.
    """
    partition.check_covers(g.node_count)
    tri = triangle_counts(g)
    density = {name: 0 for name in partition.names}
    for u, v in g.edges:
        if partition.labels[u] == partition.labels[v]:
            density[partition.labels[u]] += 1
    region_order = sorted(partition.names, key=lambda name: (-density[name], name))
    order: list[int] = []
    for name in region_order:
        order.extend(sorted(partition.nodes_in(name), key=lambda v: (-tri[v], v)))
    return RankedNodes(order, "regional")


@dataclass
class CliqueBookkeeping:
    """Memory of the clique rewrites performed so far.

    ``usage`` goes up for nodes whose clique was removed and down for nodes
    included in an added clique (it may go negative); densification prefers
    low-usage nodes, steering additions away from freshly sparsified regions.
    """

    removed: list[frozenset[int]]
    usage: list[int]

    @classmethod
    def fresh(cls, node_count: int) -> "CliqueBookkeeping":
        return cls(removed=[], usage=[0] * node_count)


def _clique_sort_key(clique: frozenset[int]) -> tuple[int, tuple[int, ...]]:
    return (-len(clique), tuple(sorted(clique)))


def sparsify_cli(
    g_orig: Graph, g_cur: Graph, n: int, book: CliqueBookkeeping
) -> tuple[Graph, frozenset[int]]:
    """Remove one maximal clique around ``n`` from the current graph.

    Cliques are enumerated in the ORIGINAL graph, so edges already dropped in
    earlier iterations may be gone; only still-present edges are removed. The
    first call takes the largest clique; afterwards, the clique with the
    lowest maximum overlap against previously removed ones (ties: larger
    clique, then lexicographically smallest node set).
    """
    cliques = maximal_cliques_containing(g_orig, n)
    if not book.removed:
        chosen = min(cliques, key=_clique_sort_key)
    else:
        def overlap(c: frozenset[int]) -> int:
            return max(len(c & removed) for removed in book.removed)

        chosen = min(cliques, key=lambda c: (overlap(c),) + _clique_sort_key(c))
    still_present = tuple(
        sorted(edge for edge in combinations(sorted(chosen), 2) if g_cur.has_edge(*edge))
    )
    updated = apply_edits(g_cur, EditList(removals=still_present, additions=()))
    book.removed.append(frozenset(chosen))
    for v in chosen:
        book.usage[v] += 1
    return updated, frozenset(chosen)


def densify_cli(
    g_cur: Graph, n: int, book: CliqueBookkeeping, s: int, node_cap: int
) -> tuple[Graph, frozenset[int]]:
    """Add a clique of up to min(s, node_cap) nodes near ``n``.

    Candidates are the two-hop neighborhood of ``n`` followed by the remaining
    nodes, each block sorted by ascending usage count (ties: node index). All
    absent edges among the chosen nodes are added and their usage counts are
    decremented. With fewer than two nodes to pick this is a no-op.
    """
    size = min(s, node_cap)
    if size < 2:
        return g_cur, frozenset()
    neighborhood = two_hop_neighborhood(g_cur, n)
    near = sorted(neighborhood, key=lambda v: (book.usage[v], v))
    far = sorted(
        (v for v in range(g_cur.node_count) if v not in neighborhood),
        key=lambda v: (book.usage[v], v),
    )
    chosen = (near + far)[:size]
    additions = tuple(
        sorted(
            edge
            for edge in combinations(sorted(chosen), 2)
            if not g_cur.has_edge(*edge)
        )
    )
    updated = apply_edits(g_cur, EditList(removals=(), additions=additions))
    for v in chosen:
        book.usage[v] -= 1
    return updated, frozenset(chosen)


@dataclass(frozen=True)
class CliIteration:
    """Per-iteration record of one clique-rewrite step (for instrumentation)."""

    removed_clique: frozenset[int]
    added_cliques: tuple[frozenset[int], ...]
    edges_removed: int
    edges_added: int


def cli_search(
    oracle: Oracle,
    g: Graph,
    ranked: RankedNodes | None = None,
    config: SearchConfig | None = None,
    trace: list[CliIteration] | None = None,
) -> CounterfactualResult:
    """Rewrite cliques: sparsify around top-ranked nodes, densify around
    bottom-ranked ones.

    Each outer iteration removes one maximal clique around the next best node,
    then adds cliques around the next worst node until the cumulative number
    of edges added reaches the number removed (or the class flips). Every
    added clique has at most |removed clique| + clique_budget nodes. The
    search stops on a flip, after ``max_iterations`` outer iterations, or when
    the ranking runs out of fresh node pairs.
    """
    config = config or SearchConfig()
    calls_before = oracle.call_count
    y0 = oracle.predict(g)
    if ranked is None:
        if config.ranking == "regional":
            raise ConfigurationError("regional ranking needs rcli_search with a partition")
        ranked = rank_nodes(g, config.ranking)
    max_iterations = (
        config.max_iterations if config.max_iterations is not None else DEFAULT_MAX_ITERATIONS
    )
    book = CliqueBookkeeping.fresh(g.node_count)
    current = g
    found = False
    i = 0
    while i < max_iterations:
        n_dense = ranked.next_best()
        n_sparse = ranked.next_worst()
        if n_dense is None or n_sparse is None:
            break
        before = current
        current, removed_clique = sparsify_cli(g, current, n_dense, book)
        i += 1
        edges_removed = symmetric_difference_distance(before, current)
        added_cliques: list[frozenset[int]] = []
        edges_added = 0
        if oracle.predict(current) != y0:
            found = True
        else:
            node_cap = len(removed_clique) + config.clique_budget
            while edges_added < edges_removed:
                budget = edges_removed - edges_added
                updated, added_clique = densify_cli(current, n_sparse, book, budget, node_cap)
                round_added = symmetric_difference_distance(current, updated)
                current = updated
                if added_clique:
                    added_cliques.append(added_clique)
                edges_added += round_added
                if round_added == 0:
                    break  # chosen region is saturated; class of current is already known
                if oracle.predict(current) != y0:
                    found = True
                    break
        if trace is not None:
            trace.append(
                CliIteration(
                    removed_clique=removed_clique,
                    added_cliques=tuple(added_cliques),
                    edges_removed=edges_removed,
                    edges_added=edges_added,
                )
            )
        if found:
            break
    return _finish(oracle, g, y0, current, found, i, calls_before)


def rcli_search(
    oracle: Oracle,
    g: Graph,
    partition: RegionPartition,
    config: SearchConfig | None = None,
    trace: list[CliIteration] | None = None,
) -> CounterfactualResult:
    """Clique rewriting driven by the region-aware two-level node ranking."""
    if partition is None:
        raise ConfigurationError("rcli requires a region partition")
    ranked = rank_nodes_regional(g, partition)
    return cli_search(oracle, g, ranked=ranked, config=config, trace=trace)
