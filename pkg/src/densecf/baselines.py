"""Comparison search methods: random edge flips, nearest unlike neighbor in a
dataset, and a backward pass that shrinks a found counterfactual's edit set."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from itertools import combinations

from .data import GraphDataset
from .density import CounterfactualResult, _finish
from .graph import EditList, Graph, symmetric_difference_distance
from .spectral import Oracle

logger = logging.getLogger(__name__)

DEFAULT_EDG_MAX_ITERATIONS = 2000


class InvalidCandidateError(ValueError):
    """Backward search got a candidate that does not classify opposite."""


@dataclass
class BaselineConfig:
    edg_max_iterations: int = DEFAULT_EDG_MAX_ITERATIONS
    seed: int = 0

    def __post_init__(self) -> None:
        if self.edg_max_iterations < 0:
            raise ValueError("edg_max_iterations must be non-negative")


def edg_search(
    oracle: Oracle, g: Graph, config: BaselineConfig | None = None
) -> CounterfactualResult:
    """Flip one uniformly random edge per iteration until the class flips.

    A present edge is removed, an absent one added; the pair is drawn
    uniformly over all node pairs. On a flip the candidate is refined with
    :func:`backward_search`. Deterministic for a given seed.
    """
    config = config or BaselineConfig()
    calls_before = oracle.call_count
    y0 = oracle.predict(g)
    pairs = list(combinations(range(g.node_count), 2))
    if not pairs:
        return _finish(oracle, g, y0, g, False, 0, calls_before, note="graph has no node pairs")
    rng = random.Random(config.seed)
    current = g
    found = False
    iterations = 0
    for _ in range(config.edg_max_iterations):
        u, v = pairs[rng.randrange(len(pairs))]
        if current.has_edge(u, v):
            current = current.remove_edge(u, v)
        else:
            current = current.add_edge(u, v)
        iterations += 1
        if oracle.predict(current) != y0:
            found = True
            break
    if found:
        refined = backward_search(
            oracle, g, current, input_class=y0, candidate_class=1 - y0
        )
        return _finish(oracle, g, y0, refined, True, iterations, calls_before)
    return _finish(oracle, g, y0, current, False, iterations, calls_before)


def dat_search(oracle: Oracle, g: Graph, dataset: GraphDataset) -> CounterfactualResult:
    """Return the dataset graph closest to ``g`` among those the oracle puts
    in the opposite class (distance ties go to the lowest dataset index).

    Every dataset graph is classified, so this always finds a counterfactual
    when the oracle predicts both classes somewhere in the dataset.
    """
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    calls_before = oracle.call_count
    y0 = oracle.predict(g)
    best: tuple[int, int, Graph] | None = None
    for idx, entry in enumerate(dataset):
        if oracle.predict(entry.graph) == y0:
            continue
        d = symmetric_difference_distance(g, entry.graph)
        if best is None or (d, idx) < best[:2]:
            best = (d, idx, entry.graph)
    iterations = len(dataset)
    if best is None:
        note = f"no graph among {len(dataset)} classifies opposite to the input"
        logger.warning(note)
        return _finish(oracle, g, y0, g, False, iterations, calls_before, note=note)
    return _finish(oracle, g, y0, best[2], True, iterations, calls_before)


def backward_search(
    oracle: Oracle,
    g: Graph,
    candidate: Graph,
    input_class: int | None = None,
    candidate_class: int | None = None,
) -> Graph:
    """Greedily revert edits of ``candidate`` that are not needed for the flip.

    Passes over the symmetric-difference edits in a fixed order (removals then
    additions, lexicographic), keeping a revert whenever the class stays
    opposite to the input's; repeats until a full pass keeps nothing. The
    result never classifies like ``g`` and is never farther from it than
    ``candidate``.

    Pass the already-known classes to avoid re-charging the oracle for the
    input and the candidate.
    """
    if input_class is None:
        input_class = oracle.predict(g)
    if candidate_class is None:
        candidate_class = oracle.predict(candidate)
    if candidate_class == input_class:
        raise InvalidCandidateError("candidate classifies the same as the input graph")
    current = candidate
    while True:
        changed = False
        edits = EditList.between(g, current)
        for edge in edits.removals:  # reverting a removal restores the edge
            tentative = current.add_edge(*edge)
            if oracle.predict(tentative) != input_class:
                current = tentative
                changed = True
        for edge in edits.additions:  # reverting an addition deletes the edge
            tentative = current.remove_edge(*edge)
            if oracle.predict(tentative) != input_class:
                current = tentative
                changed = True
        if not changed:
            return current


def dat_bw_search(oracle: Oracle, g: Graph, dataset: GraphDataset) -> CounterfactualResult:
    """Nearest-unlike-neighbor lookup followed by backward refinement."""
    calls_before = oracle.call_count
    base = dat_search(oracle, g, dataset)
    if not base.found:
        return base
    y0 = int(oracle.classifier(g))  # class already established inside the scan
    refined = backward_search(
        oracle, g, base.counterfactual, input_class=y0, candidate_class=1 - y0
    )
    return _finish(oracle, g, y0, refined, True, base.iterations, calls_before)


def rcli_bw_search(
    oracle: Oracle, g: Graph, partition, config=None
) -> CounterfactualResult:
    """Region-aware clique search followed by backward refinement."""
    from .density import rcli_search

    calls_before = oracle.call_count
    base = rcli_search(oracle, g, partition, config=config)
    if not base.found:
        return base
    y0 = int(oracle.classifier(g))
    refined = backward_search(
        oracle, g, base.counterfactual, input_class=y0, candidate_class=1 - y0
    )
    return _finish(oracle, g, y0, refined, True, base.iterations, calls_before)
