"""Random citation networks for testing and demonstrations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CitationGraph, Weighting, build_graph, prune_singleton_sources, weigh


def paper_id(i: int) -> str:
    return f"P{i:04d}"


def source_id(i: int) -> str:
    return f"S{i:04d}"


def random_citations(
    rng: np.random.Generator,
    n_papers: int,
    n_sources: int,
    mean_degree: float,
    paper_links: int = 0,
) -> list[tuple[str, str]]:
    """Each paper cites a Poisson number (at least 1) of uniformly chosen sources.

    ``paper_links`` extra paper-to-paper citations make the graph nearly, not
    strictly, bipartite.
    """
    edges = []
    for p in range(n_papers):
        k = min(max(1, rng.poisson(mean_degree)), n_sources)
        for s in rng.choice(n_sources, size=k, replace=False):
            edges.append((paper_id(p), source_id(int(s))))
    for _ in range(paper_links):
        a, b = rng.choice(n_papers, size=2, replace=False)
        edges.append((paper_id(int(a)), paper_id(int(b))))
    return edges


def connected_test_graph(
    seed: int,
    n_nodes: tuple[int, int] = (20, 200),
    mean_degree: tuple[float, float] = (5.0, 15.0),
    weighting: Weighting = Weighting.GEOMETRIC_MEAN_DEGREE,
) -> CitationGraph:
    """Pruned, weighted, connected nearly bipartite graph with a node count in range.

    The largest component of a random citation graph is kept; parameters are
    redrawn until its size falls inside ``n_nodes``.
    """
    rng = np.random.default_rng(seed)
    lo, hi = n_nodes
    while True:
        target = int(rng.integers(lo, hi + 1))
        deg = float(rng.uniform(*mean_degree))
        n_papers = max(3, int(target * rng.uniform(0.25, 0.5)))
        n_sources = max(int(deg) + 1, int((target - n_papers) * 1.6))
        edges = random_citations(rng, n_papers, n_sources, deg, paper_links=n_papers // 20)
        pruned, _ = prune_singleton_sources(build_graph(edges))
        labels = pruned.component_labels()
        big = np.bincount(labels).argmax()
        g = pruned.subgraph(np.flatnonzero(labels == big))
        if lo <= g.n_nodes <= hi and len(g.papers) >= 3:
            return weigh(g, weighting)


@dataclass(frozen=True)
class PlantedCorpus:
    edges: list[tuple[str, str]]
    topics: dict[str, frozenset[str]]


def planted_topics(
    rng: np.random.Generator,
    n_papers: int,
    n_sources: int,
    topic_sizes: list[int],
    mean_degree: float = 8.0,
    affinity: float = 0.8,
) -> PlantedCorpus:
    """Papers of topic ``t`` draw each reference from ``t``'s source block with
    probability ``affinity`` and from all sources otherwise.

    Papers are assigned to topics in order; papers beyond ``sum(topic_sizes)``
    belong to no topic and cite uniformly.  Sources are split into one block
    per topic plus a general block of the same size.
    """
    n_blocks = len(topic_sizes) + 1
    block = np.arange(n_sources) % n_blocks
    pools = [np.flatnonzero(block == t) for t in range(len(topic_sizes))]
    topic_of = np.full(n_papers, -1)
    start = 0
    for t, size in enumerate(topic_sizes):
        topic_of[start : start + size] = t
        start += size

    edges = []
    for p in range(n_papers):
        k = max(2, rng.poisson(mean_degree))
        chosen: set[int] = set()
        while len(chosen) < k:
            t = topic_of[p]
            if t >= 0 and rng.random() < affinity:
                chosen.add(int(rng.choice(pools[t])))
            else:
                chosen.add(int(rng.integers(n_sources)))
        edges.extend((paper_id(p), source_id(s)) for s in sorted(chosen))
    topics = {
        f"topic{t}": frozenset(paper_id(p) for p in np.flatnonzero(topic_of == t))
        for t in range(len(topic_sizes))
    }
    return PlantedCorpus(edges, topics)


def prepared(edges, weighting: Weighting = Weighting.GEOMETRIC_MEAN_DEGREE) -> CitationGraph:
    """Build, prune and weigh, keeping only the component with most papers."""
    pruned, _ = prune_singleton_sources(build_graph(edges))
    labels = pruned.component_labels()
    best = np.bincount(labels[pruned.papers]).argmax()
    return weigh(pruned.subgraph(np.flatnonzero(labels == best)), weighting)
