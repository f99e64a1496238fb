"""Synthetic hypergraphs with planted structure, for tests and demos."""

from __future__ import annotations

import numpy as np

from .enrich import EnrichedHypergraph, Provenance
from .hypergraph import Hyperedge, Node, SceneHypergraph

AREA_WORDS = ("kitchen", "dining", "living", "sleeping", "work", "bathroom", "laundry", "garden")


def planted_hypergraph(n_nodes: int = 32, n_edges: int = 4, shared_words: int = 2,
                       unique_words: int = 8, seed: int = 0) -> EnrichedHypergraph:
    """Nodes split evenly over ``n_edges`` areas.

    Each node text is ``shared_words`` words of its area's vocabulary
    followed by ``unique_words`` node-specific words; each area is labelled
    ``"<word> area zone<j>"``.
    """
    rng = np.random.default_rng(seed)
    nodes, members = [], [[] for _ in range(n_edges)]
    for i in range(n_nodes):
        j = i % n_edges
        shared = [f"{AREA_WORDS[j % len(AREA_WORDS)]}{w}" for w in rng.permutation(shared_words + 1)[:shared_words]]
        unique = [f"obj{i}w{w}" for w in range(unique_words)]
        nodes.append(Node(i, " ".join(shared + unique)))
        members[j].append(i)
    edges = tuple(Hyperedge(j, tuple(m)) for j, m in enumerate(members))
    base = SceneHypergraph(tuple(nodes), edges, f"planted_{n_nodes}x{n_edges}")
    labels = {j: f"{AREA_WORDS[j % len(AREA_WORDS)]} area zone{j}" for j in range(n_edges)}
    return EnrichedHypergraph(
        base, labels, {i: 0.0 for i in range(n_nodes)},
        {j: Provenance.FALLBACK for j in range(n_edges)}, {i: Provenance.FALLBACK for i in range(n_nodes)})
