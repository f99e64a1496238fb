"""Masked augmentation of an enriched hypergraph into two views."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..enrich import UNKNOWN_AREA, EnrichedHypergraph
from .config import MASK_TOKEN, TriViewConfig


@dataclass(frozen=True)
class AugmentedView:
    view_index: int
    node_texts: tuple[str, ...]
    edge_texts: tuple[str, ...]
    incidence: np.ndarray
    mask_matrix: np.ndarray


def mask_text(text: str, prob: float, rng: np.random.Generator) -> str:
    tokens = text.split()
    if not tokens:
        return text
    hit = rng.random(len(tokens)) < prob
    if not hit.any():
        return text
    return " ".join(MASK_TOKEN if h else tok for tok, h in zip(tokens, hit))


def mask_incidence(incidence: np.ndarray, prob: float, rng: np.random.Generator) -> np.ndarray:
    """Masking matrix M dropping 1-entries of H with probability ``prob``.

    Entries whose removal would empty a row or a column are always kept.
    One uniform draw is consumed per matrix cell regardless of its value.
    """
    H = np.asarray(incidence, dtype=np.int8)
    draws = rng.random(H.shape)
    M = np.ones(H.shape, dtype=np.int8)
    rows = H.sum(axis=1).astype(np.int64)
    cols = H.sum(axis=0).astype(np.int64)
    for i, j in zip(*np.nonzero(H)):
        if draws[i, j] < prob and rows[i] > 1 and cols[j] > 1:
            M[i, j] = 0
            rows[i] -= 1
            cols[j] -= 1
    return M


def node_texts_of(graph: EnrichedHypergraph) -> list[str]:
    return [n.category for n in graph.base.nodes]


def edge_texts_of(graph: EnrichedHypergraph) -> list[str]:
    return [graph.area_labels.get(e.id, UNKNOWN_AREA) for e in graph.base.hyperedges]


def _one_view(index: int, node_texts, edge_texts, H, config: TriViewConfig,
              rng: np.random.Generator) -> AugmentedView:
    nodes = tuple(mask_text(t, config.mask_prob_text, rng) for t in node_texts)
    edges = tuple(mask_text(t, config.mask_prob_text, rng) for t in edge_texts)
    M = mask_incidence(H, config.mask_prob_incidence, rng)
    return AugmentedView(index, nodes, edges, (M * H).astype(np.int8), M)


def make_views(graph: EnrichedHypergraph, config: TriViewConfig,
               rng: np.random.Generator) -> tuple[AugmentedView, AugmentedView]:
    """Two independently masked views of ``graph``."""
    H = graph.base.incidence
    node_texts, edge_texts = node_texts_of(graph), edge_texts_of(graph)
    r1, r2 = rng.spawn(2)
    return (_one_view(1, node_texts, edge_texts, H, config, r1),
            _one_view(2, node_texts, edge_texts, H, config, r2))
