"""Scene detections to semantic hypergraphs.

Pipeline: ``load_scene`` -> ``build_hypergraph`` -> ``enrich`` ->
``triview.train`` -> ``export_xml`` / ``assemble_prompt``; plans are scored
with ``plan_eval``.
"""

from .enrich import (
    EnrichedHypergraph,
    LexiconAnnotator,
    Provenance,
    RemoteAnnotator,
    ReplayAnnotator,
    enrich,
    label_area,
    score_counterfactual,
)
from .hypergraph import ClusteringParams, SceneHypergraph, build_hypergraph, cluster_positions, incidence_of
from .knowledge import assemble_prompt, build_knowledge, export_xml
from .plan_eval import Action, SymbolicEnv, correctness, executability, execute, lcs_score
from .scene import ObjectInstance, SceneRecord, TaskSpec, bbox_center, load_scene

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ClusteringParams",
    "EnrichedHypergraph",
    "LexiconAnnotator",
    "ObjectInstance",
    "Provenance",
    "RemoteAnnotator",
    "ReplayAnnotator",
    "SceneHypergraph",
    "SceneRecord",
    "SymbolicEnv",
    "TaskSpec",
    "assemble_prompt",
    "bbox_center",
    "build_hypergraph",
    "build_knowledge",
    "cluster_positions",
    "correctness",
    "enrich",
    "executability",
    "execute",
    "export_xml",
    "incidence_of",
    "label_area",
    "lcs_score",
    "load_scene",
    "score_counterfactual",
]
