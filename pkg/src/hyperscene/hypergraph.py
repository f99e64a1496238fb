"""Spatial hypergraph construction.

Objects are nodes; DBSCAN clusters over object centres are hyperedges.
Points DBSCAN leaves as noise become singleton hyperedges so that every
node belongs to at least one hyperedge.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .scene import SceneRecord

__all__ = [
    "ClusteringParams",
    "Hyperedge",
    "Node",
    "SceneHypergraph",
    "build_hypergraph",
    "cluster_positions",
    "default_params",
    "hypergraph_from_dict",
    "hypergraph_to_dict",
    "incidence_of",
]

DEFAULT_EPS_FRACTION = 0.12
DEFAULT_MIN_PTS = 2


@dataclass(frozen=True)
class ClusteringParams:
    epsilon: float
    min_pts: int = DEFAULT_MIN_PTS

    def __post_init__(self):
        if not (self.epsilon > 0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.min_pts < 1:
            raise ValueError(f"min_pts must be >= 1, got {self.min_pts}")


def default_params(width: int, height: int, min_pts: int = DEFAULT_MIN_PTS) -> ClusteringParams:
    """epsilon = 0.12 * max(width, height) pixels."""
    return ClusteringParams(DEFAULT_EPS_FRACTION * max(width, height), min_pts)


def cluster_positions(points, params: ClusteringParams) -> tuple[list[list[int]], list[int]]:
    """DBSCAN over 2D points.

    A point is core when at least ``min_pts`` points (itself included) lie
    within Euclidean distance ``<= epsilon``. Points are scanned in index
    order; a border point reachable from several clusters joins the one
    discovered first.

    Returns ``(clusters, noise)``, each cluster a sorted index list, clusters
    in discovery order, noise sorted.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2) if len(points) else np.zeros((0, 2))
    n = len(pts)
    if n == 0:
        return [], []
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")

    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    adjacency = dist <= params.epsilon
    neighbours = [np.flatnonzero(row) for row in adjacency]
    is_core = np.array([len(nb) >= params.min_pts for nb in neighbours])

    label = np.full(n, -1)
    clusters: list[list[int]] = []
    for start in range(n):
        if label[start] != -1 or not is_core[start]:
            continue
        cid = len(clusters)
        label[start] = cid
        members = [start]
        frontier = [start]
        while frontier:
            p = frontier.pop()
            for q in neighbours[p]:
                if label[q] != -1:
                    continue
                label[q] = cid
                members.append(int(q))
                if is_core[q]:
                    frontier.append(int(q))
        clusters.append(sorted(members))
    noise = [i for i in range(n) if label[i] == -1]
    return clusters, noise


@dataclass(frozen=True)
class Node:
    id: int
    category: str
    attributes: str = ""
    image_id: str | None = None


@dataclass(frozen=True)
class Hyperedge:
    id: int
    members: tuple[int, ...]


@dataclass(frozen=True)
class SceneHypergraph:
    nodes: tuple[Node, ...] = ()
    hyperedges: tuple[Hyperedge, ...] = ()
    scene_id: str = ""
    _incidence: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n, k = len(self.nodes), len(self.hyperedges)
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise ValueError(f"node ids must be contiguous from 0; position {i} has id {node.id}")
        inc = np.zeros((n, k), dtype=np.int8)
        for j, edge in enumerate(self.hyperedges):
            if edge.id != j:
                raise ValueError(f"hyperedge ids must be contiguous from 0; position {j} has id {edge.id}")
            if list(edge.members) != sorted(set(edge.members)):
                raise ValueError(f"hyperedge {j} members must be sorted and duplicate-free")
            for m in edge.members:
                if not 0 <= m < n:
                    raise ValueError(f"hyperedge {j} references unknown node {m}")
                inc[m, j] = 1
        inc.setflags(write=False)
        object.__setattr__(self, "_incidence", inc)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.hyperedges)

    @property
    def incidence(self) -> np.ndarray:
        return self._incidence

    @property
    def assignment(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {node.id: [] for node in self.nodes}
        for edge in self.hyperedges:
            for m in edge.members:
                out[m].append(edge.id)
        return out


def incidence_of(graph: SceneHypergraph) -> np.ndarray:
    """Binary N x K incidence matrix (a fresh, writable copy)."""
    return np.array(graph.incidence, dtype=np.int8, copy=True)


def build_hypergraph(scene: SceneRecord, params: ClusteringParams | Mapping[str, ClusteringParams] | None = None,
                     ) -> SceneHypergraph:
    """Cluster each image's objects and pool the hyperedges over the scene.

    ``params`` may be one ``ClusteringParams`` for every image, a mapping from
    image id to params, or ``None`` for the resolution-relative default.
    Within an image, hyperedges are ordered by their smallest member id.
    """
    nodes = tuple(Node(o.id, o.category, o.attributes, o.image_id) for o in scene.objects)
    groups: list[tuple[int, ...]] = []
    for image in scene.images:
        objs = scene.objects_in(image.id)
        if not objs:
            continue
        if params is None:
            p = default_params(image.width, image.height)
        elif isinstance(params, ClusteringParams):
            p = params
        else:
            p = params.get(image.id) or default_params(image.width, image.height)
        clusters, noise = cluster_positions([o.position for o in objs], p)
        local = [tuple(objs[i].id for i in c) for c in clusters] + [(objs[i].id,) for i in noise]
        groups.extend(sorted(local, key=lambda members: members[0]))
    edges = tuple(Hyperedge(j, tuple(sorted(m))) for j, m in enumerate(groups))
    return SceneHypergraph(nodes, edges, scene.scene_id)


def hypergraph_to_dict(graph: SceneHypergraph) -> dict[str, Any]:
    return {
        "scene_id": graph.scene_id,
        "nodes": [
            {"id": n.id, "category": n.category, "attributes": n.attributes}
            | ({"image_id": n.image_id} if n.image_id is not None else {})
            for n in graph.nodes
        ],
        "hyperedges": [{"id": e.id, "members": list(e.members)} for e in graph.hyperedges],
    }


def hypergraph_from_dict(doc: Mapping[str, Any]) -> SceneHypergraph:
    nodes = tuple(
        Node(int(n["id"]), str(n["category"]), str(n.get("attributes", "")), n.get("image_id"))
        for n in sorted(doc.get("nodes", []), key=lambda n: n["id"])
    )
    edges = tuple(
        Hyperedge(int(e["id"]), tuple(int(m) for m in e["members"]))
        for e in sorted(doc.get("hyperedges", []), key=lambda e: e["id"])
    )
    return SceneHypergraph(nodes, edges, str(doc.get("scene_id", "")))


def dumps(graph: SceneHypergraph) -> str:
    return json.dumps(hypergraph_to_dict(graph), indent=2, ensure_ascii=False) + "\n"

