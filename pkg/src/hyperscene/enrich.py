"""Area labels for hyperedges and counterfactual scores for node attributes.

Annotation goes through an annotator object with a single method,
``annotate(request) -> dict``, which returns the wire reply (``{"text": ...}``
for area labels, ``{"score": ...}`` for counterfactual scores) or raises
``AnnotatorError``. Three annotators ship here:

* ``RemoteAnnotator`` posts requests to an HTTP service,
* ``ReplayAnnotator`` answers from a JSON-lines transcript and can record
  misses from an inner annotator,
* ``LexiconAnnotator`` is the deterministic rule-based fallback.

Whatever the annotator does, ``label_area``/``score_counterfactual`` always
produce a valid answer: failures drop to the lexicon rules.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
import os
import re
import threading
import urllib.error
import urllib.request
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Any, Mapping, Protocol, Sequence

from .hypergraph import SceneHypergraph, hypergraph_from_dict, hypergraph_to_dict
from .scene import TaskSpec

__all__ = [
    "AnnotatorError",
    "AnnotatorRequest",
    "EnrichedHypergraph",
    "LexiconAnnotator",
    "Provenance",
    "RemoteAnnotator",
    "ReplayAnnotator",
    "RequestKind",
    "ENDPOINT_ENV",
    "UNKNOWN_AREA",
    "enrich",
    "enriched_from_dict",
    "enriched_to_dict",
    "label_area",
    "load_area_lexicon",
    "load_abnormality_lexicon",
    "request_hash",
    "score_counterfactual",
]

UNKNOWN_AREA = "Unknown Area"
ENDPOINT_ENV = "HYPERSCENE_ANNOTATOR_ENDPOINT"
AREA_TEMPLATE = "area_label"
CF_TEMPLATE = "counterfactual"


class RequestKind(str, enum.Enum):
    AREA_LABEL = "AreaLabel"
    COUNTERFACTUAL_SCORE = "CounterfactualScore"


class Provenance(str, enum.Enum):
    ANNOTATOR = "Annotator"
    FALLBACK = "Fallback"
    CACHE = "Cache"


class AnnotatorError(RuntimeError):
    pass


@dataclass(frozen=True)
class AnnotatorRequest:
    kind: RequestKind
    payload: tuple[str, ...] | str
    template_id: str

    def __post_init__(self):
        if self.kind is RequestKind.COUNTERFACTUAL_SCORE and not self.payload:
            raise ValueError("CounterfactualScore payload must be non-empty")

    def to_wire(self) -> dict[str, Any]:
        payload = list(self.payload) if isinstance(self.payload, tuple) else self.payload
        return {"kind": self.kind.value, "payload": payload, "template_id": self.template_id}

    def prompt(self) -> str:
        """Render the bundled template for this request."""
        text = resources.files(__package__).joinpath("data", "templates", f"{self.template_id}.txt").read_text(
            encoding="utf-8")
        if self.kind is RequestKind.AREA_LABEL:
            return text.replace("{categories}", ", ".join(self.payload))
        return text.replace("{attributes}", str(self.payload))


def request_hash(request: AnnotatorRequest) -> str:
    """sha256 over the canonical JSON of kind, payload and template id."""
    canon = json.dumps(request.to_wire(), sort_keys=True, ensure_ascii=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


class Annotator(Protocol):
    def annotate(self, request: AnnotatorRequest) -> dict[str, Any]: ...


# ---------------------------------------------------------------- lexicons

@lru_cache(maxsize=None)
def _bundled(name: str) -> Mapping[str, Any]:
    return json.loads(resources.files(__package__).joinpath("data", name).read_text(encoding="utf-8"))


def load_area_lexicon(path: str | os.PathLike | None = None) -> dict[str, list[str]]:
    if path is None:
        return {k: list(v) for k, v in _bundled("area_lexicon.json").items()}
    with open(path, encoding="utf-8") as fh:
        return {str(k).lower(): list(v) for k, v in json.load(fh).items()}


def load_abnormality_lexicon(path: str | os.PathLike | None = None) -> dict[str, float]:
    if path is None:
        return dict(_bundled("abnormality_lexicon.json"))
    with open(path, encoding="utf-8") as fh:
        return {str(k).lower(): float(v) for k, v in json.load(fh).items()}


def _area_votes(category: str, lexicon: Mapping[str, Sequence[str]]) -> Sequence[str]:
    key = " ".join(category.lower().split())
    if key in lexicon:
        return lexicon[key]
    # "red apple" -> "apple": longest matching suffix
    tokens = key.split()
    for start in range(1, len(tokens)):
        suffix = " ".join(tokens[start:])
        if suffix in lexicon:
            return lexicon[suffix]
    return ()


def fallback_area_label(categories: Sequence[str], lexicon: Mapping[str, Sequence[str]]) -> str:
    votes: Counter[str] = Counter()
    for cat in categories:
        for area in _area_votes(cat, lexicon):
            votes[area] += 1
    if not votes:
        return UNKNOWN_AREA
    best = max(votes.values())
    return min(area for area, count in votes.items() if count == best)


def fallback_cf_score(attributes: str, lexicon: Mapping[str, float]) -> float:
    text = " ".join(attributes.lower().split())
    score = 0.0
    for term, value in lexicon.items():
        if re.search(r"(?<!\w)" + re.escape(term) + r"(?!\w)", text):
            score = max(score, float(value))
    return min(1.0, max(0.0, score))


class LexiconAnnotator:
    """Rule-based annotator backed by the bundled (or supplied) lexicons."""

    def __init__(self, area_lexicon: Mapping[str, Sequence[str]] | None = None,
                 abnormality_lexicon: Mapping[str, float] | None = None):
        self.area_lexicon = dict(area_lexicon) if area_lexicon is not None else load_area_lexicon()
        self.abnormality_lexicon = (dict(abnormality_lexicon) if abnormality_lexicon is not None
                                    else load_abnormality_lexicon())

    def annotate(self, request: AnnotatorRequest) -> dict[str, Any]:
        if request.kind is RequestKind.AREA_LABEL:
            return {"text": fallback_area_label(request.payload, self.area_lexicon)}
        return {"score": fallback_cf_score(str(request.payload), self.abnormality_lexicon)}


# ---------------------------------------------------------------- transports

class RemoteAnnotator:
    """Client for ``POST {endpoint}/annotate`` with body ``{kind, payload, template_id}``."""

    def __init__(self, endpoint: str | None = None, timeout: float = 30.0):
        endpoint = os.environ.get(ENDPOINT_ENV) or endpoint
        if not endpoint:
            raise ValueError(f"no annotator endpoint configured (pass one or set {ENDPOINT_ENV})")
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout

    def annotate(self, request: AnnotatorRequest) -> dict[str, Any]:
        body = json.dumps(request.to_wire()).encode("utf-8")
        req = urllib.request.Request(self.endpoint + "/annotate", data=body, method="POST",
                                     headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                reply = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise AnnotatorError(f"remote annotator failed: {exc}") from exc
        if not isinstance(reply, dict):
            raise AnnotatorError("remote annotator reply is not a JSON object")
        return reply


class ReplayAnnotator:
    """Answers from a transcript of ``{"request_hash", "reply"}`` JSON lines.

    With ``inner`` set, misses are forwarded and appended to the transcript
    (record mode); otherwise a miss raises ``AnnotatorError``.
    """

    def __init__(self, path: str | os.PathLike, inner: Annotator | None = None):
        self.path = os.fspath(path)
        self.inner = inner
        self._lock = threading.Lock()
        self._entries: dict[str, dict[str, Any]] = {}
        if os.path.exists(self.path):
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        rec = json.loads(line)
                        self._entries.setdefault(rec["request_hash"], rec["reply"])

    def __len__(self) -> int:
        return len(self._entries)

    def lookup(self, request: AnnotatorRequest) -> dict[str, Any] | None:
        return self._entries.get(request_hash(request))

    def fetch(self, request: AnnotatorRequest) -> tuple[dict[str, Any], bool]:
        """Return ``(reply, was_cached)``."""
        key = request_hash(request)
        with self._lock:
            if key in self._entries:
                return dict(self._entries[key]), True
        if self.inner is None:
            raise AnnotatorError(f"replay miss for request {key[:12]}")
        reply = self.inner.annotate(request)
        with self._lock:
            if key not in self._entries:
                self._entries[key] = dict(reply)
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps({"request_hash": key, "reply": reply}, sort_keys=True) + "\n")
        return dict(reply), False

    def annotate(self, request: AnnotatorRequest) -> dict[str, Any]:
        return self.fetch(request)[0]


# ---------------------------------------------------------------- operations

def _resolve(request: AnnotatorRequest, annotator: Annotator | None,
             fallback: LexiconAnnotator) -> tuple[dict[str, Any], Provenance]:
    if annotator is None or isinstance(annotator, LexiconAnnotator):
        return (annotator or fallback).annotate(request), Provenance.FALLBACK
    try:
        if isinstance(annotator, ReplayAnnotator):
            reply, cached = annotator.fetch(request)
        else:
            reply, cached = annotator.annotate(request), False
    except AnnotatorError:
        return fallback.annotate(request), Provenance.FALLBACK
    return reply, (Provenance.CACHE if cached else Provenance.ANNOTATOR)


def _fallback_for(annotator) -> LexiconAnnotator:
    if isinstance(annotator, LexiconAnnotator):
        return annotator
    return getattr(annotator, "fallback", None) or _default_fallback()


@lru_cache(maxsize=1)
def _default_fallback() -> LexiconAnnotator:
    return LexiconAnnotator()


def _label_area(categories: Sequence[str], annotator) -> tuple[str, Provenance]:
    fallback = _fallback_for(annotator)
    if not categories:
        return UNKNOWN_AREA, Provenance.FALLBACK
    request = AnnotatorRequest(RequestKind.AREA_LABEL, tuple(categories), AREA_TEMPLATE)
    reply, prov = _resolve(request, annotator, fallback)
    text = reply.get("text")
    if not isinstance(text, str) or not text.strip():
        return fallback.annotate(request)["text"], Provenance.FALLBACK
    return " ".join(text.split()), prov


def _score_counterfactual(attributes: str, annotator) -> tuple[float, Provenance]:
    fallback = _fallback_for(annotator)
    if not attributes.strip():
        return 0.0, Provenance.FALLBACK
    request = AnnotatorRequest(RequestKind.COUNTERFACTUAL_SCORE, attributes, CF_TEMPLATE)
    reply, prov = _resolve(request, annotator, fallback)
    raw = reply.get("score")
    try:
        score = float(raw)
    except (TypeError, ValueError):
        score = math.nan
    if isinstance(raw, bool) or not math.isfinite(score):
        return fallback.annotate(request)["score"], Provenance.FALLBACK
    return min(1.0, max(0.0, score)), prov


def label_area(categories: Sequence[str], annotator=None) -> str:
    """Area label for a group of object categories; ``"Unknown Area"`` when empty."""
    return _label_area(categories, annotator)[0]


def score_counterfactual(attributes: str, annotator=None) -> float:
    """Abnormality score in [0, 1]; empty attributes score 0."""
    return _score_counterfactual(attributes, annotator)[0]


@dataclass(frozen=True)
class EnrichedHypergraph:
    base: SceneHypergraph
    area_labels: dict[int, str] = field(default_factory=dict)
    cf_scores: dict[int, float] = field(default_factory=dict)
    edge_provenance: dict[int, Provenance] = field(default_factory=dict)
    node_provenance: dict[int, Provenance] = field(default_factory=dict)
    task: TaskSpec | None = None

    @property
    def scene_id(self) -> str:
        return self.base.scene_id

    @property
    def provenance(self) -> dict[str, Provenance]:
        out = {f"edge:{k}": v for k, v in self.edge_provenance.items()}
        out.update({f"node:{k}": v for k, v in self.node_provenance.items()})
        return out


def enrich(graph: SceneHypergraph, annotator=None, task: TaskSpec | None = None) -> EnrichedHypergraph:
    """Label every hyperedge and score every node, in id order."""
    labels: dict[int, str] = {}
    edge_prov: dict[int, Provenance] = {}
    for edge in graph.hyperedges:
        cats = [graph.nodes[m].category for m in edge.members]
        labels[edge.id], edge_prov[edge.id] = _label_area(cats, annotator)
    scores: dict[int, float] = {}
    node_prov: dict[int, Provenance] = {}
    for node in graph.nodes:
        scores[node.id], node_prov[node.id] = _score_counterfactual(node.attributes, annotator)
    return EnrichedHypergraph(graph, labels, scores, edge_prov, node_prov, task)


def enriched_to_dict(graph: EnrichedHypergraph) -> dict[str, Any]:
    doc = hypergraph_to_dict(graph.base)
    for node in doc["nodes"]:
        node["cf_score"] = graph.cf_scores.get(node["id"], 0.0)
        node["provenance"] = graph.node_provenance.get(node["id"], Provenance.FALLBACK).value
    for edge in doc["hyperedges"]:
        edge["label"] = graph.area_labels.get(edge["id"], UNKNOWN_AREA)
        edge["provenance"] = graph.edge_provenance.get(edge["id"], Provenance.FALLBACK).value
    if graph.task is not None:
        doc["task"] = {"goal": graph.task.goal, "guidance": list(graph.task.guidance)}
    return doc


def enriched_from_dict(doc: Mapping[str, Any]) -> EnrichedHypergraph:
    base = hypergraph_from_dict(doc)
    labels, scores, eprov, nprov = {}, {}, {}, {}
    for e in doc.get("hyperedges", []):
        labels[int(e["id"])] = str(e.get("label", UNKNOWN_AREA))
        eprov[int(e["id"])] = Provenance(e.get("provenance", Provenance.FALLBACK.value))
    for n in doc.get("nodes", []):
        score = float(n.get("cf_score", 0.0))
        if not 0.0 <= score <= 1.0:
            raise ValueError(f"node {n['id']}: cf_score {score} outside [0, 1]")
        scores[int(n["id"])] = score
        nprov[int(n["id"])] = Provenance(n.get("provenance", Provenance.FALLBACK.value))
    task = None
    if doc.get("task") is not None:
        task = TaskSpec(str(doc["task"].get("goal", "")), tuple(doc["task"].get("guidance", [])))
    return EnrichedHypergraph(base, labels, scores, eprov, nprov, task)
