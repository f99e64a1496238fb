"""Forward/backward pass of the tri-view objective and an Adam training loop."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..enrich import EnrichedHypergraph
from .config import TriViewConfig
from .embedding import EmbeddingProvider, HashingEmbedder
from .heads import HeadParams, head_backward, head_forward
from .losses import area_loss_grad, membership_loss_grad, node_loss_grad, total_loss
from .views import AugmentedView, make_views


class NumericalError(FloatingPointError):
    def __init__(self, step: int, message: str = "non-finite loss"):
        super().__init__(f"{message} at step {step}")
        self.step = step


@dataclass(frozen=True)
class ViewEmbeddings:
    node_embed: np.ndarray
    edge_embed: np.ndarray

    @property
    def d(self) -> int:
        return self.node_embed.shape[1]


@dataclass(frozen=True)
class ProjectedViews:
    node_proj: np.ndarray
    edge_proj: np.ndarray

    @property
    def d_p(self) -> int:
        return self.node_proj.shape[1]


@dataclass
class TriViewParams:
    node_head: HeadParams
    edge_head: HeadParams
    B: np.ndarray

    NAMES = ("node.A1", "node.b1", "node.A2", "node.b2",
             "edge.A1", "edge.b1", "edge.A2", "edge.b2", "discriminator.B")

    @classmethod
    def init(cls, d: int, d_p: int, rng: np.random.Generator) -> "TriViewParams":
        node = HeadParams.init(d, d_p, rng)
        edge = HeadParams.init(d, d_p, rng)
        return cls(node, edge, np.eye(d_p) / np.sqrt(d_p))

    def arrays(self) -> list[np.ndarray]:
        return [*self.node_head.arrays(), *self.edge_head.arrays(), self.B]

    @classmethod
    def from_arrays(cls, arrays) -> "TriViewParams":
        a = list(arrays)
        return cls(HeadParams(*a[0:4]), HeadParams(*a[4:8]), a[8])

    def copy(self) -> "TriViewParams":
        return TriViewParams.from_arrays([x.copy() for x in self.arrays()])


def project(embeddings: ViewEmbeddings, params: TriViewParams) -> ProjectedViews:
    W, _ = head_forward(embeddings.node_embed, params.node_head)
    D, _ = head_forward(embeddings.edge_embed, params.edge_head)
    return ProjectedViews(W, D)


@dataclass(frozen=True)
class Batch:
    """Frozen inputs of one objective evaluation: embeddings and incidences of both views."""

    P1: np.ndarray
    P2: np.ndarray
    Q1: np.ndarray
    Q2: np.ndarray
    H1: np.ndarray
    H2: np.ndarray


def embed_views(v1: AugmentedView, v2: AugmentedView, embedder: EmbeddingProvider) -> Batch:
    return Batch(embedder.embed(v1.node_texts), embedder.embed(v2.node_texts),
                 embedder.embed(v1.edge_texts), embedder.embed(v2.edge_texts),
                 v1.incidence, v2.incidence)


@dataclass(frozen=True)
class LossParts:
    node: float
    area: float
    membership: float
    total: float


def objective(params: TriViewParams, batch: Batch, config: TriViewConfig,
              with_grad: bool = True) -> tuple[LossParts, TriViewParams | None]:
    """Total loss on one view pair and, optionally, its parameter gradient."""
    W1, cw1 = head_forward(batch.P1, params.node_head)
    W2, cw2 = head_forward(batch.P2, params.node_head)
    D1, cd1 = head_forward(batch.Q1, params.edge_head)
    D2, cd2 = head_forward(batch.Q2, params.edge_head)

    Ln, gW1, gW2 = node_loss_grad(W1, W2, config.tau_n)
    Lg, gD1, gD2 = area_loss_grad(D1, D2, config.tau_g)
    Lm, mW1, mW2, mD1, mD2, gB = membership_loss_grad(
        W1, W2, D1, D2, batch.H1, params.B, config.tau_m, batch.H2, config.normalize_by_memberships)
    parts = LossParts(Ln, Lg, Lm, total_loss(Ln, Lg, Lm, config.alpha_g, config.alpha_m))
    if not with_grad:
        return parts, None

    ag, am = config.alpha_g, config.alpha_m
    dW1, dW2 = gW1 + am * mW1, gW2 + am * mW2
    dD1, dD2 = ag * gD1 + am * mD1, ag * gD2 + am * mD2
    n1 = head_backward(dW1, cw1, params.node_head)
    n2 = head_backward(dW2, cw2, params.node_head)
    e1 = head_backward(dD1, cd1, params.edge_head)
    e2 = head_backward(dD2, cd2, params.edge_head)
    node_grad = HeadParams(*(a + b for a, b in zip(n1.arrays(), n2.arrays())))
    edge_grad = HeadParams(*(a + b for a, b in zip(e1.arrays(), e2.arrays())))
    return parts, TriViewParams(node_grad, edge_grad, am * gB)


class Adam:
    def __init__(self, params: TriViewParams, learning_rate: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps_stability: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = learning_rate, beta1, beta2, eps_stability
        self.m = [np.zeros_like(a) for a in params.arrays()]
        self.v = [np.zeros_like(a) for a in params.arrays()]
        self.t = 0

    def step(self, params: TriViewParams, grads: TriViewParams) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params.arrays(), grads.arrays(), self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class TrainResult:
    params: TriViewParams
    initial_params: TriViewParams
    trace: list[LossParts] = field(default_factory=list)


def train(graph: EnrichedHypergraph, config: TriViewConfig,
          embedder: EmbeddingProvider | None = None, steps: int | None = None) -> TrainResult:
    """Train the projection heads and discriminator on fresh view pairs.

    Every step draws a new masked view pair, records the losses on it
    before the update, then takes one Adam step. The embedder is frozen.
    """
    if graph.base.num_nodes < 2:
        raise ValueError("training needs a graph with at least 2 nodes")
    embedder = embedder or HashingEmbedder(config.d)
    steps = config.steps if steps is None else steps
    rng = np.random.default_rng(config.seed)
    init_rng, view_rng = rng.spawn(2)
    params = TriViewParams.init(config.d, config.d_p, init_rng)
    initial = params.copy()
    opt = Adam(params, **vars(config.optimizer))
    result = TrainResult(params, initial)
    for step in range(steps):
        v1, v2 = make_views(graph, config, view_rng)
        parts, grads = objective(params, embed_views(v1, v2, embedder), config)
        if not all(np.isfinite([parts.node, parts.area, parts.membership, parts.total])):
            raise NumericalError(step)
        result.trace.append(parts)
        opt.step(params, grads)
    return result


def retrieval_accuracy(W1: np.ndarray, W2: np.ndarray) -> float:
    """Fraction of rows ``i`` whose cosine nearest neighbour in ``W2`` is row ``i``."""
    U = W1 / np.maximum(np.linalg.norm(W1, axis=1, keepdims=True), 1e-300)
    V = W2 / np.maximum(np.linalg.norm(W2, axis=1, keepdims=True), 1e-300)
    nearest = np.argmax(U @ V.T, axis=1)
    return float(np.mean(nearest == np.arange(len(W1)))) if len(W1) else 0.0


def evaluate(params: TriViewParams, graph: EnrichedHypergraph, config: TriViewConfig, seed: int,
             embedder: EmbeddingProvider | None = None) -> tuple[LossParts, float]:
    """Losses and cross-view node retrieval accuracy on one seeded view pair."""
    embedder = embedder or HashingEmbedder(config.d)
    v1, v2 = make_views(graph, config, np.random.default_rng(seed))
    batch = embed_views(v1, v2, embedder)
    parts, _ = objective(params, batch, config, with_grad=False)
    W1, _ = head_forward(batch.P1, params.node_head)
    W2, _ = head_forward(batch.P2, params.node_head)
    return parts, retrieval_accuracy(W1, W2)
