"""Tri-view hypergraph encoder: masked views, hashing text embeddings,
ELU projection heads and node/area/membership contrastive losses."""

from .config import DEFAULT_TEMPERATURE, MASK_TOKEN, PRESETS, AdamConfig, TriViewConfig, preset
from .embedding import HashingEmbedder, embed_texts
from .gradcheck import GradCheckReport, grad_check
from .heads import HeadParams, elu, head_backward, head_forward, head_jvp
from .losses import (
    area_loss,
    area_loss_grad,
    cosine,
    membership_loss,
    membership_loss_grad,
    node_loss,
    node_loss_grad,
    total_loss,
)
from .storage import format_trace, load_params, save_params, write_trace
from .training import (
    Adam,
    Batch,
    LossParts,
    NumericalError,
    ProjectedViews,
    TrainResult,
    TriViewParams,
    ViewEmbeddings,
    embed_views,
    evaluate,
    objective,
    project,
    retrieval_accuracy,
    train,
)
from .views import AugmentedView, make_views, mask_incidence, mask_text

__all__ = [
    "Adam", "AdamConfig", "AugmentedView", "Batch", "DEFAULT_TEMPERATURE", "GradCheckReport",
    "HashingEmbedder", "HeadParams", "LossParts", "MASK_TOKEN", "NumericalError", "PRESETS",
    "ProjectedViews", "TrainResult", "TriViewConfig", "TriViewParams", "ViewEmbeddings",
    "area_loss", "area_loss_grad", "cosine", "elu", "embed_texts", "embed_views", "evaluate",
    "format_trace", "grad_check", "head_backward", "head_forward", "head_jvp", "load_params",
    "make_views", "mask_incidence", "mask_text", "membership_loss", "membership_loss_grad",
    "node_loss", "node_loss_grad", "objective", "preset", "project", "retrieval_accuracy",
    "save_params", "total_loss", "train", "write_trace",
]
