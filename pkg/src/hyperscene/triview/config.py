from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Mapping

DEFAULT_TEMPERATURE = 0.07
MASK_TOKEN = "[MASK]"


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_stability: float = 1e-8


@dataclass(frozen=True)
class TriViewConfig:
    """Hyperparameters of the tri-view encoder.

    ``d`` is the text-embedding width, ``d_p`` the projection width (also the
    hidden width of both projection heads).
    """

    tau_n: float = DEFAULT_TEMPERATURE
    tau_g: float = DEFAULT_TEMPERATURE
    tau_m: float = DEFAULT_TEMPERATURE
    alpha_g: float = 1.0
    alpha_m: float = 1.0
    mask_prob_text: float = 0.2
    mask_prob_incidence: float = 0.2
    d: int = 32
    d_p: int = 32
    seed: int = 0
    optimizer: AdamConfig = field(default_factory=AdamConfig)
    steps: int = 500
    normalize_by_memberships: bool = False

    def __post_init__(self):
        for name in ("tau_n", "tau_g", "tau_m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("alpha_g", "alpha_m"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("mask_prob_text", "mask_prob_incidence"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.d < 1 or self.d_p < 1:
            raise ValueError("d and d_p must be positive")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")

    def replace(self, **changes: Any) -> "TriViewConfig":
        """Copy with changes; ``temperature`` sets all three temperatures and
        ``learning_rate`` reaches into the optimizer block."""
        changes = dict(changes)
        if "temperature" in changes:
            t = changes.pop("temperature")
            for name in ("tau_n", "tau_g", "tau_m"):
                changes.setdefault(name, t)
        opt_keys = {f.name for f in dataclasses.fields(AdamConfig)}
        opt_changes = {k: changes.pop(k) for k in list(changes) if k in opt_keys}
        if opt_changes:
            changes["optimizer"] = dataclasses.replace(changes.get("optimizer", self.optimizer), **opt_changes)
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "TriViewConfig":
        doc = dict(doc)
        opt = doc.pop("optimizer", None)
        base = cls()
        if opt is not None:
            doc["optimizer"] = AdamConfig(**opt)
        return base.replace(**doc)

    def digest(self) -> bytes:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).digest()


PRESETS: dict[str, TriViewConfig] = {
    "desk": TriViewConfig(),
    "paper": TriViewConfig(d=512, d_p=512, optimizer=AdamConfig(learning_rate=2e-5)),
}


def preset(name: str) -> TriViewConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; known: {', '.join(sorted(PRESETS))}") from None
