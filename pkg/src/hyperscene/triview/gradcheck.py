"""Finite-difference verification of the analytic objective gradient."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import TriViewConfig
from .training import Batch, TriViewParams, objective

DEFAULT_STEP = 1e-6


@dataclass
class GradCheckReport:
    trials: int
    max_rel_error: float
    per_param: dict[str, float] = field(default_factory=dict)
    max_elementwise_error: float = 0.0

    def passed(self, tol: float = 1e-5) -> bool:
        return self.max_rel_error < tol

    def lines(self) -> list[str]:
        out = [f"trials: {self.trials}", f"max relative error: {self.max_rel_error:.3e}",
               f"max elementwise error: {self.max_elementwise_error:.3e}"]
        out += [f"  {name}: {err:.3e}" for name, err in self.per_param.items()]
        return out


def random_incidence(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Random binary n x k matrix with every row and column non-empty."""
    H = (rng.random((n, k)) < 0.3).astype(np.int8)
    for t in range(max(n, k)):
        H[t % n, t % k] = 1
    return H


def random_instance(config: TriViewConfig, rng: np.random.Generator,
                    max_nodes: int = 6, max_edges: int = 4) -> tuple[TriViewParams, Batch]:
    k = int(rng.integers(1, max_edges + 1))
    n = int(rng.integers(max(k, 2), max_nodes + 1))
    H = random_incidence(n, k, rng)
    # second view: drop some memberships while keeping rows/cols non-empty
    H2 = H.copy()
    for i, j in zip(*np.nonzero(H)):
        if rng.random() < 0.3 and H2[i].sum() > 1 and H2[:, j].sum() > 1:
            H2[i, j] = 0
    d = config.d
    batch = Batch(rng.normal(size=(n, d)), rng.normal(size=(n, d)),
                  rng.normal(size=(k, d)), rng.normal(size=(k, d)), H, H2)
    params = TriViewParams.init(d, config.d_p, rng)
    # perturb B away from the scaled identity so its gradient is generic
    params.B = params.B + 0.1 * rng.normal(size=params.B.shape)
    return params, batch


def finite_difference(params: TriViewParams, batch: Batch, config: TriViewConfig,
                      h: float = DEFAULT_STEP) -> TriViewParams:
    arrays = [a.copy() for a in params.arrays()]
    grads = []
    for a_idx, arr in enumerate(arrays):
        g = np.zeros_like(arr)
        flat, gflat = arr.reshape(-1), g.reshape(-1)
        for e in range(flat.size):
            orig = flat[e]
            flat[e] = orig + h
            up = objective(TriViewParams.from_arrays(arrays), batch, config, with_grad=False)[0].total
            flat[e] = orig - h
            down = objective(TriViewParams.from_arrays(arrays), batch, config, with_grad=False)[0].total
            flat[e] = orig
            gflat[e] = (up - down) / (2 * h)
        grads.append(g)
    return TriViewParams.from_arrays(grads)


def grad_check(config: TriViewConfig, trials: int = 5, seed: int | None = None,
               h: float = DEFAULT_STEP) -> GradCheckReport:
    """Compare analytic and central-difference gradients on random small instances.

    Instances have at most 6 nodes, 4 hyperedges and ``d, d_p <= 8``
    (larger config widths are clamped). The relative error of a parameter
    array is ``|a - n| / max(|a|, |n|)`` in the Euclidean norm.
    """
    cfg = config.replace(d=min(config.d, 8), d_p=min(config.d_p, 8))
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    per_param = {name: 0.0 for name in TriViewParams.NAMES}
    worst_elem = 0.0
    for _ in range(trials):
        params, batch = random_instance(cfg, rng)
        _, analytic = objective(params, batch, cfg)
        numeric = finite_difference(params, batch, cfg, h)
        for name, a, n in zip(TriViewParams.NAMES, analytic.arrays(), numeric.arrays()):
            scale = max(np.linalg.norm(a), np.linalg.norm(n))
            err = float(np.linalg.norm(a - n) / scale) if scale > 0 else 0.0
            per_param[name] = max(per_param[name], err)
            elem_scale = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-3)
            worst_elem = max(worst_elem, float(np.max(np.abs(a - n) / elem_scale)))
    return GradCheckReport(trials, max(per_param.values()), per_param, worst_elem)
