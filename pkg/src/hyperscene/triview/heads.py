"""Two-layer ELU projection heads with hand-written reverse mode."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def elu(x):
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0, x, np.expm1(np.minimum(x, 0.0)))


def elu_grad(x):
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0, 1.0, np.exp(np.minimum(x, 0.0)))


@dataclass
class HeadParams:
    """``y = A2 @ elu(A1 @ x + b1) + b2`` applied row-wise."""

    A1: np.ndarray  # (hidden, d_in)
    b1: np.ndarray  # (hidden,)
    A2: np.ndarray  # (d_out, hidden)
    b2: np.ndarray  # (d_out,)

    @classmethod
    def init(cls, d_in: int, d_out: int, rng: np.random.Generator, hidden: int | None = None) -> "HeadParams":
        hidden = d_out if hidden is None else hidden
        lim1, lim2 = 1.0 / np.sqrt(d_in), 1.0 / np.sqrt(hidden)
        return cls(
            rng.uniform(-lim1, lim1, (hidden, d_in)),
            rng.uniform(-lim1, lim1, hidden),
            rng.uniform(-lim2, lim2, (d_out, hidden)),
            rng.uniform(-lim2, lim2, d_out),
        )

    @classmethod
    def zeros_like(cls, other: "HeadParams") -> "HeadParams":
        return cls(*(np.zeros_like(a) for a in other.arrays()))

    def arrays(self) -> tuple[np.ndarray, ...]:
        return (self.A1, self.b1, self.A2, self.b2)

    def copy(self) -> "HeadParams":
        return HeadParams(*(a.copy() for a in self.arrays()))


@dataclass
class HeadCache:
    x: np.ndarray
    pre: np.ndarray
    act: np.ndarray


def check_shapes(x: np.ndarray, head: HeadParams) -> None:
    hidden, d_in = head.A1.shape
    d_out, hidden2 = head.A2.shape
    if (x.ndim != 2 or x.shape[1] != d_in or head.b1.shape != (hidden,)
            or hidden2 != hidden or head.b2.shape != (d_out,)):
        raise ValueError(
            f"head shape mismatch: input {x.shape}, A1 {head.A1.shape}, b1 {head.b1.shape}, "
            f"A2 {head.A2.shape}, b2 {head.b2.shape}")


def head_forward(x: np.ndarray, head: HeadParams) -> tuple[np.ndarray, HeadCache]:
    x = np.asarray(x, dtype=np.float64)
    check_shapes(x, head)
    pre = x @ head.A1.T + head.b1
    act = elu(pre)
    return act @ head.A2.T + head.b2, HeadCache(x, pre, act)


def head_backward(dy: np.ndarray, cache: HeadCache, head: HeadParams) -> HeadParams:
    """Parameter gradients given the upstream gradient ``dy`` of the output."""
    dA2 = dy.T @ cache.act
    db2 = dy.sum(axis=0)
    dpre = (dy @ head.A2) * elu_grad(cache.pre)
    dA1 = dpre.T @ cache.x
    db1 = dpre.sum(axis=0)
    return HeadParams(dA1, db1, dA2, db2)


def head_jvp(x: np.ndarray, dx: np.ndarray, head: HeadParams) -> np.ndarray:
    """Directional derivative of the head output w.r.t. its input along ``dx``."""
    pre = x @ head.A1.T + head.b1
    return ((dx @ head.A1.T) * elu_grad(pre)) @ head.A2.T
