"""Node-, area- and membership-level InfoNCE losses with analytic gradients.

Each ``*_grad`` function returns the loss value followed by gradients with
respect to its matrix arguments; the plain functions return the value only.
"""

from __future__ import annotations

import numpy as np


def cosine(u, v) -> float:
    """Cosine similarity; 0 when either vector is zero."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def _row_normalize(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(X, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    return X / safe[:, None] * (norms > 0)[:, None], safe


def _row_normalize_backward(dU: np.ndarray, U: np.ndarray, norms: np.ndarray) -> np.ndarray:
    # d(x/|x|) = (dU - u (u . dU)) / |x|; zero rows have U = 0 and get zero grad
    return (dU - U * (U * dU).sum(axis=1, keepdims=True)) / norms[:, None]


def _logsumexp(S: np.ndarray, axis: int) -> np.ndarray:
    m = S.max(axis=axis, keepdims=True)
    return (m + np.log(np.exp(S - m).sum(axis=axis, keepdims=True))).squeeze(axis)


def _softmax(S: np.ndarray, axis: int) -> np.ndarray:
    e = np.exp(S - S.max(axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


def infonce_grad(X1: np.ndarray, X2: np.ndarray, tau: float) -> tuple[float, np.ndarray, np.ndarray]:
    """Symmetrised cross-view InfoNCE with cosine scores.

    Row ``i`` of ``X1`` and row ``i`` of ``X2`` are the positive pair; every
    other row of the opposite view is a negative.
    """
    X1 = np.asarray(X1, dtype=np.float64)
    X2 = np.asarray(X2, dtype=np.float64)
    n = X1.shape[0]
    if n == 0:
        return 0.0, np.zeros_like(X1), np.zeros_like(X2)
    U, n1 = _row_normalize(X1)
    V, n2 = _row_normalize(X2)
    S = U @ V.T / tau
    diag = np.diag(S)
    loss = (np.sum(_logsumexp(S, 1) - diag) + np.sum(_logsumexp(S, 0) - diag)) / (2 * n)
    G = (_softmax(S, 1) + _softmax(S, 0) - 2 * np.eye(n)) / (2 * n)
    dU = G @ V / tau
    dV = G.T @ U / tau
    return float(loss), _row_normalize_backward(dU, U, n1), _row_normalize_backward(dV, V, n2)


def node_loss(W1, W2, tau_n: float) -> float:
    return infonce_grad(W1, W2, tau_n)[0]


def node_loss_grad(W1, W2, tau_n: float):
    return infonce_grad(W1, W2, tau_n)


def area_loss(D1, D2, tau_g: float) -> float:
    return infonce_grad(D1, D2, tau_g)[0]


def area_loss_grad(D1, D2, tau_g: float):
    return infonce_grad(D1, D2, tau_g)


def _membership_direction(W: np.ndarray, D: np.ndarray, H: np.ndarray, B: np.ndarray, tau: float):
    """Sum over memberships of per-pair losses for anchors ``W`` against ``D``.

    Returns ``(sum, dZ)`` where ``Z = W B D^T / tau`` holds the scaled scores.
    """
    Z = W @ B @ D.T / tau
    pos = H.astype(bool)
    neg = ~pos
    has_neg = neg.any(axis=1)
    # c_i: largest negative score in row i (0 where a row has no negatives)
    c = np.where(has_neg, np.where(neg, Z, -np.inf).max(axis=1), 0.0)
    En = np.exp(np.where(neg, Z - c[:, None], -np.inf))
    Sn = En.sum(axis=1)
    # per pair (i, j): -Z_ij + log(exp(Z_ij) + sum_neg exp(Z_ij')), shifted by M_ij
    M = np.where(has_neg[:, None], np.maximum(Z, c[:, None]), Z)
    ep = np.exp(Z - M)
    shift = np.exp(np.where(has_neg[:, None], c[:, None] - M, -np.inf))
    en = shift * Sn[:, None]
    denom = ep + en
    pair = -(Z - M) + np.log(denom)
    total = float(np.sum(np.where(pos, pair, 0.0)))

    dZ = np.where(pos, ep / denom - 1.0, 0.0)
    # every positive pair in row i pushes on that row's negatives
    coef = np.where(pos, shift / denom, 0.0).sum(axis=1)
    dZ = dZ + En * coef[:, None]
    return total, dZ


def membership_loss_grad(W1, W2, D1, D2, H, B, tau_m: float, H2=None,
                         normalize_by_memberships: bool = False):
    """Membership contrast between node and hyperedge projections.

    The discriminator is bilinear, ``D(w, d) = w^T B d``. For a membership
    ``h_ij = 1`` the positive score ``D(w_i, d_j)`` competes with the scores
    of hyperedges ``j'`` with ``h_ij' = 0``; all scores are divided by
    ``tau_m``. Anchors of view 1 pair with hyperedges of view 2 under ``H``,
    anchors of view 2 with hyperedges of view 1 under ``H2`` (default ``H``).
    The sum is divided by ``2K``, or by the total membership count when
    ``normalize_by_memberships`` is set.

    Returns ``(loss, dW1, dW2, dD1, dD2, dB)``.
    """
    W1, W2, D1, D2, B = (np.asarray(a, dtype=np.float64) for a in (W1, W2, D1, D2, B))
    H1 = np.asarray(H)
    H2 = H1 if H2 is None else np.asarray(H2)
    K = H1.shape[1]
    s1, dZ1 = _membership_direction(W1, D2, H1, B, tau_m)
    s2, dZ2 = _membership_direction(W2, D1, H2, B, tau_m)
    if normalize_by_memberships:
        scale = 1.0 / max(int(H1.sum() + H2.sum()), 1)
    else:
        scale = 1.0 / (2 * K) if K else 0.0
    loss = (s1 + s2) * scale
    G1, G2 = dZ1 * (scale / tau_m), dZ2 * (scale / tau_m)
    dW1 = G1 @ D2 @ B.T
    dD2 = G1.T @ W1 @ B
    dW2 = G2 @ D1 @ B.T
    dD1 = G2.T @ W2 @ B
    dB = W1.T @ G1 @ D2 + W2.T @ G2 @ D1
    return float(loss), dW1, dW2, dD1, dD2, dB


def membership_loss(W1, W2, D1, D2, H, B, tau_m: float, H2=None,
                    normalize_by_memberships: bool = False) -> float:
    return membership_loss_grad(W1, W2, D1, D2, H, B, tau_m, H2, normalize_by_memberships)[0]


def total_loss(L_n: float, L_g: float, L_m: float, alpha_g: float = 1.0, alpha_m: float = 1.0) -> float:
    return L_n + alpha_g * L_g + alpha_m * L_m
