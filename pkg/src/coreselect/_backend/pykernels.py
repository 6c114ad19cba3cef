"""NumPy reference implementations of the inner-loop training kernels.

Both backends share this contract: parameters are updated in place,
gradients are momentum-SGD on loss_scale * sum of per-example losses over
the subset, and the return value is (final epoch-end loss, epochs run).

`perms` carries one index permutation per epoch for mini-batch order so the
schedule is fixed by the caller's rng, not by the backend. batch <= 0 or
batch >= m means full-batch gradients and perms may be None.
"""

from __future__ import annotations

import numpy as np

__all__ = ["train_logistic", "train_mlp"]


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    zmax = z.max(axis=1, keepdims=True)
    e = np.exp(z - zmax)
    return e / e.sum(axis=1, keepdims=True)


def _xent_sum(z: np.ndarray, y: np.ndarray) -> float:
    zmax = z.max(axis=1)
    lse = np.log(np.exp(z - zmax[:, None]).sum(axis=1)) + zmax
    return float((lse - z[np.arange(z.shape[0]), y]).sum())


def _batch_slices(m: int, batch: int, perm: np.ndarray | None):
    if batch <= 0 or batch >= m:
        yield np.arange(m) if perm is None else perm
        return
    for start in range(0, m, batch):
        yield perm[start : start + batch]


def train_logistic(X, y, W, b, lr, momentum, epochs, loss_scale, batch, perms,
                   plateau_tol, patience):
    """Momentum-SGD on softmax cross-entropy, linear head. In-place on W, b."""
    m = X.shape[0]
    vW = np.zeros_like(W)
    vb = np.zeros_like(b)
    prev = np.inf
    streak = 0
    loss = np.inf
    epochs_run = 0
    for epoch in range(epochs):
        perm = None if perms is None else perms[epoch]
        for idx in _batch_slices(m, batch, perm):
            Xb = X[idx]
            P = _softmax_rows(Xb @ W + b)
            P[np.arange(idx.size), y[idx]] -= 1.0
            factor = loss_scale * (m / idx.size)
            gW = factor * (Xb.T @ P)
            gb = factor * P.sum(axis=0)
            vW *= momentum
            vW += gW
            vb *= momentum
            vb += gb
            W -= lr * vW
            b -= lr * vb
        loss = loss_scale * _xent_sum(X @ W + b, y)
        epochs_run = epoch + 1
        if prev - loss < plateau_tol:
            streak += 1
            if streak >= patience:
                break
        else:
            streak = 0
        prev = loss
    return float(loss), epochs_run


def train_mlp(X, y, W1, b1, W2, b2, W3, b3, lr, momentum, epochs, loss_scale,
              batch, perms, plateau_tol, patience):
    """Momentum-SGD on a two-hidden-layer ReLU net with softmax output.

    In-place on all six parameter arrays.
    """
    m = X.shape[0]
    params = (W1, b1, W2, b2, W3, b3)
    vel = [np.zeros_like(p) for p in params]
    prev = np.inf
    streak = 0
    loss = np.inf
    epochs_run = 0

    def forward(Xb):
        H1 = np.maximum(0.0, Xb @ W1 + b1)
        H2 = np.maximum(0.0, H1 @ W2 + b2)
        return H1, H2, H2 @ W3 + b3

    for epoch in range(epochs):
        perm = None if perms is None else perms[epoch]
        for idx in _batch_slices(m, batch, perm):
            Xb = X[idx]
            H1, H2, Z = forward(Xb)
            D3 = _softmax_rows(Z)
            D3[np.arange(idx.size), y[idx]] -= 1.0
            D3 *= loss_scale * (m / idx.size)
            D2 = (D3 @ W3.T) * (H2 > 0.0)
            D1 = (D2 @ W2.T) * (H1 > 0.0)
            grads = (
                Xb.T @ D1, D1.sum(axis=0),
                H1.T @ D2, D2.sum(axis=0),
                H2.T @ D3, D3.sum(axis=0),
            )
            for p, v, g in zip(params, vel, grads):
                v *= momentum
                v += g
                p -= lr * v
        _, _, Z = forward(X)
        loss = loss_scale * _xent_sum(Z, y)
        epochs_run = epoch + 1
        if prev - loss < plateau_tol:
            streak += 1
            if streak >= patience:
                break
        else:
            streak = 0
        prev = loss
    return float(loss), epochs_run
