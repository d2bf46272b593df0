"""Inter-layer weight dynamics and competition rules.

Weights are stored (post x pre) so the forward pass is a plain matrix-vector
product W @ y_pre. The learning rule is the Hebbian outer-product form: the
synapse between a co-spiking pre/post pair grows at rate eta, everything
else is untouched. Growth is unbounded by itself, so entries are hard-clamped
to [0, w_max] after every update (optionally, rows can be divisively
normalized instead of relying on the clamp alone).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CompetitionRule:
    """Selection applied to a layer's output spikes or incoming signal."""

    kind: str = "none"  # none | wta | k_best
    k: int = 1

    def __post_init__(self):
        if self.kind not in ("none", "wta", "k_best"):
            raise ValueError(f"unknown competition rule: {self.kind!r}")
        if self.kind == "k_best" and self.k < 1:
            raise ValueError("k must be >= 1")

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "none":
            return x
        if self.kind == "wta":
            return winner_take_all(x)
        return k_best(x, self.k)


@dataclass(frozen=True)
class PlasticityParams:
    eta: float = 0.0
    w_max: float = 1.0
    normalize: bool = False

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if self.w_max <= 0:
            raise ValueError("w_max must be positive")


def stdp_update(
    W: np.ndarray,
    y_pre: np.ndarray,
    y_post: np.ndarray,
    eta: float,
    dt: float,
    w_max: float = np.inf,
) -> np.ndarray:
    """One Euler step of the Hebbian rule: W + dt*eta*(y_post (x) y_pre), clamped.

    Returns a new matrix; the input is never modified. Entries where either
    spike signal is zero are untouched (up to the clamp, which only ever
    lowers entries already above w_max).
    """
    W = np.asarray(W, dtype=np.float64)
    y_pre = np.asarray(y_pre, dtype=np.float64)
    y_post = np.asarray(y_post, dtype=np.float64)
    if W.shape != (y_post.shape[0], y_pre.shape[0]):
        raise ValueError(f"weight shape {W.shape} does not match (post={y_post.shape[0]}, pre={y_pre.shape[0]})")
    out = W + dt * eta * np.outer(y_post, y_pre)
    np.clip(out, 0.0, w_max, out=out)
    return out


def stdp_update_inplace(W, y_pre, y_post, eta, dt, w_max):
    """Sparse in-place variant used by the run loop; touches only co-active rows/cols."""
    if eta == 0.0 or dt == 0.0:
        return
    pre = np.flatnonzero(y_pre)
    post = np.flatnonzero(y_post)
    if pre.size == 0 or post.size == 0:
        return
    block = W[np.ix_(post, pre)]
    block += dt * eta * np.outer(y_post[post], y_pre[pre])
    np.clip(block, 0.0, w_max, out=block)
    W[np.ix_(post, pre)] = block


def normalize_rows(W: np.ndarray, target_sum: float) -> np.ndarray:
    """Divisively rescale each row to the target sum (rows summing to zero stay zero)."""
    sums = W.sum(axis=1, keepdims=True)
    scale = np.where(sums > 0, target_sum / np.where(sums > 0, sums, 1.0), 1.0)
    return W * scale


def winner_take_all(x: np.ndarray) -> np.ndarray:
    """Zero every entry strictly below the maximum; ties at the max all survive."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("winner_take_all on an empty vector")
    m = x.max()
    return np.where(x < m, 0.0, m)


def k_best(x: np.ndarray, k: int) -> np.ndarray:
    """Keep the k largest entries (their own values); ties at rank k go to the lowest index."""
    x = np.asarray(x, dtype=np.float64)
    if not 1 <= k <= x.size:
        raise ValueError(f"k={k} out of range for vector of length {x.size}")
    # sort by value descending, then index ascending for deterministic ties
    order = np.lexsort((np.arange(x.size), -x))
    out = np.zeros_like(x)
    keep = order[:k]
    out[keep] = x[keep]
    return out


def relu(z: np.ndarray) -> np.ndarray:
    """Elementwise max(z, 0)."""
    return np.maximum(np.asarray(z, dtype=np.float64), 0.0)
