"""A linear model trained with L1 loss, the smallest useful program for the loop."""

from __future__ import annotations

import numpy as np

from .brain import Brain, Stage


def _array(value) -> np.ndarray:
    # padded batch items carry their array in ``.data``
    return np.asarray(getattr(value, "data", value), dtype=np.float64)


class LinearL1(Brain):
    """``y = x W^T + b`` with mean absolute error; parameters are ``[W.ravel(), b]``."""

    def __init__(self, n_in: int, n_out: int, optimizer, checkpointer=None, seed: int = 0, init_scale: float = 0.1):
        init = np.random.default_rng(seed).normal(scale=init_scale, size=n_out * n_in + n_out)
        super().__init__(init, optimizer, checkpointer, seed)
        self.n_in, self.n_out = n_in, n_out

    def unpack(self, params=None):
        p = self.params if params is None else params
        k = self.n_out * self.n_in
        return p[:k].reshape(self.n_out, self.n_in), p[k:]

    def compute_forward(self, batch, stage: Stage):
        W, b = self.unpack()
        return _array(batch["input"]) @ W.T + b

    def compute_objectives(self, predictions, batch, stage: Stage):
        x, t = _array(batch["input"]), _array(batch["target"])
        r = predictions - t
        loss = np.mean(np.abs(r))
        g = np.sign(r) / r.size
        return loss, np.concatenate([(g.T @ x).ravel(), g.sum(axis=0)])
