"""LAMB optimizer and the warmup + cosine learning-rate schedule."""

from __future__ import annotations

import numpy as np

from .layers import Weights


class Lamb:
    """Layer-wise adaptive moments: Adam-style bias-corrected moments with a
    per-parameter trust ratio |w| / |update|.

    The trust ratio falls back to 1 when either norm is zero, so zero
    gradients on zero moments leave parameters untouched.
    """

    def __init__(
        self,
        weights: Weights,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-6,
        weight_decay: float = 0.0,
    ):
        self.weights = weights
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay

    def step(self, lr: float):
        w = self.weights
        w.step_count += 1
        t = w.step_count
        bc1 = 1.0 - self.beta1**t
        bc2 = 1.0 - self.beta2**t
        for name, param in w.items():
            g = param.grad
            if g is None:
                g = np.zeros_like(param.data)
            m = w.opt_m.get(name)
            if m is None:
                m = np.zeros_like(param.data)
                v = np.zeros_like(param.data)
            else:
                v = w.opt_v[name]
            m = self.beta1 * m + (1.0 - self.beta1) * g
            v = self.beta2 * v + (1.0 - self.beta2) * g * g
            w.opt_m[name] = m
            w.opt_v[name] = v
            m_hat = m / bc1
            v_hat = v / bc2
            update = m_hat / (np.sqrt(v_hat) + self.eps)
            if self.weight_decay:
                update = update + self.weight_decay * param.data
            w_norm = float(np.linalg.norm(param.data.ravel()))
            u_norm = float(np.linalg.norm(update.ravel()))
            ratio = w_norm / u_norm if (w_norm > 0.0 and u_norm > 0.0) else 1.0
            param.data = param.data - (lr * ratio) * update


def lr_at(step: int, base_lr: float, warmup_steps: int, total_steps: int) -> float:
    """Linear ramp 0 -> base_lr over the warmup, then cosine decay to 0."""
    if step < 0 or step > total_steps:
        raise ValueError(f"step {step} outside [0, {total_steps}]")
    if warmup_steps > 0 and step < warmup_steps:
        return base_lr * step / warmup_steps
    if total_steps == warmup_steps:
        return base_lr
    progress = (step - warmup_steps) / (total_steps - warmup_steps)
    return base_lr * 0.5 * (1.0 + np.cos(np.pi * progress))
