"""Finite-difference verification of reverse-mode gradients.

Runs central differences on individual parameter coordinates and compares
against the analytic gradients. Requires float64 parameters; single
precision makes the difference quotient meaningless at h = 1e-5.
"""

from __future__ import annotations

import numpy as np

from .layers import Weights


def grad_check(
    fn,
    weights: Weights,
    h: float = 1e-5,
    max_coords: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Return the maximum relative error between analytic and numeric
    gradients of the scalar-valued `fn()` over the given weights.

    When the model has more coordinates than `max_coords`, a random subset is
    checked. The relative error uses max(|analytic|, |numeric|, 1) as the
    denominator so near-zero gradients are compared on an absolute scale.
    """
    if weights.dtype != np.float64:
        raise ValueError("grad_check requires float64 weights")
    weights.zero_grad()
    out = fn()
    if out.data.size != 1:
        raise ValueError("grad_check expects a scalar-valued function")
    out.backward()
    analytic = {
        name: (np.zeros_like(p.data) if p.grad is None else p.grad.copy())
        for name, p in weights.items()
    }

    coords = []
    for name, p in weights.items():
        coords.extend((name, i) for i in range(p.data.size))
    if max_coords is not None and len(coords) > max_coords:
        rng = rng or np.random.default_rng(0)
        chosen = rng.choice(len(coords), size=max_coords, replace=False)
        coords = [coords[i] for i in chosen]

    max_err = 0.0
    for name, flat in coords:
        data = weights[name].data
        original = data.flat[flat]
        data.flat[flat] = original + h
        f_plus = float(fn().data)
        data.flat[flat] = original - h
        f_minus = float(fn().data)
        data.flat[flat] = original
        numeric = (f_plus - f_minus) / (2.0 * h)
        a = float(analytic[name].flat[flat])
        err = abs(a - numeric) / max(abs(a), abs(numeric), 1.0)
        max_err = max(max_err, err)
    return max_err
