"""Parameter store and the layer zoo: linear, layer norm, masked multi-head
attention, MLP and pre-norm transformer blocks.

Weight initialization: linear layers uniform in +-sqrt(6 / (fan_in +
fan_out)), embedding-style tables normal with sigma 0.02, norms at identity.
"""

from __future__ import annotations

import numpy as np

from .tensor import (
    MASK_FILL,
    Tensor,
    concat,
    gelu,
    layernorm,
    matmul,
    reshape,
    softmax,
    transpose,
)


class Weights:
    """Ordered named parameter collection with per-parameter optimizer
    moments and a shared step counter."""

    def __init__(self, dtype=np.float32):
        self.dtype = np.dtype(dtype)
        self._params: dict[str, Tensor] = {}
        self.opt_m: dict[str, np.ndarray] = {}
        self.opt_v: dict[str, np.ndarray] = {}
        self.step_count = 0

    def register(self, name: str, array: np.ndarray) -> Tensor:
        if name in self._params:
            raise ValueError(f"duplicate parameter name {name!r}")
        t = Tensor(np.ascontiguousarray(array, dtype=self.dtype), requires_grad=True)
        self._params[name] = t
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def names(self):
        return list(self._params)

    def items(self):
        return self._params.items()

    def zero_grad(self):
        for t in self._params.values():
            t.grad = None

    def total_parameters(self) -> int:
        return sum(t.data.size for t in self._params.values())

    def astype(self, dtype) -> "Weights":
        """Copy with every parameter (and moment) cast; used to run gradient
        checks in float64."""
        out = Weights(dtype)
        out.step_count = self.step_count
        for name, t in self._params.items():
            out.register(name, t.data.astype(dtype))
        for name, m in self.opt_m.items():
            out.opt_m[name] = m.astype(dtype)
        for name, v in self.opt_v.items():
            out.opt_v[name] = v.astype(dtype)
        return out

    def copy(self) -> "Weights":
        return self.astype(self.dtype)

    def assign_from(self, other: "Weights"):
        """In-place load of another collection with identical names/shapes."""
        if self.names() != other.names():
            raise ValueError("parameter name sets differ")
        for name, t in self._params.items():
            src = other._params[name].data
            if src.shape != t.data.shape:
                raise ValueError(f"shape mismatch for {name!r}: {src.shape} vs {t.data.shape}")
            t.data = src.astype(self.dtype, copy=True)
        self.opt_m = {k: v.astype(self.dtype, copy=True) for k, v in other.opt_m.items()}
        self.opt_v = {k: v.astype(self.dtype, copy=True) for k, v in other.opt_v.items()}
        self.step_count = other.step_count


def linear_init(rng: np.random.Generator, d_in: int, d_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (d_in + d_out))
    return rng.uniform(-bound, bound, size=(d_in, d_out))


def table_init(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.normal(0.0, 0.02, size=(rows, cols))


class Linear:
    def __init__(self, weights: Weights, name: str, d_in: int, d_out: int, rng):
        self.w = weights.register(f"{name}.w", linear_init(rng, d_in, d_out))
        self.b = weights.register(f"{name}.b", np.zeros(d_out))

    def __call__(self, x: Tensor) -> Tensor:
        return matmul(x, self.w) + self.b


class LayerNorm:
    def __init__(self, weights: Weights, name: str, dim: int, eps: float = 1e-5):
        self.gamma = weights.register(f"{name}.gamma", np.ones(dim))
        self.beta = weights.register(f"{name}.beta", np.zeros(dim))
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        return layernorm(x, self.gamma, self.beta, self.eps)


def attention_mask_bias(mask: np.ndarray, dtype) -> np.ndarray:
    """Turn a boolean attend-matrix into an additive logit bias.

    mask is (T, T) or (N, T, T) with True = attendable; every query row must
    keep at least one attendable key.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim == 2:
        mask = mask[None]
    if not np.all(mask.any(axis=-1)):
        raise ValueError("attention mask has a fully-masked query row")
    bias = np.where(mask, 0.0, MASK_FILL).astype(dtype)
    return bias[:, None, :, :]  # broadcast over heads


class MultiHeadAttention:
    """Self-attention: softmax(Q K^T / sqrt(d_head) + mask bias) V per head,
    heads concatenated, then an output projection."""

    def __init__(self, weights: Weights, name: str, d_model: int, heads: int, rng):
        if d_model % heads != 0:
            raise ValueError(f"d_model {d_model} not divisible by heads {heads}")
        self.heads = heads
        self.d_head = d_model // heads
        self.wq = Linear(weights, f"{name}.q", d_model, d_model, rng)
        self.wk = Linear(weights, f"{name}.k", d_model, d_model, rng)
        self.wv = Linear(weights, f"{name}.v", d_model, d_model, rng)
        self.wo = Linear(weights, f"{name}.out", d_model, d_model, rng)

    def __call__(self, x: Tensor, mask: np.ndarray | None = None) -> Tensor:
        n, t, d = x.shape
        h, dh = self.heads, self.d_head

        def split_heads(z):
            return transpose(reshape(z, (n, t, h, dh)), (0, 2, 1, 3))

        q = split_heads(self.wq(x))
        k = split_heads(self.wk(x))
        v = split_heads(self.wv(x))
        scores = matmul(q, transpose(k, (0, 1, 3, 2))) * (1.0 / np.sqrt(dh))
        if mask is not None:
            scores = scores + Tensor(attention_mask_bias(mask, x.dtype))
        attn = softmax(scores, axis=-1)
        mixed = matmul(attn, v)
        merged = reshape(transpose(mixed, (0, 2, 1, 3)), (n, t, d))
        return self.wo(merged)


class MLPBlock:
    def __init__(self, weights: Weights, name: str, d_model: int, hidden: int, rng):
        self.fc1 = Linear(weights, f"{name}.fc1", d_model, hidden, rng)
        self.fc2 = Linear(weights, f"{name}.fc2", hidden, d_model, rng)

    def __call__(self, x: Tensor) -> Tensor:
        return self.fc2(gelu(self.fc1(x)))


class TransformerBlock:
    """Pre-norm residual block: attention then MLP."""

    def __init__(self, weights: Weights, name: str, d_model: int, heads: int, mlp_ratio: int, rng):
        self.ln1 = LayerNorm(weights, f"{name}.ln1", d_model)
        self.attn = MultiHeadAttention(weights, f"{name}.attn", d_model, heads, rng)
        self.ln2 = LayerNorm(weights, f"{name}.ln2", d_model)
        self.mlp = MLPBlock(weights, f"{name}.mlp", d_model, mlp_ratio * d_model, rng)

    def __call__(self, x: Tensor, mask: np.ndarray | None = None) -> Tensor:
        x = x + self.attn(self.ln1(x), mask)
        return x + self.mlp(self.ln2(x))
