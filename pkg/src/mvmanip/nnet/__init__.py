"""Minimal numpy tensor core with reverse-mode gradients, transformer
layers, the LAMB optimizer and checkpoint IO."""

from .tensor import (
    MASK_FILL,
    Tensor,
    concat,
    broadcast_to,
    embedding_lookup,
    gelu,
    layernorm,
    log_softmax,
    matmul,
    reshape,
    set_debug_checks,
    sigmoid,
    soft_cross_entropy,
    softmax,
    softplus,
    transpose,
)
from .layers import (
    LayerNorm,
    Linear,
    MLPBlock,
    MultiHeadAttention,
    TransformerBlock,
    Weights,
    attention_mask_bias,
    linear_init,
    table_init,
)
from .optim import Lamb, lr_at
from .gradcheck import grad_check
from .checkpoint import CheckpointError, load_weights, save_weights

__all__ = [
    "MASK_FILL",
    "Tensor",
    "concat",
    "broadcast_to",
    "embedding_lookup",
    "gelu",
    "layernorm",
    "log_softmax",
    "matmul",
    "reshape",
    "set_debug_checks",
    "sigmoid",
    "soft_cross_entropy",
    "softmax",
    "softplus",
    "transpose",
    "LayerNorm",
    "Linear",
    "MLPBlock",
    "MultiHeadAttention",
    "TransformerBlock",
    "Weights",
    "attention_mask_bias",
    "linear_init",
    "table_init",
    "Lamb",
    "lr_at",
    "grad_check",
    "CheckpointError",
    "load_weights",
    "save_weights",
]
