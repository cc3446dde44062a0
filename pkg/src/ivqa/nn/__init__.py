from .blocks import (
    DTYPE,
    AttentionBlock,
    EmbeddingSeq,
    TextEmbedder,
    cat_seqs,
    cross_attention,
    mean_pool_segments,
    self_attention,
)
from .checkpoint import load_named_arrays, save_named_arrays
from .gradcheck import GradCheckReport, grad_check
from .losses import (
    LossWeights,
    binary_cross_entropy,
    combined_loss,
    hungarian_match,
    loss_schedule,
    relation_loss,
)

__all__ = [
    "DTYPE",
    "AttentionBlock",
    "EmbeddingSeq",
    "TextEmbedder",
    "cat_seqs",
    "cross_attention",
    "self_attention",
    "mean_pool_segments",
    "binary_cross_entropy",
    "hungarian_match",
    "relation_loss",
    "LossWeights",
    "loss_schedule",
    "combined_loss",
    "GradCheckReport",
    "grad_check",
    "save_named_arrays",
    "load_named_arrays",
]
