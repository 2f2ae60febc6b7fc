"""Structured-sparsity training toolkit for compressive autoencoders.

Thin wrapper over the C++ core: exact norm-ball projections, the
double-descent sparsifier, rate/quality metrics and a range coder.
"""

from _scae import (  # noqa: F401
    ConfigError,
    DecodeError,
    evaluate,
    mssim,
    proj_l1,
    proj_l11,
    proj_l1inf,
    psnr,
    range_decode,
    range_encode,
    relative_loss,
    sparsify,
    sparsity,
    stream_entropy,
    train,
)

__all__ = [
    "ConfigError",
    "DecodeError",
    "evaluate",
    "mssim",
    "proj_l1",
    "proj_l11",
    "proj_l1inf",
    "psnr",
    "range_decode",
    "range_encode",
    "relative_loss",
    "sparsify",
    "sparsity",
    "stream_entropy",
    "train",
]
