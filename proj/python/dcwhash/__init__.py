"""Python bindings for the dcwhash toolkit."""

from ._core import (
    DcwhashError,
    Model,
    NumericError,
    average_precision,
    binarize,
    dcw,
    dcw_grad,
    evaluate,
    hamming_rank,
    load_code_bits,
    load_features,
    load_labels,
    lsh_bits,
    make_model,
    ot_exact,
    sample_prior,
    save_features,
    save_labels,
    swd,
    swd_axes,
    train,
    wasserstein_1d,
)

__all__ = [name for name in dir() if not name.startswith("_")]
