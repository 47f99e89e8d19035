"""Python bindings for the scin camera-identification library."""

from ._scin import (
    Error,
    Network,
    Rng,
    __version__,
    build_network,
    canonical_architecture,
    cli,
    conv2d,
    cross_validate,
    generate_synthetic,
    load_checkpoint,
    parameter_count,
    predict,
    save_checkpoint,
)

__all__ = [
    "Error",
    "Network",
    "Rng",
    "__version__",
    "build_network",
    "canonical_architecture",
    "cli",
    "conv2d",
    "cross_validate",
    "generate_synthetic",
    "load_checkpoint",
    "parameter_count",
    "predict",
    "save_checkpoint",
]
