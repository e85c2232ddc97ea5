"""Python bindings for the urnet library."""

from ._core import (
    ConfigError,
    DataError,
    DimensionError,
    DivergenceError,
    Network,
    SensingProblem,
    gen_sensing,
    gen_sparse,
    init_gaussian,
    mse,
    psnr,
    recover,
    ssim,
    train,
    unrectify_residual,
)

__all__ = [
    "ConfigError",
    "DataError",
    "DimensionError",
    "DivergenceError",
    "Network",
    "SensingProblem",
    "gen_sensing",
    "gen_sparse",
    "init_gaussian",
    "mse",
    "psnr",
    "recover",
    "ssim",
    "train",
    "unrectify_residual",
]
