"""Hyperspectral image super-resolution with spectral mixup and RGB data."""

from ._hsisr import (
    IoError,
    NumericError,
    ShapeError,
    SrNet,
    ValidationError,
    bicubic_resize,
    cc,
    degrade,
    ergas,
    evaluate_metrics,
    group_starts,
    load_cube,
    mpsnr,
    mssim,
    project_to_rgb,
    rmse,
    run_cli,
    sam,
    save_cube,
    spectral_interpolate,
    spectral_mixup,
)

__all__ = [
    "IoError",
    "NumericError",
    "ShapeError",
    "SrNet",
    "ValidationError",
    "bicubic_resize",
    "cc",
    "degrade",
    "ergas",
    "evaluate_metrics",
    "group_starts",
    "load_cube",
    "mpsnr",
    "mssim",
    "project_to_rgb",
    "rmse",
    "run_cli",
    "sam",
    "save_cube",
    "spectral_interpolate",
    "spectral_mixup",
]
