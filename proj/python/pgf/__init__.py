"""Distortion-aware Gabor filtering and spherical depth tools for panoramas."""

from ._core import (
    bank_kernels,
    bank_parameters,
    berhu_loss,
    cubemap_to_erp,
    depth_metrics,
    distortion_coefficient,
    distortion_profile,
    erp_to_cubemap,
    fit_depth,
    fuse,
    gabor_kernel,
    gradient_check,
    init_weights_file,
    latitude_adaptive_conv,
    latitude_bank_kernels,
    make_synthetic_pair,
    max_threads,
    pano_gabor_conv,
    read_pfm,
    read_tensor,
    set_max_threads,
    spherical_gradient,
    spherical_gradient_loss,
    total_loss,
    total_loss_grad,
    write_pfm,
    write_tensor,
)

__version__ = "0.1.0"

__all__ = [
    "bank_kernels",
    "bank_parameters",
    "berhu_loss",
    "cubemap_to_erp",
    "depth_metrics",
    "distortion_coefficient",
    "distortion_profile",
    "erp_to_cubemap",
    "fit_depth",
    "fuse",
    "gabor_kernel",
    "gradient_check",
    "init_weights_file",
    "latitude_adaptive_conv",
    "latitude_bank_kernels",
    "make_synthetic_pair",
    "max_threads",
    "pano_gabor_conv",
    "read_pfm",
    "read_tensor",
    "set_max_threads",
    "spherical_gradient",
    "spherical_gradient_loss",
    "total_loss",
    "total_loss_grad",
    "write_pfm",
    "write_tensor",
]
