"""Rigid 2D image registration: the expensive, approximately-associative
operator the scan machinery exists to parallelize."""
from .deform import (RigidDeformation, compose, deformation_distance,
                     deformations_approx_eq)
from .flow import (GradientFlowConfig, MultilevelConfig, armijo_step,
                   gradient_flow, refine, register_pair)
from .grid import GridImage, GridError, node_coords, prolongate, \
    quadrature_weights, restrict, restrict_to
from .metrics import (DegenerateImageError, apply_deformation, energy,
                      energy_gradient, energy_line, image_mean, image_std,
                      ncc, warp_stats)
from .series import (DriftSpec, IDENTITY_LINK, Link, SeriesGroundTruth,
                     SeriesRegistrar, SpanMismatchError, base_pattern,
                     generate_series, mean_aligned, neighbour_links,
                     preprocess_series)

__all__ = [
    "RigidDeformation", "compose", "deformation_distance",
    "deformations_approx_eq", "GradientFlowConfig", "MultilevelConfig",
    "armijo_step", "gradient_flow", "refine", "register_pair", "GridImage",
    "GridError", "node_coords", "prolongate", "quadrature_weights",
    "restrict", "restrict_to", "DegenerateImageError", "apply_deformation",
    "energy", "energy_gradient", "energy_line", "image_mean", "image_std",
    "ncc", "warp_stats", "DriftSpec", "IDENTITY_LINK", "Link",
    "SeriesGroundTruth", "SeriesRegistrar", "SpanMismatchError",
    "base_pattern", "generate_series", "mean_aligned", "neighbour_links",
    "preprocess_series",
]
