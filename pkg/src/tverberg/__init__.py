"""Colorful no-dimensional Tverberg partitions and their intersection certificates."""

from .core import (
    L2,
    LINF,
    Ball,
    Certificate,
    ColoredConfig,
    ConfigError,
    NormKind,
    TransversalPartition,
    centroid,
    inter_color_diameter,
    norm_dist,
    parts_of,
    set_diameter,
)
from .euclid import ConvergenceError

__all__ = [
    "L2",
    "LINF",
    "Ball",
    "Certificate",
    "ColoredConfig",
    "ConfigError",
    "ConvergenceError",
    "NormKind",
    "TransversalPartition",
    "centroid",
    "inter_color_diameter",
    "norm_dist",
    "parts_of",
    "set_diameter",
]

__version__ = "0.1.0"
