"""Projection pursuit with co-moment projection indices and generalized betas."""

from ._backend import active as active_backend
from .comoments import ComomentOrder, TrimSpec, product_comoment, scale_estimate, trimmed_mean
from .grid import GridConfig, exhaustive_2d, optimize_direction
from .indices import CapiWeights, IndexSpec, evaluate
from .pursuit import PursuitModel, fit, predict, transform

__version__ = "0.1.0"

__all__ = [
    "CapiWeights",
    "ComomentOrder",
    "GridConfig",
    "IndexSpec",
    "PursuitModel",
    "TrimSpec",
    "active_backend",
    "evaluate",
    "exhaustive_2d",
    "fit",
    "optimize_direction",
    "predict",
    "product_comoment",
    "scale_estimate",
    "transform",
    "trimmed_mean",
]
