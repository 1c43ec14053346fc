"""Stochastic six-vertex model sampling, telegraph-equation solvers, and the
contour-integral asymptotics that tie them together."""

from .core import (BoundaryData, Field2D, HeightField, ModelParams,
                   derive_params, extend_bilinear, modified_height,
                   params_from_rates)
from .sampler import (Configuration, NoiseField, VertexOutcome,
                      conditional_noise_variance, extract_noise,
                      integrated_identity_residual, sample, sample_points)

__version__ = "0.1.0"

__all__ = [
    "BoundaryData", "Field2D", "HeightField", "ModelParams", "derive_params",
    "extend_bilinear", "modified_height", "params_from_rates",
    "Configuration", "NoiseField", "VertexOutcome",
    "conditional_noise_variance", "extract_noise",
    "integrated_identity_residual", "sample", "sample_points",
    "__version__",
]
