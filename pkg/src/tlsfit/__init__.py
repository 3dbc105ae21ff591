"""Forward modelling and fitting of TLS-limited cavity quality factors."""

__version__ = "0.1.0"

from .kernels import (
    TLSSpecies,
    ThermalContext,
    bracket_interp,
    kernel_beta,
    kernel_interacting_asymptote,
    kernel_noninteracting,
    species_coefficient,
    thermal_factor,
)
from .field import FieldMap, load_field_map, pillbox_surface_map, save_field_map, scale_to_eacc
from .model import Distribution, ModelSpec, QPoint, dist_average, inverse_q, inverse_q_beta, model_inverse_q
from .fitting import (
    Dataset,
    FitConfig,
    FitResult,
    chi2,
    compare_models,
    estimate_sigma_exp,
    fit,
    profile_error,
)
from .derived import (
    MicroscopicEstimate,
    area_density_from_c,
    microscopic_estimate,
    sqrt_t1t2_from_ec,
    zero_field_loss_tangent,
)

__all__ = [
    "TLSSpecies", "ThermalContext", "bracket_interp", "kernel_beta", "kernel_interacting_asymptote",
    "kernel_noninteracting", "species_coefficient", "thermal_factor",
    "FieldMap", "load_field_map", "pillbox_surface_map", "save_field_map", "scale_to_eacc",
    "Distribution", "ModelSpec", "QPoint", "dist_average", "inverse_q", "inverse_q_beta", "model_inverse_q",
    "Dataset", "FitConfig", "FitResult", "chi2", "compare_models", "estimate_sigma_exp", "fit", "profile_error",
    "MicroscopicEstimate", "area_density_from_c", "microscopic_estimate", "sqrt_t1t2_from_ec",
    "zero_field_loss_tangent",
]
