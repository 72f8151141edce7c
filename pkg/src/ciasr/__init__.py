"""Heavy-tailed amplitude modeling for coherent imaging data.

The package implements an isotropic alpha-stable amplitude law with a
location offset (Rician at alpha = 2, heavy-tailed Rayleigh at delta = 0):
exact-contract sampling, pdf/cdf evaluation by oscillatory Bessel quadrature
with a far-tail series, a Bessel-moment parameter estimator, Weibull and
log-normal baselines with KL/KS goodness-of-fit metrics, and a patch-wise
image pipeline rendering parameter heatmaps and pseudo-RGB composites.
"""

from ._backend import BACKEND
from .estimator import DEFAULT_MOBM, FitReport, MobmConfig, estimate_delta, fit
from .exceptions import (
    CiasrError,
    ConvergenceError,
    DomainError,
    MomentDomainError,
    RasterFormatError,
    ScanFailureError,
)
from .metrics import (
    HistogramSpec,
    MetricReport,
    fit_lognormal,
    fit_weibull,
    kl_div,
    ks_score,
    param_mse,
)
from .model import CiasrModel, ModelParams, cdf, pdf, pdf_htr, pdf_rician_closed
from .pipeline import (
    ParamMap,
    PatchGrid,
    RasterImage,
    RenderResult,
    fit_patches,
    load_raster,
    render_maps,
    segment_patches,
)
from .sampling import (
    CiasrGenConfig,
    StableParams,
    load_samples,
    sample_ciasr,
    sample_one_sided,
    sample_stable,
    save_samples,
)
from .special import J0_FIRST_ZERO, QuadratureSpec, integrate_damped_bessel

__version__ = "1.0.0"

__all__ = [
    "BACKEND",
    "CiasrError",
    "CiasrGenConfig",
    "CiasrModel",
    "ConvergenceError",
    "DEFAULT_MOBM",
    "DomainError",
    "FitReport",
    "HistogramSpec",
    "J0_FIRST_ZERO",
    "MetricReport",
    "MobmConfig",
    "ModelParams",
    "MomentDomainError",
    "ParamMap",
    "PatchGrid",
    "QuadratureSpec",
    "RasterFormatError",
    "RasterImage",
    "RenderResult",
    "ScanFailureError",
    "StableParams",
    "cdf",
    "estimate_delta",
    "fit",
    "fit_lognormal",
    "fit_patches",
    "fit_weibull",
    "integrate_damped_bessel",
    "kl_div",
    "ks_score",
    "load_raster",
    "load_samples",
    "param_mse",
    "pdf",
    "pdf_htr",
    "pdf_rician_closed",
    "render_maps",
    "sample_ciasr",
    "sample_one_sided",
    "sample_stable",
    "save_samples",
    "segment_patches",
    "__version__",
]
