"""Toric weak geodesics via Legendre-Fenchel conjugation, and numerical checks of
Berndtsson-Lempert L2-extension estimates on Reinhardt model domains."""

from __future__ import annotations

from .bl_verifier import (
    ExtensionProblem,
    ScanReport,
    dual_norm_sq,
    extension_estimate_check,
    gram_matrix,
    lemma32_probe,
    logconvexity_scan,
    min_norm_extension,
    monotonicity_scan,
    rho_scan,
)
from .convex_core import GridFunction, biconjugate, lf_transform, lf_transform_bruteforce
from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    NoFiniteSupportError,
    StencilError,
    ToricError,
)
from .geodesic import (
    Endpoint,
    LinearMix,
    Scaling,
    Translation,
    conjugate_affinity_defect,
    endpoint_family,
    family_eval,
    ma_residual,
)
from .quadrature import QuadratureSpec
from .reinhardt_l2 import (
    LogDomain,
    ReinhardtModel,
    ToricWeightSpec,
    base_norm,
    monomial_norm,
    norm_curve,
    sigma_mass,
)
from .weights import Affine, ExpScaled, IndicatorHalfLine, LogOnePlusExp, MaxAffine, Sampled

__version__ = "0.1.0"
