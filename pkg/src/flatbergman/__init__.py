"""Bergman kernel, metric and curvature asymptotics at exponentially flat boundary points."""

from .logscalar import LogScalar, RangeMarker
from .profile import FlatProfile, find_root, inverse_profile, parse_profile, profile_derivative, profile_eval, scaling_dichotomy
from .geometry import (
    ConeStream,
    ModelDomain,
    RegionSpec,
    ScalingFrame,
    build_frame,
    d_eps,
    d_star,
    foot_point,
    region_member,
    region_spec,
    rho_eval,
    sandwich_check,
    slice_normalize,
    tangent_split,
)
from .reinhardt import AnisoScaled, Ball, Disc, Egg, Polydisc, Product, Scaled, moment, parse_domain, product_domain
from .kernel import curvature, extremal, fuchs_check, kernel, kernel_jet, metric, monotonicity_check, transform_check
from .asymptotics import (
    counterexample,
    curvature_ratio_bounds,
    kernel_ratio_bounds,
    lemma31_series,
    metric_ratio_bounds,
)

__version__ = "0.1.0"
