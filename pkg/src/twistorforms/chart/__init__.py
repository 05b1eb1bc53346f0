"""Chart-level geometry and finite-difference calculus (CP^m, flat torus, conformal rescaling)."""
from .geometry import (
    DEFAULT_SEED,
    ChartGeometry,
    FormField,
    SamplePlan,
    compound,
    conformal_rescale,
    flat_torus,
    fs_christoffel_from_metric,
    fubini_study,
)
from .calculus import (
    coordinate_hessian,
    coordinate_nabla,
    covariant_jet,
    covariant_jets,
    fd_partials,
    frame_riemann,
    numeric_operator,
    numerical_riemann,
    pointwise_map,
    pointwise_operator,
    chunked,
    to_coords,
    to_frame,
)

__all__ = [
    "DEFAULT_SEED",
    "ChartGeometry",
    "FormField",
    "SamplePlan",
    "compound",
    "conformal_rescale",
    "flat_torus",
    "fs_christoffel_from_metric",
    "fubini_study",
    "coordinate_hessian",
    "coordinate_nabla",
    "covariant_jet",
    "covariant_jets",
    "fd_partials",
    "frame_riemann",
    "numeric_operator",
    "numerical_riemann",
    "pointwise_map",
    "pointwise_operator",
    "chunked",
    "to_coords",
    "to_frame",
]
