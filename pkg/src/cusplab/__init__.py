"""cusplab: cusp metric experiments on degenerating hypersurface families.

The package studies the restriction of a product cusp metric to the fibers
{z_0 z_1 ... z_n = t} of a polydisk degeneration, entirely in log modulus
coordinates so arbitrarily degenerate fibers stay exactly representable.
It provides pointwise geometry (metric, potential, curvature), the
deformation data of the family direction, deterministic Monte Carlo
quadrature over truncated fibers, and experiment drivers that compare the
measured metric pairing against its small |t| prediction.
"""

from .errors import (
    ChartError,
    CuspLabError,
    DomainError,
    FitError,
    IdentityViolation,
    InvariantViolation,
    SamplerError,
)
from .geometry import (
    Basis,
    CurvatureReport,
    HermitianForm,
    LogPoint,
    ModelConfig,
    a_squared,
    coordinate_metric,
    curvature_report,
    curvature_sup,
    curvature_tensor,
    dominant_chart,
    dominant_index,
    frame_metric,
    grad_phi_frame,
    make_point,
    metric_determinant,
    phi,
    phi_bounds,
    volume_density,
)
from .deformation import (
    VectorValuedForm,
    dbar_w_components,
    dbar_w_norm_sq,
    flow_array,
    flow_map,
    w_coefficients,
    wp_integrand,
)
from .quadrature import (
    IntegralEstimate,
    Method,
    TruncatedDomain,
    domain,
    exact_volume_n1,
    mc_integrate,
)
from .experiments import (
    BoundsReport,
    SweepReport,
    WpRatio,
    run_bounds_scan,
    run_sweep,
    run_volume,
    run_wp_ratio,
    wp_predicted,
)

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "BoundsReport",
    "ChartError",
    "CurvatureReport",
    "CuspLabError",
    "DomainError",
    "FitError",
    "HermitianForm",
    "IdentityViolation",
    "IntegralEstimate",
    "InvariantViolation",
    "LogPoint",
    "Method",
    "ModelConfig",
    "SamplerError",
    "SweepReport",
    "TruncatedDomain",
    "VectorValuedForm",
    "WpRatio",
    "a_squared",
    "coordinate_metric",
    "curvature_report",
    "curvature_sup",
    "curvature_tensor",
    "dbar_w_components",
    "dbar_w_norm_sq",
    "domain",
    "dominant_chart",
    "dominant_index",
    "exact_volume_n1",
    "flow_array",
    "flow_map",
    "frame_metric",
    "grad_phi_frame",
    "make_point",
    "mc_integrate",
    "metric_determinant",
    "phi",
    "phi_bounds",
    "run_bounds_scan",
    "run_sweep",
    "run_volume",
    "run_wp_ratio",
    "volume_density",
    "w_coefficients",
    "wp_integrand",
    "wp_predicted",
    "__version__",
]
