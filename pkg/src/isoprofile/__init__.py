"""Isoperimetric profiles of space-form models and convex bodies, with comparison checks."""

from .bodies import (
    Body2D,
    ConeQuantities,
    MCEstimate,
    body_curve,
    body_profile,
    check_cone_relation,
    check_small_volume_bound,
    cone_quantities,
    disk_brute_force,
    orthogonal_arc,
)
from .bounds import (
    BoundsSummary,
    bounds_summary,
    cheeger_constant,
    diameter_bound,
    model_cheeger,
    myers_diameter,
    neumann_eigenvalue_model,
    refined_eigenvalue_bound,
    volume_comparison,
)
from .compare import (
    ComparisonReport,
    OdeProblem,
    SideDerivatives,
    ZeroCrossingError,
    check_concavity,
    check_differential_inequality,
    compare_lower_LG,
    compare_upper,
    model_normalized,
    model_renormalized,
    model_slope,
    refined_LG,
    renormalize,
    side_derivatives,
    solve_bvp,
    solve_ivp,
    upper_second_difference,
    zero_crossing,
)
from .curves import NormalizedProfile, ProfileCurve, RenormalizedCurve
from .quadrature import gauss_legendre
from .space_forms import (
    SpaceForm,
    c_delta,
    gamma_const,
    half_space_constant,
    model_profile,
    model_profile_at,
    model_samples,
    normalize,
    s_delta,
    sphere_area,
)

__version__ = "0.1.0"
