"""Normal geodesics of the left-invariant sub-Riemannian structure on SE(2)."""

from .classification import (
    Crossings,
    GeodesicClass,
    classify_covector,
    detect_cusps,
    detect_inflections,
    vertical_period,
)
from .cut_time import (
    CutTimeEstimate,
    EquioptimalityReport,
    SearchConfig,
    equioptimality_check,
    estimate_cut_time,
    group_distance,
    shift_identity_check,
)
from .flow import (
    Covector,
    ExtremalState,
    Geodesic,
    NotNaturalError,
    casimir,
    exponential_map,
    hamiltonian,
    horizontal_field,
    integrate,
    natural_grid,
    vertical_field,
    vertical_flow,
)
from .group import (
    E13,
    E23,
    ROT,
    AlgebraElement,
    GroupElement,
    algebra_exp,
    bracket,
    compose,
    frame_at,
    inverse,
)
from .isometry import (
    FitResult,
    HomogeneityResult,
    OrbitSpec,
    ProjectionKind,
    classify_orbit_projection,
    fit_projection,
    homogeneity_sweep,
    homogeneity_test,
    orbit_point,
)
from .svg import PlotSpec, render_svg

__version__ = "0.1.0"
