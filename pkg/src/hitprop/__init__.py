"""n-hit functions of the free propagator and Dirichlet kernels from resummed boundary series."""

from .boundary_coeffs import (
    PlaneCase,
    SphereCase,
    coefficient_series,
    plane_c0,
    plane_cn,
    sphere_c0,
    sphere_cn,
)
from .errors import (
    CutoffSensitivityError,
    DegenerateApproximantError,
    DimensionMismatchError,
    HitPropError,
    QuadratureError,
    RootFindingError,
    SingularConfigurationError,
)
from .exact_ref import (
    SphereModeSumConfig,
    plane_exact,
    plane_exact_subtracted,
    sphere_exact,
    sphere_exact_subtracted,
)
from .geometry import Plane, Point, PolygonalPath, QuadratureConfig, UnitSphere, reflect_in_plane, segment_lengths, total_length
from .hitfn import (
    BromwichConfig,
    HitQuery,
    free_kernel,
    green_residual,
    hit_bromwich,
    hit_closed,
    hit_d1,
    hit_d2_n1,
    hit_d3,
    lower_dimension,
    lower_order,
    raise_dimension,
    raise_order,
    d1_order_step,
)
from .oracle import McConfig, hit_by_monte_carlo, hit_by_time_quadrature
from .resum import (
    CoefficientSeries,
    Convention,
    ResummationResult,
    diagonal_pade_strong_coupling,
    kv_pade,
    leibniz_error,
    pade,
    resum_series,
    shanks,
    shanks_s1_s2,
)

__version__ = "0.1.0"
