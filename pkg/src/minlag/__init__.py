"""minlag: a numerical laboratory for equivariant minimal Lagrangian surfaces
in the complex hyperbolic plane.

Subpackages cover the genus-2 hyperbolic background (surface), the conformal
factor equation with ray continuation and fold detection (gauss), the chart
Toda system and its flat connection (toda), the closed-form normal exponential
map geometry (normal_flow), and exact moduli component arithmetic (moduli).
"""

from .errors import (
    AccuracyError,
    DomainError,
    InadmissibleComponentError,
    MeshMismatchError,
    MeshQualityError,
    MinlagError,
    NonexistenceError,
    NumericalError,
    ResourceLimitError,
    UsageError,
)
from .gauss import (
    EmbeddingReport,
    GaussProblem,
    GaussSolution,
    RayContinuation,
    RaySample,
    StabilityRecord,
    area_report,
    continue_ray,
    embedding_check,
    f_stability,
    jacobian,
    qsq_gamma_field,
    residual,
    solve,
)
from .moduli import (
    ComponentReport,
    HolComponent,
    NonHolComponent,
    conjugate,
    enumerate_hol,
    enumerate_nonhol,
    hitchin_from_area,
    hol_invariants,
    nonhol_invariants,
    reducible_family,
)
from .normal_flow import (
    MetricForm,
    NormalSample,
    area_density,
    completeness_verdict,
    full_theta_g,
    lower_bound,
    mean_curvature_relation,
    phi_coefficients,
    phi_metric_eigen,
)
from .surface import (
    DiscreteOperator,
    ScalarField,
    SurfaceMesh,
    apply_laplacian,
    assemble_operators,
    build_bolza_mesh,
    integrate,
    mesh_from_json,
    mesh_to_json,
)
from .toda import (
    ChartGrid,
    ConnectionPair,
    HolonomyResult,
    TodaChartData,
    assemble_connection,
    chart_from_json,
    chart_to_json,
    circle_action,
    curvature_report,
    flatness_residual,
    fuchsian_chart_data,
    gauss_transform_metric,
    holonomy,
    kahler_report,
    toda_residuals,
)

__version__ = "0.1.0"
