"""pux2d: compactly supported function extension on complex 2D domains and an
embedded-boundary Poisson solver built on it.

The pipeline splits the Dirichlet Poisson problem into a free-space FFT solve
over an extended forcing and a boundary-integral Laplace solve with corrected
boundary data.
"""

from ._kernels import BACKEND as kernel_backend
from .config import RhsSpec, SolveConfig, builtin_config, load_config, manufactured_solution
from .errors import (
    AmbiguousPointError,
    ConfigError,
    CoverageGapError,
    EmptyMaskError,
    InsufficientDataError,
    NoConvergenceError,
    NotCoveredError,
    OnPanelError,
    OutOfBoxError,
    Pux2dError,
    SingularBasisError,
    SnapFailureError,
    StageError,
    UnderdeterminedError,
    UnknownIdError,
)
from .fpoisson import (
    ParticularSolution,
    SpectralKernel,
    bessel_j01,
    build_kernel,
    eval_at_points,
    eval_on_subgrid,
    kernel_hat_radial,
    solve_free_space,
)
from .geometry import (
    BoundaryCurve,
    Domain,
    MembershipMask,
    PanelSet,
    arc_length_centers,
    build_panels,
    classify_points,
    eval_curve,
    outward_normal,
    total_arc_length,
)
from .harness import (
    ErrorReport,
    SolveResult,
    StudyResult,
    builtin_rhs,
    convergence_study,
    error_metrics,
    solve_poisson,
)
from .lbie import (
    BieSystem,
    LayerDensity,
    accuracy_indicator,
    apply_operator,
    eval_field,
    solve_density,
    special_quad_panel,
)
from .partition import (
    Covering,
    ExtendedField,
    UniformGrid,
    build_covering,
    build_extension,
    heuristic_k_tilde,
    heuristic_m_centers,
    shepard_weights,
)
from .rbf import (
    GaussianBasis,
    StencilTemplate,
    WuFunction,
    build_stencil,
    gaussian,
    local_least_squares_extend,
    vogel_nodes,
    wu_eval,
    wu_function,
)

__version__ = "0.1.0"
