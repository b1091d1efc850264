"""Numerical experiments on blow-up for -Δu = V e^u in planar domains."""

from .analysis import (
    BlowupClassification,
    BoundaryCircle,
    Case,
    ClosedAnnulus,
    ClosedBall,
    RescalingFrame,
    SupInfReport,
    Thresholds,
    boundary_oscillation,
    classify_sequence,
    detect_concentration,
    inf_on,
    log_kernel_split,
    mass_on,
    rescale,
    sup_on,
    supinf_statistic,
)
from .errors import (
    BlowupError,
    DomainError,
    InputError,
    JointError,
    LiouvilleLabError,
    NoSolutionError,
    QuadratureError,
    SingularityError,
    SolverError,
)
from .experiments import ScenarioConfig, TwoBubbleSpec, build_two_bubble, run
from .families import (
    Family,
    RadialProfile,
    WeightSpec,
    eval_d2u,
    eval_du,
    eval_u,
    eval_V,
    laplacian,
    mass,
    mass_quadrature,
    parse_descriptor,
    residual,
    weighted_mass,
)
from .fields import RadialGrid, RectGrid, SampledField
from .green_disk import GreenKernel, green, log_potential, poisson_kernel, regular_part, represent
from .pde_solver import (
    SolveReport,
    green_coercive_radial,
    radial_mass,
    solve_fd2d,
    solve_radial_bvp,
    solve_radial_ivp,
)
from .quadrature import QuadratureSpec

__version__ = "0.1.0"
