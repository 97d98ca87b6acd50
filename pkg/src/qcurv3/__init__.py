"""Constant Q-curvature conformal metrics on R^3 with prescribed volume.

A spectral construction on the round three-sphere, transferred to
Euclidean space through stereographic projection, plus an independent
verification suite for the identities, asymptotics and bounds such
metrics satisfy.
"""

from .errors import (
    ConvergenceError,
    CriteriaDisagreementError,
    DivergenceError,
    NumericalError,
    QCurvError,
    SingularInputError,
)
from .euclidean import (
    RadialProfile,
    RadialSolution,
    SphericalSolution,
    TAIL_WINDOW,
    assemble_solution,
    default_profile_radii,
    inv_sq_kernel_mean,
    log_conformal_factor,
    log_kernel_mean,
    log_potential_profile,
    log_potential_values,
    neg_laplacian_integral,
    normalized_volume,
    pohozaev_rhs,
    r_of_theta,
    scalar_curvature,
    spherical_solution,
    surface_mean_oracle,
    tail_radii,
    theta_of_r,
    volume,
)
from .minimizer import (
    MinimizeTrace,
    SolverConfig,
    el_residual,
    evaluate_objective,
    mass_integral,
    minimize,
    minimize_with_trace,
    normalize,
    objective_gradient,
    weight_kernel,
)
from .pipeline import (
    KIND_CONSTRUCTED,
    KIND_SPHERICAL,
    SolutionRecord,
    build_profiles,
    solve_record,
    spherical_record,
)
from .sphere import (
    SPHERE_VOLUME,
    SphereGrid,
    ZonalField,
    apply_p3,
    apply_p3_sqrt,
    beckner_gap,
    build_grid,
    field_mean,
    h32_seminorm_sq,
    p3_multipliers,
    zonal_analyze,
    zonal_basis,
    zonal_eval,
)
from .verify import (
    CheckResult,
    CheckTolerances,
    VerificationReport,
    beckner_min_gap,
    check_volume_bound,
    classify_sphericality,
    fit_alpha,
    integral_equation_residual,
    laplacian_limit,
    pohozaev_defect,
    report_for_record,
    run_full_report,
)

__version__ = "0.1.0"
