"""Independent checks of every identity, bound and asymptotic law.

Each check compares an independently computed quantity against its
analytic reference at a fixed tolerance.  Default thresholds sit an order
of magnitude above the quadrature error observed at the default
resolution and every one of them can be overridden.
"""

from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .errors import CriteriaDisagreementError, QCurvError
from .euclidean import (
    RadialProfile,
    TAIL_WINDOW,
    log_neg_curvature,
    neg_laplacian_integral,
)
from .minimizer import SolverConfig
from .pipeline import KIND_SPHERICAL, SolutionRecord, solve_record
from .sphere import SPHERE_VOLUME, ZonalField, beckner_gap, build_grid

SPHERICAL = "spherical"
NON_SPHERICAL = "non-spherical"


@dataclass
class CheckTolerances:
    """Thresholds for the verification suite; all overridable."""

    volume_rel: float = 5e-3
    spherical_volume_rel: float = 1e-6
    pohozaev_rel: float = 1e-2
    pohozaev_floor: float = 0.1
    integral_rel: float = 1e-2
    integral_rel_spherical: float = 1e-3
    alpha_fit_rel: float = 0.02
    lap_limit_rel: float = 1e-2
    lap_limit_floor: float = 1.0
    classify_lap_tol: float = 1e-3
    classify_growth_tol: float = 1e-3
    curvature_floor: float = -10.0
    spherical_flatness: float = 1e-4
    decomposition_rel: float = 1e-2
    beckner_floor: float = -1e-10
    beckner_samples: int = 1000
    el_tol: float | None = None  # defaults to the config's tol_grad

    def with_overrides(self, **kwargs) -> "CheckTolerances":
        return replace(self, **kwargs)


@dataclass
class CheckResult:
    name: str
    measured: float
    reference: float
    tolerance: float
    passed: bool
    note: str = ""


@dataclass
class VerificationReport:
    classification: str
    checks: list = dc_field(default_factory=list)

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def pohozaev_defect(solution: SolutionRecord) -> float:
    """|alpha(alpha-2) - (1/3 pi^2) int x.grad K e^{3w} dx|.

    The left side uses alpha = 2 (1 - mu) (2 for spherical records); the
    right side was integrated independently by radial quadrature when the
    record was built.
    """
    return abs(solution.pohozaev_lhs - solution.pohozaev_rhs)


def _tail(profile: RadialProfile, name: str):
    mask = profile.tail_mask()
    if int(mask.sum()) < 4:
        raise ValueError("profile does not cover the tail window")
    return profile.radii[mask], profile[name][mask]


def fit_alpha(profile: RadialProfile) -> float:
    """Negated least-squares slope of v against log r over the tail window."""
    radii, v = _tail(profile, "v")
    design = np.vstack([np.log(radii), np.ones_like(radii)]).T
    slope, _intercept = np.linalg.lstsq(design, v, rcond=None)[0]
    return float(-slope)


def laplacian_limit(profile: RadialProfile) -> float:
    """Mean of Delta u over the outermost quartile of the tail window."""
    _radii, lap = _tail(profile, "delta_u")
    quart = max(1, lap.size // 4)
    return float(np.mean(lap[-quart:]))


def check_volume_bound(vol: float, classification: str,
                       tolerances: CheckTolerances | None = None):
    """Strict bound V < 2 pi^2 for non-spherical metrics, equality for spherical.

    Returns (passed, margin) with margin = 2 pi^2 - V.
    """
    if vol <= 0.0:
        raise ValueError("volume must be positive")
    tol = tolerances or CheckTolerances()
    margin = SPHERE_VOLUME - vol
    if classification == SPHERICAL:
        return abs(margin) <= tol.spherical_volume_rel * SPHERE_VOLUME, margin
    return margin > 0.0, margin


def classify_sphericality(profile: RadialProfile,
                          tolerances: CheckTolerances | None = None,
                          u_eval=None) -> str:
    """Three-way equivalence vote: vanishing Laplacian limit, sub-quadratic
    growth, and bounded-below scalar curvature.

    The criteria must agree; disagreement signals numerical trouble rather
    than a counterexample and raises CriteriaDisagreementError.  For the
    curvature vote the floor is paired with a trend check: a curvature dip
    below the floor must keep deepening along the tail.
    """
    tol = tolerances or CheckTolerances()
    radii_tail, u_tail = _tail(profile, "u")

    lap_vote = abs(laplacian_limit(profile)) <= tol.classify_lap_tol

    quart = max(1, radii_tail.size // 4)
    growth = np.abs(u_tail[-quart:]) / radii_tail[-quart:] ** 2
    growth_vote = float(np.max(growth)) <= tol.classify_growth_tol

    curvature = profile["scalar_curvature"]
    curv_vote = float(np.min(curvature)) >= tol.curvature_floor
    if not curv_vote and u_eval is not None:
        trend = log_neg_curvature(u_eval, radii_tail)
        finite = trend[np.isfinite(trend)]
        if finite.size >= 4 and not np.all(np.diff(finite) > 0.0):
            raise CriteriaDisagreementError(
                "curvature dipped below the floor without an unbounded-decay trend",
                votes={"laplacian": lap_vote, "growth": growth_vote, "curvature": curv_vote},
            )

    votes = {"laplacian": lap_vote, "growth": growth_vote, "curvature": curv_vote}
    if len(set(votes.values())) != 1:
        raise CriteriaDisagreementError(f"sphericality criteria disagree: {votes}", votes=votes)
    return SPHERICAL if lap_vote else NON_SPHERICAL


def integral_equation_residual(solution: SolutionRecord,
                               radii=(0.1, 1.0, 10.0)) -> float:
    """Max relative mismatch of -Delta u against its kernel integral.

    -Delta u comes from exact spectral differentiation of the assembled
    solution; the right side adds 6 a (the constructed family's limit
    constant) to the inverse-square kernel integral.
    """
    u_eval = solution.evaluator()
    a_int = 6.0 * solution.config.gaussian_a
    worst = 0.0
    for r in radii:
        lhs = -u_eval.laplacian(float(r))
        rhs = neg_laplacian_integral(u_eval, float(r), a_int)
        worst = max(worst, abs(lhs - rhs) / abs(lhs))
    return worst


def beckner_min_gap(degree_cap: int = 64, grid_size: int = 256,
                    samples: int = 1000, seed: int = 1234) -> float:
    """Minimum inequality slack over seeded random fields with norm <= 1."""
    grid = build_grid(grid_size)
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(samples):
        c = rng.standard_normal(degree_cap + 1)
        c *= rng.uniform(0.0, 1.0) / np.linalg.norm(c)
        worst = min(worst, beckner_gap(ZonalField(c), grid))
    return float(worst)


def _fit_decomposition(profile: RadialProfile):
    """Fit u - v = -a r^2 + c over the sampled radii; returns (a_fit, c_fit)."""
    diff = profile["u"] - profile["v"]
    design = np.vstack([profile.radii**2, np.ones_like(profile.radii)]).T
    coeffs, *_ = np.linalg.lstsq(design, diff, rcond=None)
    return float(-coeffs[0]), float(coeffs[1])


def report_for_record(solution: SolutionRecord,
                      tolerances: CheckTolerances | None = None) -> VerificationReport:
    """Run every check against one solution record."""
    tol = tolerances or CheckTolerances()
    cfg = solution.config
    spherical = solution.kind == KIND_SPHERICAL
    checks = []

    el_tol = tol.el_tol if tol.el_tol is not None else cfg.tol_grad
    checks.append(CheckResult(
        "el_residual", solution.el_residual, 0.0, el_tol,
        solution.converged and solution.el_residual <= el_tol,
        note="sup-norm gradient at the reported field",
    ))

    vol_tol = tol.spherical_volume_rel if spherical else tol.volume_rel
    vol_ref = solution.volume_analytic
    checks.append(CheckResult(
        "volume_identity", solution.volume, vol_ref, vol_tol,
        abs(solution.volume - vol_ref) <= vol_tol * abs(vol_ref),
        note="radial quadrature vs (1-mu) |S^3|",
    ))

    defect = pohozaev_defect(solution)
    poho_tol = tol.pohozaev_rel * max(abs(solution.pohozaev_lhs), tol.pohozaev_floor)
    checks.append(CheckResult(
        "pohozaev", defect, 0.0, poho_tol, defect <= poho_tol,
        note="scaling identity defect",
    ))

    alpha_ref = 2.0 if spherical else 2.0 * (1.0 - cfg.mu)
    try:
        alpha_fit = fit_alpha(solution.profiles)
        alpha_ok = abs(alpha_fit - alpha_ref) <= tol.alpha_fit_rel * alpha_ref
        alpha_note = "tail slope of the logarithmic potential"
    except ValueError as err:
        alpha_fit, alpha_ok, alpha_note = np.nan, False, str(err)
    checks.append(CheckResult("alpha_fit", alpha_fit, alpha_ref,
                              tol.alpha_fit_rel * alpha_ref, alpha_ok, alpha_note))

    lap_ref = 0.0 if spherical else -6.0 * cfg.gaussian_a
    lap_tol = tol.classify_lap_tol if spherical else \
        tol.lap_limit_rel * max(6.0 * cfg.gaussian_a, tol.lap_limit_floor)
    lap_val = laplacian_limit(solution.profiles)
    checks.append(CheckResult(
        "laplacian_limit", lap_val, lap_ref, lap_tol,
        abs(lap_val - lap_ref) <= lap_tol,
        note="mean Delta u over the outermost tail quartile",
    ))

    int_tol = tol.integral_rel_spherical if spherical else tol.integral_rel
    try:
        int_res = integral_equation_residual(solution)
        int_ok = int_res <= int_tol
        int_note = "max relative residual at r in {0.1, 1, 10}"
    except QCurvError as err:
        int_res, int_ok, int_note = np.nan, False, str(err)
    checks.append(CheckResult("integral_equation", int_res, 0.0, int_tol, int_ok, int_note))

    if spherical:
        diff = solution.profiles["u"] - solution.profiles["v"]
        flatness = float(np.std(diff))
        checks.append(CheckResult(
            "decomposition", flatness, 0.0, tol.spherical_flatness,
            flatness <= tol.spherical_flatness,
            note="std of u - v (degree-0 polynomial part)",
        ))
    else:
        a_fit, _c_fit = _fit_decomposition(solution.profiles)
        dec_ok = (abs(a_fit - cfg.gaussian_a) <= tol.decomposition_rel * cfg.gaussian_a
                  and a_fit >= -1e-6)
        checks.append(CheckResult(
            "decomposition", a_fit, cfg.gaussian_a,
            tol.decomposition_rel * cfg.gaussian_a, dec_ok,
            note="fitted quadratic coefficient of u - v (nonnegative concavity)",
        ))

    expected = SPHERICAL if spherical else NON_SPHERICAL
    try:
        label = classify_sphericality(solution.profiles, tol, u_eval=solution.evaluator())
        class_ok = label == expected
        class_note = f"classified {label}, expected {expected}"
    except CriteriaDisagreementError as err:
        label, class_ok, class_note = "inconsistent", False, str(err)
    checks.append(CheckResult(
        "classification", 1.0 if class_ok else 0.0, 1.0, 0.0, class_ok, class_note,
    ))

    bound_ok, margin = check_volume_bound(solution.volume, expected, tol)
    checks.append(CheckResult(
        "volume_bound", margin, 0.0, 0.0, bound_ok,
        note="margin 2 pi^2 - V (strict for non-spherical)",
    ))

    gap = beckner_min_gap(cfg.degree_cap, cfg.grid_size, tol.beckner_samples)
    checks.append(CheckResult(
        "beckner", gap, 0.0, -tol.beckner_floor, gap >= tol.beckner_floor,
        note=f"min inequality slack over {tol.beckner_samples} seeded fields",
    ))

    return VerificationReport(classification=label, checks=checks)


def run_full_report(config: SolverConfig,
                    tolerances: CheckTolerances | None = None) -> VerificationReport:
    """Solve, normalize, profile and verify one configuration end to end."""
    record = solve_record(config, strict=False)
    return report_for_record(record, tolerances)
