"""Variational solver for the prescribed-curvature problem on S^3.

The objective over zonal fields w with zero spherical mean is

    J(w) = int ( 1/2 |sqrt(P) w|^2 + 2 (1-mu) w ) dV0
           - (1-mu) (4 pi^2 / 3) log( int G e^{3w} dV0 ),

where G(theta) = 2 exp(-3 a tan^2(theta/2)) (1 + cos theta)^{-3 mu}
collects the Gaussian curvature profile pulled back through stereographic
projection together with the mu-weighted volume element.  Adding a
constant to w leaves J unchanged, so the constant mode is gauge-fixed to
zero during descent and restored afterwards by the mass normalization

    int G e^{3 w} dV0 = (1 - mu) 4 pi^2.

The minimizer is a diagonally preconditioned gradient descent with
Armijo backtracking (the quadratic term's Hessian is exactly the diagonal
of multipliers, so the preconditioned step approximates a Newton step),
interleaved with damped Newton steps on the gradient system once the
residual is small: near the optimum the J-differences fall below
double-precision resolution, so step acceptance must switch from function
decrease to residual decrease.
"""

import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConvergenceError, NumericalError
from .sphere import (
    SPHERE_VOLUME,
    SphereGrid,
    ZonalField,
    build_grid,
    p3_multipliers,
    zonal_basis,
)

_NORM = np.sqrt(SPHERE_VOLUME)

#: Residual below which Newton steps on the gradient system are attempted.
_NEWTON_SWITCH = 1e-3


@dataclass
class SolverConfig:
    """Problem parameters and discretization sizes for one solve.

    mu is the volume deficit: the constructed metric has volume
    (1 - mu) * 2 pi^2.  gaussian_a is the coefficient a in the curvature
    profile K(x) = 2 exp(-3 a |x|^2); a > 0 yields the non-spherical
    solutions, a = 0 (with mu = 0) is reserved for spherical diagnostics.
    """

    mu: float
    gaussian_a: float
    degree_cap: int = 64
    grid_size: int = 256
    tol_grad: float = 1e-10
    max_iter: int = 10000
    seed: int = 0
    n_starts: int = 1

    def __post_init__(self):
        if not (0.0 <= self.mu < 1.0):
            raise ValueError(f"mu must lie in (0, 1); got {self.mu}")
        if self.gaussian_a < 0.0:
            raise ValueError(f"gaussian_a must be >= 0; got {self.gaussian_a}")
        if self.degree_cap < 1:
            raise ValueError("degree_cap must be >= 1")
        if self.grid_size < self.degree_cap + 1:
            raise ValueError("grid_size must exceed degree_cap")
        if not (self.tol_grad > 0.0):
            raise ValueError("tol_grad must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")

    def require_minimizable(self):
        """Reject diagnostic-only parameter combinations for a real solve."""
        if self.mu == 0.0:
            raise ValueError("mu must be strictly positive to minimize; mu=0 is diagnostic only")


@dataclass
class MinimizeTrace:
    """Per-iteration record of the accepted descent steps."""

    j_values: list = dc_field(default_factory=list)
    residuals: list = dc_field(default_factory=list)
    seminorms_sq: list = dc_field(default_factory=list)
    descent_iterations: int = 0
    newton_iterations: int = 0
    c_obs: float = 0.0
    start_index: int = 0


def log_weight_kernel(config: SolverConfig, grid: SphereGrid) -> np.ndarray:
    """log G at the nodes; kept in log space to avoid over/underflow."""
    half = grid.theta / 2.0
    return (
        np.log(2.0)
        - 3.0 * config.gaussian_a * np.tan(half) ** 2
        - 3.0 * config.mu * np.log1p(grid.cos_theta)
    )


def weight_kernel(config: SolverConfig, grid: SphereGrid) -> np.ndarray:
    """Node values G_j = 2 exp(-3 a tan^2(theta/2)) (1 + cos theta)^{-3 mu}."""
    return np.exp(log_weight_kernel(config, grid))


class _Workspace:
    """Precomputed transforms for repeated objective/gradient evaluation."""

    def __init__(self, config: SolverConfig, grid: SphereGrid | None = None):
        self.config = config
        self.grid = grid if grid is not None else build_grid(config.grid_size)
        if config.degree_cap > self.grid.node_count - 1:
            raise ValueError("grid does not resolve degree_cap")
        self.Y = zonal_basis(self.grid, config.degree_cap)
        self.mults = p3_multipliers(config.degree_cap)
        self.precond = 1.0 / (self.mults + 1.0)
        self.log_wG = np.log(self.grid.weights) + log_weight_kernel(config, self.grid)
        self.factor = (1.0 - config.mu) * 4.0 * np.pi**2

    def _exponents(self, c: np.ndarray) -> np.ndarray:
        e = self.log_wG + 3.0 * (self.Y @ c)
        if not np.all(np.isfinite(e)):
            raise NumericalError(
                "non-finite exponent in the mass integral", detail=float(np.nanmax(e))
            )
        return e

    def log_mass(self, c: np.ndarray) -> float:
        """log of int G e^{3w} dV0."""
        e = self._exponents(c)
        m = float(e.max())
        return m + float(np.log(np.sum(np.exp(e - m))))

    def objective(self, c: np.ndarray) -> float:
        quad = 0.5 * float(np.sum(self.mults * c * c))
        linear = 2.0 * (1.0 - self.config.mu) * c[0] * _NORM
        return quad + linear - self.factor / 3.0 * self.log_mass(c)

    def probabilities(self, c: np.ndarray) -> np.ndarray:
        e = self._exponents(c)
        p = np.exp(e - e.max())
        total = p.sum()
        if not (total > 0.0) or not np.isfinite(total):
            raise NumericalError("degenerate mass integral", detail=float(total))
        return p / total

    def gradient(self, c: np.ndarray) -> np.ndarray:
        g = self.mults * c - self.factor * (self.Y.T @ self.probabilities(c))
        g[0] = 0.0
        return g

    def hessian(self, c: np.ndarray) -> np.ndarray:
        p = self.probabilities(c)
        avg = self.Y.T @ p
        second = self.Y.T @ (p[:, None] * self.Y)
        return np.diag(self.mults) - 3.0 * self.factor * (second - np.outer(avg, avg))


def evaluate_objective(field: ZonalField, config: SolverConfig, grid: SphereGrid | None = None) -> float:
    """Value of J at the field.  Invariant under adding constants."""
    ws = _Workspace(config, grid)
    value = ws.objective(_padded(field, config.degree_cap))
    if not np.isfinite(value):
        raise NumericalError("objective overflow",
                             detail=float(np.max(np.abs(field.coeffs))))
    return value


def objective_gradient(field: ZonalField, config: SolverConfig, grid: SphereGrid | None = None) -> ZonalField:
    """Coefficient-space gradient of J restricted to zero-mean fields.

    Component k >= 1:  lambda_k sqrt(1+lambda_k) c_k
    - (1-mu) 4 pi^2 <Y_k>_rho, with rho the G e^{3w}-weighted probability
    on the grid.  The constant component is gauge-fixed to zero.
    """
    ws = _Workspace(config, grid)
    return ZonalField(ws.gradient(_padded(field, config.degree_cap)), zero_mean=True)


def el_residual(field: ZonalField, config: SolverConfig, grid: SphereGrid | None = None) -> float:
    """Sup-norm of the discrete Euler-Lagrange gradient."""
    return float(np.max(np.abs(objective_gradient(field, config, grid).coeffs)))


def mass_integral(field: ZonalField, config: SolverConfig, grid: SphereGrid | None = None) -> float:
    """int G e^{3w} dV0 evaluated on the grid."""
    ws = _Workspace(config, grid)
    return float(np.exp(ws.log_mass(_padded(field, config.degree_cap))))


def normalize(field: ZonalField, config: SolverConfig, grid: SphereGrid | None = None):
    """Shift the constant mode so the mass constraint holds.

    Returns (shifted field, C) with C = (1/3) log( (1-mu) 4 pi^2 / int G e^{3w} dV0 );
    after the shift the integral equals (1-mu) 4 pi^2 to rounding.
    """
    ws = _Workspace(config, grid)
    log_mass = ws.log_mass(_padded(field, config.degree_cap))
    target = (1.0 - config.mu) * 4.0 * np.pi**2
    if not np.isfinite(log_mass):
        raise NumericalError("mass integral is not finite", detail=log_mass)
    shift = (np.log(target) - log_mass) / 3.0
    c = field.coeffs.copy()
    if c.size < config.degree_cap + 1:
        c = np.pad(c, (0, config.degree_cap + 1 - c.size))
    c[0] += shift * _NORM
    return ZonalField(c), float(shift)


def _padded(field: ZonalField, degree_cap: int) -> np.ndarray:
    if field.degree_cap > degree_cap:
        raise ValueError("field degree exceeds config degree_cap")
    if field.degree_cap == degree_cap:
        return field.coeffs.copy()
    return np.pad(field.coeffs, (0, degree_cap - field.degree_cap))


def _try_newton(ws: _Workspace, c: np.ndarray, g: np.ndarray, res: float):
    """Damped Newton step on the gradient system, accepted only on a clear
    residual contraction.  Returns (c, g, res, accepted)."""
    try:
        delta = np.linalg.solve(ws.hessian(c)[1:, 1:], g[1:])
    except np.linalg.LinAlgError:
        return c, g, res, False
    if not np.all(np.isfinite(delta)):
        return c, g, res, False
    damping = 1.0
    for _ in range(12):
        trial = c.copy()
        trial[1:] -= damping * delta
        g_trial = ws.gradient(trial)
        res_trial = float(np.max(np.abs(g_trial)))
        if res_trial <= 0.5 * res:
            return trial, g_trial, res_trial, True
        damping *= 0.5
    return c, g, res, False


def _single_start(ws: _Workspace, c0: np.ndarray, config: SolverConfig):
    """Preconditioned Armijo descent, with Newton steps on the gradient
    system once the residual is small.

    Near the optimum the J-differences drop below double-precision
    resolution, so the endgame must accept on residual contraction rather
    than on function decrease; descent remains the fallback whenever a
    Newton step fails to contract.
    """
    trace = MinimizeTrace()
    c = c0
    j_val = ws.objective(c)
    g = ws.gradient(c)
    res = float(np.max(np.abs(g)))
    trace.j_values.append(j_val)
    trace.residuals.append(res)
    trace.seminorms_sq.append(float(np.sum(ws.mults * c * c)))
    step = 1.0
    tol = config.tol_grad
    while res > tol and trace.descent_iterations + trace.newton_iterations < config.max_iter:
        if res <= _NEWTON_SWITCH:
            c, g, res, accepted = _try_newton(ws, c, g, res)
            if accepted:
                trace.newton_iterations += 1
                trace.residuals.append(res)
                continue
        direction = -ws.precond * g
        slope = float(g @ direction)
        step = min(2.0 * step, 1.0)
        while True:
            trial = c + step * direction
            j_trial = ws.objective(trial)
            if j_trial <= j_val + 1e-4 * step * slope:
                break
            step *= 0.5
            if step < 1e-18:
                raise NumericalError("line search collapsed", detail=res)
        c, j_val = trial, j_trial
        g = ws.gradient(c)
        res = float(np.max(np.abs(g)))
        trace.descent_iterations += 1
        trace.j_values.append(j_val)
        trace.residuals.append(res)
        trace.seminorms_sq.append(float(np.sum(ws.mults * c * c)))
    return c, res, trace


def minimize_with_trace(config: SolverConfig, grid: SphereGrid | None = None):
    """Minimize J over zero-mean zonal fields; returns (field, trace).

    Start 0 is the zero field; further starts (n_starts > 1) draw seeded
    random coefficients with norm <= 0.1.  Across starts the lowest J
    wins, ties broken by lowest residual.  Deterministic for a fixed
    config and seed.
    """
    config.require_minimizable()
    ws = _Workspace(config, grid)
    rng = np.random.default_rng(config.seed)
    best = None
    last_error = None
    for start in range(config.n_starts):
        if start == 0:
            c0 = np.zeros(config.degree_cap + 1)
        else:
            c0 = rng.standard_normal(config.degree_cap + 1)
            c0[0] = 0.0
            c0 *= 0.1 * rng.uniform(0.0, 1.0) / np.linalg.norm(c0)
        try:
            c, res, trace = _single_start(ws, c0, config)
        except NumericalError as err:
            last_error = err
            continue
        if res > config.tol_grad:
            last_error = ConvergenceError(
                f"residual {res:.3e} above tol_grad {config.tol_grad:.1e} "
                f"after {trace.descent_iterations} iterations",
                residual=res,
                coeffs=c,
                iterations=trace.descent_iterations,
            )
            continue
        trace.start_index = start
        mu = config.mu
        trace.c_obs = float(np.max(0.5 * mu * np.asarray(trace.seminorms_sq)
                                   - np.asarray(trace.j_values)))
        key = (ws.objective(c), res)
        if best is None or key < best[0]:
            best = (key, c, trace)
    if best is None:
        raise last_error if last_error is not None else NumericalError("no start succeeded")
    _, c, trace = best
    return ZonalField(c, zero_mean=True), trace


def minimize(config: SolverConfig, grid: SphereGrid | None = None) -> ZonalField:
    """Zero-mean minimizer of J with sup-norm gradient <= tol_grad."""
    field, _ = minimize_with_trace(config, grid)
    return field


def spectral_tail_ratio(field: ZonalField) -> float:
    """|c_N| / max_k |c_k|; a resolution diagnostic (warn above 1e-8)."""
    top = float(np.max(np.abs(field.coeffs)))
    if top == 0.0:
        return 0.0
    ratio = float(np.abs(field.coeffs[-1])) / top
    if ratio > 1e-8:
        warnings.warn(
            f"spectral tail ratio {ratio:.2e} exceeds 1e-08; increase degree_cap",
            stacklevel=2,
        )
    return ratio
