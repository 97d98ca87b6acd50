import numpy as np
import pytest

from qcurv3 import (
    SPHERE_VOLUME,
    ConvergenceError,
    SolverConfig,
    SphereGrid,
    ZonalField,
    build_grid,
    el_residual,
    evaluate_objective,
    mass_integral,
    minimize,
    minimize_with_trace,
    normalize,
    objective_gradient,
    weight_kernel,
)


def _random_zero_mean(rng, n, scale=0.1):
    c = rng.standard_normal(n + 1) * scale
    c[0] = 0.0
    return ZonalField(c, zero_mean=True)


# ---- weight kernel ----

def test_weight_kernel_values():
    grid = SphereGrid(theta=np.array([1e-9, np.pi / 2]), weights=np.array([1.0, 1.0]))
    near_pole, equator = weight_kernel(SolverConfig(mu=0.5, gaussian_a=1.0), grid)
    assert np.isclose(near_pole, 2.0 * 2.0 ** (-1.5), rtol=1e-8)  # theta -> 0 limit
    assert np.isclose(equator, 2.0 * np.exp(-3.0), rtol=1e-12)    # r(pi/2) = 1

    flat = weight_kernel(SolverConfig(mu=0.0, gaussian_a=0.0), build_grid(16))
    assert np.allclose(flat, 2.0, rtol=0, atol=1e-14)


def test_weight_kernel_pole_limit_independent_of_a():
    grid = SphereGrid(theta=np.array([1e-9, 1e-8]), weights=np.array([1.0, 1.0]))
    for a in (0.0, 1.0, 5.0):
        vals = weight_kernel(SolverConfig(mu=0.5, gaussian_a=a), grid)
        assert np.allclose(vals, 2.0 ** (-0.5), rtol=1e-8)


# ---- objective ----

def test_objective_gauge_invariance(grid256, rng):
    config = SolverConfig(mu=0.35, gaussian_a=1.0)
    field = _random_zero_mean(rng, 64, 0.2)
    shifted = ZonalField(field.coeffs + 3.7 * np.eye(65)[0] * np.sqrt(SPHERE_VOLUME))
    j0 = evaluate_objective(field, config, grid256)
    j1 = evaluate_objective(shifted, config, grid256)
    assert abs(j1 - j0) <= 1e-9 * abs(j0)


def test_objective_at_zero_flat_case(grid256):
    config = SolverConfig(mu=0.0, gaussian_a=0.0)
    j = evaluate_objective(ZonalField.zeros(64), config, grid256)
    expected = -(4.0 * np.pi**2 / 3.0) * np.log(4.0 * np.pi**2)
    assert np.isclose(j, expected, rtol=1e-13)
    assert np.isclose(j, -48.37, atol=5e-3)


def test_objective_at_zero_generic(grid256):
    config = SolverConfig(mu=0.3, gaussian_a=2.0)
    j = evaluate_objective(ZonalField.zeros(64), config, grid256)
    mass = grid256.weights @ weight_kernel(config, grid256)
    assert np.isclose(j, -(1.0 - config.mu) * 4.0 * np.pi**2 / 3.0 * np.log(mass), rtol=1e-13)


# ---- gradient ----

def test_gradient_zero_at_flat_case(grid256):
    config = SolverConfig(mu=0.0, gaussian_a=0.0)
    g = objective_gradient(ZonalField.zeros(64), config, grid256)
    assert np.max(np.abs(g.coeffs)) <= 1e-12


def test_gradient_nonzero_with_mu(grid256):
    config = SolverConfig(mu=0.5, gaussian_a=1.0)
    assert el_residual(ZonalField.zeros(64), config, grid256) > 1e-3


def test_gradient_matches_finite_differences(grid128, rng):
    config = SolverConfig(mu=0.5, gaussian_a=1.0, degree_cap=32, grid_size=128)
    h = 1e-5
    for _ in range(5):
        field = _random_zero_mean(rng, 32, scale=0.04)
        g = objective_gradient(field, config, grid128).coeffs
        for k in (1, 2, 7, 19, 32):
            bump = np.zeros(33)
            bump[k] = h
            fd = (
                evaluate_objective(ZonalField(field.coeffs + bump), config, grid128)
                - evaluate_objective(ZonalField(field.coeffs - bump), config, grid128)
            ) / (2.0 * h)
            assert abs(fd - g[k]) <= 1e-6


def test_gradient_constant_mode_gauge(grid256, rng):
    config = SolverConfig(mu=0.4, gaussian_a=1.0)
    field = _random_zero_mean(rng, 64)
    g = objective_gradient(field, config, grid256)
    assert g.coeffs[0] == 0.0
    assert g.zero_mean


# ---- minimize ----

def test_minimize_small_mu_stays_near_zero(grid256):
    # mu -> 0 surrogate: the zero field is near-critical (sup-norm gradient
    # ~2e-5).  Without a decaying curvature profile (a = 0) the landscape is
    # a near-flat conformal valley, so this is a diagnostics-tolerance run;
    # at tighter tolerances the iterates legitimately drift down the valley.
    config = SolverConfig(mu=1e-6, gaussian_a=0.0, tol_grad=1e-4)
    field, _trace = minimize_with_trace(config, grid256)
    assert np.linalg.norm(field.coeffs) <= 1e-4
    j0 = evaluate_objective(ZonalField.zeros(64), config, grid256)
    j = evaluate_objective(field, config, grid256)
    assert j <= j0 + 1e-12
    assert abs(j - j0) <= 1e-8
    assert el_residual(field, config, grid256) <= config.tol_grad


def test_minimize_default_problem(grid256):
    config = SolverConfig(mu=0.5, gaussian_a=1.0)
    field = minimize(config, grid256)
    assert el_residual(field, config, grid256) <= config.tol_grad
    assert field.coeffs[0] == 0.0


def test_minimize_deterministic():
    config = SolverConfig(mu=0.5, gaussian_a=1.0)
    a = minimize(config)
    b = minimize(config)
    assert np.array_equal(a.coeffs, b.coeffs)


def test_minimize_monotone_trace(grid256):
    config = SolverConfig(mu=0.5, gaussian_a=1.0)
    _field, trace = minimize_with_trace(config, grid256)
    j = np.asarray(trace.j_values)
    assert np.all(np.diff(j) <= 0.0)


def test_minimize_coercivity_witness(grid256):
    # (mu/2) ||w||^2 <= J(w) + C_obs along the whole trajectory
    config = SolverConfig(mu=0.5, gaussian_a=1.0)
    _field, trace = minimize_with_trace(config, grid256)
    seminorms = np.asarray(trace.seminorms_sq)
    j = np.asarray(trace.j_values)
    assert np.isfinite(trace.c_obs)
    assert np.all(0.5 * config.mu * seminorms <= j + trace.c_obs + 1e-9)
    assert seminorms.max() < 1e6


def test_minimize_max_iter_exceeded(grid256):
    config = SolverConfig(mu=0.5, gaussian_a=1.0, max_iter=1)
    with pytest.raises(ConvergenceError) as excinfo:
        minimize(config, grid256)
    assert excinfo.value.residual > config.tol_grad
    assert excinfo.value.coeffs is not None


def test_minimize_rejects_mu_zero():
    with pytest.raises(ValueError):
        minimize(SolverConfig(mu=0.0, gaussian_a=0.0))


def test_minimize_multistart_matches_single(grid256):
    base = minimize(SolverConfig(mu=0.5, gaussian_a=1.0), grid256)
    multi = minimize(SolverConfig(mu=0.5, gaussian_a=1.0, n_starts=3, seed=5), grid256)
    # distinct basins are not expected here; both must satisfy the contract
    config = SolverConfig(mu=0.5, gaussian_a=1.0)
    assert el_residual(multi, config, grid256) <= config.tol_grad
    assert np.isclose(
        evaluate_objective(multi, config, grid256),
        evaluate_objective(base, config, grid256),
        rtol=1e-10,
    )


# ---- normalize ----

def test_normalize_flat_case(grid256):
    config = SolverConfig(mu=0.0, gaussian_a=0.0)
    _field, shift = normalize(ZonalField.zeros(64), config, grid256)
    assert abs(shift) <= 1e-14


def test_normalize_enforces_constraint(grid256, record_mu05):
    config = record_mu05.config
    target = (1.0 - config.mu) * 4.0 * np.pi**2
    mass = mass_integral(record_mu05.field, config, grid256)
    assert abs(mass - target) <= 1e-10 * target


def test_normalize_idempotent(grid256, record_mu05):
    _again, shift = normalize(record_mu05.field, record_mu05.config, grid256)
    assert abs(shift) <= 1e-12


# ---- residual ----

def test_el_residual_constant_shift_invariant(grid256, rng):
    config = SolverConfig(mu=0.5, gaussian_a=1.0)
    field = _random_zero_mean(rng, 64)
    shifted = ZonalField(field.coeffs + 2.2 * np.eye(65)[0])
    assert np.isclose(
        el_residual(field, config, grid256),
        el_residual(shifted, config, grid256),
        rtol=1e-9,
    )


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(mu=1.5, gaussian_a=1.0)
    with pytest.raises(ValueError):
        SolverConfig(mu=-0.1, gaussian_a=1.0)
    with pytest.raises(ValueError):
        SolverConfig(mu=0.5, gaussian_a=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(mu=0.5, gaussian_a=1.0, degree_cap=64, grid_size=64)
    with pytest.raises(ValueError):
        SolverConfig(mu=0.5, gaussian_a=1.0, tol_grad=0.0)
