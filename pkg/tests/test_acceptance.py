"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
lines as they complete.
"""

import time

import numpy as np

from qcurv3 import (
    SolverConfig,
    SPHERE_VOLUME,
    SphericalSolution,
    ZonalField,
    beckner_gap,
    build_grid,
    evaluate_objective,
    fit_alpha,
    integral_equation_residual,
    inv_sq_kernel_mean,
    laplacian_limit,
    log_kernel_mean,
    objective_gradient,
    run_full_report,
    scalar_curvature,
    solve_record,
    surface_mean_oracle,
    volume,
    zonal_basis,
)
from qcurv3.cli import SWEEP_COLUMNS, main
from qcurv3.verify import NON_SPHERICAL, SPHERICAL, classify_sphericality


def _criterion(number: int, description: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"criterion {number:02d} [{description}]: {status}  {detail}")
    assert ok, f"criterion {number:02d} {description}: {detail}"


def test_criterion_01_basis_orthonormality():
    start = time.perf_counter()
    grid = build_grid(128)
    Y = zonal_basis(grid, 32)
    gram = Y.T @ (grid.weights[:, None] * Y)
    err = float(np.max(np.abs(gram - np.eye(33))))
    elapsed = time.perf_counter() - start
    _criterion(1, "basis orthonormality N=32 M=128", err <= 1e-12 and elapsed < 1.0,
               f"gram error {err:.2e}, {elapsed:.2f}s")


def test_criterion_02_grid_volume():
    errs = {m: abs(build_grid(m).weights.sum() - SPHERE_VOLUME) for m in (16, 64, 256)}
    worst = max(errs.values())
    _criterion(2, "grid volume = 2 pi^2", worst <= 1e-12,
               f"max deviation {worst:.2e} over M in (16, 64, 256)")


def test_criterion_03_beckner_inequality():
    start = time.perf_counter()
    grid = build_grid(256)
    rng = np.random.default_rng(1234)
    worst = np.inf
    for _ in range(1000):
        c = rng.standard_normal(65)
        c *= rng.uniform(0.0, 1.0) / np.linalg.norm(c)
        worst = min(worst, beckner_gap(ZonalField(c), grid))
    elapsed = time.perf_counter() - start
    _criterion(3, "sharp inequality, 1000 seeded fields",
               worst >= -1e-10 and elapsed < 5.0,
               f"min gap {worst:.3e}, {elapsed:.2f}s")


def test_criterion_04_gradient_correctness():
    config = SolverConfig(mu=0.5, gaussian_a=1.0, degree_cap=32, grid_size=128)
    grid = build_grid(128)
    rng = np.random.default_rng(99)
    h = 1e-5
    worst = 0.0
    for _ in range(20):
        c = rng.standard_normal(33)
        c[0] = 0.0
        c *= rng.uniform(0.05, 0.35) / np.linalg.norm(c)
        field = ZonalField(c, zero_mean=True)
        g = objective_gradient(field, config, grid).coeffs
        for k in range(1, 33):
            bump = np.zeros(33)
            bump[k] = h
            fd = (
                evaluate_objective(ZonalField(c + bump), config, grid)
                - evaluate_objective(ZonalField(c - bump), config, grid)
            ) / (2.0 * h)
            worst = max(worst, abs(fd - g[k]))
    _criterion(4, "gradient vs central differences, 20 fields",
               worst <= 1e-6, f"max abs deviation {worst:.2e}")


def test_criterion_05_default_solve():
    config = SolverConfig(mu=0.5, gaussian_a=1.0, degree_cap=64, grid_size=256)
    start = time.perf_counter()
    first = solve_record(config)
    elapsed = time.perf_counter() - start
    second = solve_record(config)
    identical = np.array_equal(first.field.coeffs, second.field.coeffs)
    ok = first.el_residual <= 1e-8 and elapsed < 10.0 and identical
    _criterion(5, "solve mu=0.5 a=1", ok,
               f"residual {first.el_residual:.2e}, {elapsed:.2f}s, "
               f"rerun bitwise identical: {identical}")


def test_criterion_06_volume_identity(records_by_mu):
    worst = 0.0
    for mu, record in records_by_mu.items():
        expected = (1.0 - mu) * SPHERE_VOLUME
        worst = max(worst, abs(record.volume - expected) / expected)
    _criterion(6, "volume identity, mu in (0.25, 0.5, 0.75)",
               worst <= 5e-3, f"max relative deviation {worst:.2e}")


def test_criterion_07_pohozaev(records_by_mu):
    ok = True
    details = []
    for mu, record in records_by_mu.items():
        bound = 1e-2 * max(4.0 * mu * (1.0 - mu), 0.1)
        ok = ok and record.pohozaev_defect <= bound
        details.append(f"mu={mu}: {record.pohozaev_defect:.2e}<= {bound:.1e}")
    _criterion(7, "scaling identity by independent quadrature", ok, "; ".join(details))


def test_criterion_08_integral_representation(record_mu05, spherical_records):
    constructed = integral_equation_residual(record_mu05)
    spherical = integral_equation_residual(spherical_records[1.0])
    ok = constructed <= 1e-2 and spherical <= 1e-3
    _criterion(8, "second-order integral identity", ok,
               f"constructed {constructed:.2e} (<=1e-2), spherical {spherical:.2e} (<=1e-3)")


def test_criterion_09_asymptotics(records_by_mu):
    ok = True
    details = []
    for mu, record in records_by_mu.items():
        expected = 2.0 * (1.0 - mu)
        fitted = fit_alpha(record.profiles)
        ok = ok and abs(fitted - expected) <= 0.02 * expected
        details.append(f"alpha({mu})={fitted:.4f}")
    a = records_by_mu[0.5].config.gaussian_a
    lap100 = records_by_mu[0.5].evaluator().laplacian(100.0)
    lap_ok = abs(lap100 + 6.0 * a) <= 1e-2 * max(6.0 * a, 1.0)
    ok = ok and lap_ok
    details.append(f"Delta u(100)={lap100:.6f} vs {-6.0 * a}")
    _criterion(9, "tail asymptotics", ok, "; ".join(details))


def test_criterion_10_kernel_means_vs_oracle():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(5):
        r, s = rng.uniform(0.1, 5.0, 2)
        if abs(r - s) < 0.05:
            s += 0.2
        for closed, kernel in (
            (log_kernel_mean, np.log),
            (inv_sq_kernel_mean, lambda d: 1.0 / d**2),
        ):
            reference = surface_mean_oracle(kernel, r, s)
            worst = max(worst, abs(closed(r, s) - reference) / abs(reference))
    _criterion(10, "kernel means vs surface-quadrature oracle",
               worst <= 1e-4, f"max relative error {worst:.2e}")


def test_criterion_11_spherical_references(spherical_records):
    ok = True
    details = []
    radii = np.geomspace(0.05, 30.0, 10)
    for lam, record in spherical_records.items():
        vol_err = abs(volume(SphericalSolution(lam)) - SPHERE_VOLUME) / SPHERE_VOLUME
        flatness = float(np.std(record.profiles["u"] - record.profiles["v"]))
        curv_err = float(np.max(np.abs(scalar_curvature(record.evaluator(), radii) - 6.0)))
        ok = ok and vol_err <= 1e-6 and flatness <= 1e-4 and curv_err <= 1e-6
        details.append(f"lam={lam}: vol {vol_err:.1e}, u-v std {flatness:.1e}, "
                       f"|R-6| {curv_err:.1e}")
    _criterion(11, "spherical references", ok, "; ".join(details))


def test_criterion_12_volume_bound_sweep(tmp_path):
    start = time.perf_counter()
    out = tmp_path / "sweep.csv"
    mus = ",".join(str(round(0.1 * k, 1)) for k in range(1, 10))
    code = main(["sweep", "--mu", mus, "--a", "1", "--out", str(out)])
    elapsed = time.perf_counter() - start
    rows = [dict(zip(SWEEP_COLUMNS, map(float, line.split(","))))
            for line in out.read_text().splitlines()[1:]]
    margins = [row["volume_margin"] for row in rows]
    ok = code == 0 and len(rows) == 9 and all(m > 0.0 for m in margins) and elapsed < 120.0
    _criterion(12, "strict volume bound across the mu sweep", ok,
               f"min margin {min(margins):.4f}, {elapsed:.1f}s")


def test_criterion_13_classification(records_by_mu, spherical_records):
    ok = True
    details = []
    for mu, record in records_by_mu.items():
        label = classify_sphericality(record.profiles, u_eval=record.evaluator())
        ok = ok and label == NON_SPHERICAL
        details.append(f"mu={mu}: {label}")
    for lam, record in spherical_records.items():
        label = classify_sphericality(record.profiles, u_eval=record.evaluator())
        ok = ok and label == SPHERICAL
        details.append(f"lam={lam}: {label}")
    control = run_full_report(SolverConfig(mu=0.5, gaussian_a=1.0, max_iter=1))
    ok = ok and not control.overall_pass
    details.append(f"negative control fails: {not control.overall_pass}")
    _criterion(13, "three-criteria classification", ok, "; ".join(details))
