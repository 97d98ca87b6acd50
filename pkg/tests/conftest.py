import numpy as np
import pytest

from qcurv3 import SolverConfig, build_grid, solve_record, spherical_record


@pytest.fixture(scope="session")
def grid128():
    return build_grid(128)


@pytest.fixture(scope="session")
def grid256():
    return build_grid(256)


@pytest.fixture(scope="session")
def record_mu05():
    """Converged mu=0.5, a=1 solution at default resolution."""
    return solve_record(SolverConfig(mu=0.5, gaussian_a=1.0))


@pytest.fixture(scope="session")
def records_by_mu():
    return {mu: solve_record(SolverConfig(mu=mu, gaussian_a=1.0))
            for mu in (0.25, 0.5, 0.75)}


@pytest.fixture(scope="session")
def spherical_records():
    return {lam: spherical_record(lam) for lam in (0.5, 1.0, 2.0)}


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
