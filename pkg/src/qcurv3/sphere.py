"""Zonal spectral toolbox on the round three-sphere.

A rotationally symmetric function on S^3 depends only on the polar angle
theta and expands in zonal harmonics.  The degree-k zonal harmonic is the
Chebyshev polynomial of the second kind U_k(cos theta); dividing by
sqrt(2 pi^2) makes it unit-norm in L^2(S^3), since

    int_{S^3} f(theta) dV0 = 4 pi int_0^pi f(theta) sin^2(theta) dtheta

and int_0^pi U_j U_k sin^2 = (pi/2) delta_jk.  The quadrature below is the
Gauss rule for the weight sqrt(1 - t^2) in t = cos theta (nodes at
t_j = cos(j pi / (M+1))), scaled by 4 pi, so it integrates products of
basis polynomials up to total degree 2M - 1 exactly.

The intertwining operator of order three and its square root act
diagonally on the coefficients with multipliers built from the
Laplace-Beltrami eigenvalues lambda_k = k (k + 2).
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

#: Total volume of the unit three-sphere.
SPHERE_VOLUME = 2.0 * np.pi**2

_NORM = np.sqrt(SPHERE_VOLUME)


@dataclass(frozen=True, eq=False)
class ZonalField:
    """Coefficients c_k, k = 0..N, of a zonal expansion on S^3.

    ``coeffs[k]`` multiplies the unit-norm zonal harmonic of degree k.
    ``zero_mean`` flags a field constrained to vanishing spherical mean,
    in which case c_0 must be exactly zero.
    """

    coeffs: np.ndarray
    zero_mean: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float, copy=True)
        if c.ndim != 1 or c.size < 2:
            raise ValueError("coeffs must be a 1-d sequence covering degrees 0..N with N >= 1")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        if self.zero_mean and c[0] != 0.0:
            raise ValueError("zero-mean field requires c_0 == 0 exactly")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def degree_cap(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def zeros(cls, degree_cap: int, zero_mean: bool = True) -> "ZonalField":
        return cls(np.zeros(degree_cap + 1), zero_mean=zero_mean)

    @classmethod
    def unit(cls, k: int, degree_cap: int | None = None) -> "ZonalField":
        """Basis field e_k (single unit coefficient at degree k)."""
        n = max(k, 1) if degree_cap is None else degree_cap
        if k > n:
            raise ValueError("k exceeds degree_cap")
        c = np.zeros(n + 1)
        c[k] = 1.0
        return cls(c, zero_mean=(k > 0))


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Polar-angle quadrature nodes and weights for zonal integration.

    ``sum(weights * f(theta))`` approximates ``int_{S^3} f dV0`` and is
    exact whenever f is a polynomial of degree <= 2M - 1 in cos(theta).
    Nodes are strictly interior to (0, pi).
    """

    theta: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        for name in ("theta", "weights"):
            a = np.array(getattr(self, name), dtype=float, copy=True)
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def node_count(self) -> int:
        return self.theta.size

    @property
    def cos_theta(self) -> np.ndarray:
        return np.cos(self.theta)


def build_grid(node_count: int) -> SphereGrid:
    """Gauss quadrature on (0, pi) for the zonal volume element.

    Nodes theta_j = j pi / (M+1), weights 4 pi^2 sin^2(theta_j) / (M+1).
    The weights sum to 2 pi^2 (total volume of S^3) identically.
    """
    if not isinstance(node_count, (int, np.integer)) or node_count < 2:
        raise ValueError("node_count must be an integer >= 2")
    j = np.arange(1, node_count + 1, dtype=float)
    theta = j * np.pi / (node_count + 1)
    weights = (4.0 * np.pi**2 / (node_count + 1)) * np.sin(theta) ** 2
    return SphereGrid(theta=theta, weights=weights)


def gegenbauer_series(coeffs, alpha: float, t):
    """Evaluate sum_k coeffs[k] C_k^(alpha)(t) by the three-term recurrence.

    Forward recurrence is stable on [-1, 1] for the degrees used here.
    alpha = 1 gives Chebyshev polynomials of the second kind.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.full_like(t, coeffs[0])
    if coeffs.size == 1:
        return out
    prev = np.ones_like(t)
    cur = 2.0 * alpha * t
    out = out + coeffs[1] * cur
    for k in range(2, coeffs.size):
        prev, cur = cur, (2.0 * (k + alpha - 1.0) * t * cur - (k + 2.0 * alpha - 2.0) * prev) / k
        out += coeffs[k] * cur
    return out


def zonal_basis(grid: SphereGrid, degree_cap: int) -> np.ndarray:
    """Matrix Y[j, k] of unit-norm zonal harmonics at the grid nodes."""
    t = grid.cos_theta
    Y = np.empty((grid.node_count, degree_cap + 1))
    Y[:, 0] = 1.0
    if degree_cap >= 1:
        Y[:, 1] = 2.0 * t
    for k in range(2, degree_cap + 1):
        Y[:, k] = 2.0 * t * Y[:, k - 1] - Y[:, k - 2]
    return Y / _NORM


def _require_resolved(field: ZonalField, grid: SphereGrid):
    if field.degree_cap > grid.node_count - 1:
        raise ValueError(
            f"degree_cap {field.degree_cap} exceeds grid capacity {grid.node_count - 1}"
        )


def zonal_eval(field: ZonalField, grid: SphereGrid) -> np.ndarray:
    """Synthesis: values w(theta_j) = sum_k c_k Y_k(theta_j)."""
    _require_resolved(field, grid)
    return gegenbauer_series(field.coeffs, 1.0, grid.cos_theta) / _NORM


def zonal_analyze(values, grid: SphereGrid, degree_cap: int) -> ZonalField:
    """Analysis: c_k = sum_j w_j values_j Y_k(theta_j).

    Discrete orthogonality makes analyze(eval(f)) == f exactly for fields
    of degree <= N whenever N < M.
    """
    values = np.asarray(values, dtype=float)
    if degree_cap >= grid.node_count:
        raise ValueError("degree_cap must be < node_count for exact analysis")
    if values.shape != grid.theta.shape:
        raise ValueError("values must be sampled on the grid nodes")
    Y = zonal_basis(grid, degree_cap)
    return ZonalField(Y.T @ (grid.weights * values))


def p3_multipliers(degree_cap: int) -> np.ndarray:
    """Diagonal multipliers lambda_k sqrt(1 + lambda_k), lambda_k = k(k+2)."""
    k = np.arange(degree_cap + 1, dtype=float)
    lam = k * (k + 2.0)
    return lam * np.sqrt(1.0 + lam)


def apply_p3(field: ZonalField) -> ZonalField:
    """Apply the order-three intertwining operator: c_k -> lambda_k sqrt(1+lambda_k) c_k."""
    return ZonalField(p3_multipliers(field.degree_cap) * field.coeffs, zero_mean=True)


def apply_p3_sqrt(field: ZonalField) -> ZonalField:
    """Apply the operator square root; applying twice equals apply_p3."""
    return ZonalField(np.sqrt(p3_multipliers(field.degree_cap)) * field.coeffs, zero_mean=True)


def h32_seminorm_sq(field: ZonalField) -> float:
    """Squared homogeneous H^{3/2} seminorm, sum_k lambda_k sqrt(1+lambda_k) c_k^2.

    Equals the squared L^2 norm of apply_p3_sqrt(field); vanishes exactly
    on constant fields.
    """
    return float(np.sum(p3_multipliers(field.degree_cap) * field.coeffs**2))


def field_mean(field: ZonalField) -> float:
    """Spherical mean of the field (only the constant mode contributes)."""
    return float(field.coeffs[0] / _NORM)


def _logsumexp(a: np.ndarray) -> float:
    m = float(np.max(a))
    return m + float(np.log(np.sum(np.exp(a - m))))


def beckner_gap(field: ZonalField, grid: SphereGrid) -> float:
    """Slack in the sharp exponential-class inequality on S^3.

    Returns  ||u||^2_{H^{3/2},hom} / (24 pi^2)  -  log avg_{S^3} e^{u - mean u},
    which is nonnegative (up to quadrature error) for every field.
    """
    values = zonal_eval(field, grid)
    if not np.all(np.isfinite(values)):
        raise NumericalError(
            "field values overflow in the exponential average",
            detail=float(np.max(np.abs(field.coeffs))),
        )
    centered = values - field_mean(field)
    log_avg = _logsumexp(np.log(grid.weights) + centered) - np.log(SPHERE_VOLUME)
    return h32_seminorm_sq(field) / (24.0 * np.pi**2) - log_avg
