"""Transfer of the sphere solution to R^3 and radial integral identities.

Stereographic projection relates the polar angle on S^3 to the Euclidean
radius through r = tan(theta/2).  A solved sphere field utilde assembles
into the Euclidean conformal factor

    u(r) = utilde(theta(r)) + (1 - mu) log(2 / (1 + r^2)) - a r^2,

differentiated exactly through the chain rule in t = cos(theta) =
(1 - r^2)/(1 + r^2).  Derivatives of the zonal series use the Gegenbauer
ladder d/dt C_k^(alpha) = 2 alpha C_{k-1}^(alpha+1).

All three-dimensional integrals of radial integrands reduce to 1-d
integrals through exact angular means over spheres |y| = s seen from
|x| = r:

    mean of log|x - y|   = log R + h(rho)/(4 rho) - 1/2,
    mean of 1/|x - y|^2  = log((1+rho)/(1-rho)) / (2 r s),

with R = max(r, s), rho = min(r, s)/R and
h(rho) = (1+rho)^2 log(1+rho) - (1-rho)^2 log(1-rho).  These closed forms
are oracle-checked against direct surface quadrature in the test suite.

Radial quadrature maps the sphere grid through r = tan(theta/2): with
t = cos(theta) the Euclidean volume element becomes dx = dV0 / (1+t)^3,
so int_0^inf h(s) s^2 ds = sum_j q_j h(s_j) with q_j = w_j / (4 pi (1+t_j)^3).
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DivergenceError, SingularInputError
from .sphere import SPHERE_VOLUME, ZonalField, build_grid, gegenbauer_series

_NORM = np.sqrt(SPHERE_VOLUME)
_EXP_CAP = 700.0  # exp argument cap; keeps curvature finite instead of inf

#: Radial window used for asymptotic fits.
TAIL_WINDOW = (1e2, 1e4)


def theta_of_r(r):
    """Polar angle of the point projecting to radius r: theta = 2 arctan r."""
    return 2.0 * np.arctan(r)


def r_of_theta(theta):
    """Inverse map, r = tan(theta/2)."""
    return np.tan(np.asarray(theta, dtype=float) / 2.0)


def log_conformal_factor(r):
    """log(2 / (1 + r^2)), the log conformal factor of the round metric."""
    r = np.asarray(r, dtype=float)
    return np.log(2.0) - np.log1p(r * r)


def spherical_solution(r, lam: float):
    """The dilated round-sphere factor log(2 lam / (1 + lam^2 r^2))."""
    if lam <= 0.0:
        raise ValueError(f"lam must be positive; got {lam}")
    r = np.asarray(r, dtype=float)
    return np.log(2.0 * lam) - np.log1p(lam**2 * r * r)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Sampled radial series (u, v, delta_u, scalar_curvature, ...)."""

    radii: np.ndarray
    series: dict

    def __post_init__(self):
        r = np.array(self.radii, dtype=float, copy=True)
        if r.ndim != 1 or r.size < 2 or r[0] <= 0.0 or np.any(np.diff(r) <= 0.0):
            raise ValueError("radii must be a strictly increasing sequence of positive reals")
        r.flags.writeable = False
        object.__setattr__(self, "radii", r)
        clean = {}
        for name, vals in self.series.items():
            v = np.array(vals, dtype=float, copy=True)
            if v.shape != r.shape:
                raise ValueError(f"series {name!r} length does not match radii")
            v.flags.writeable = False
            clean[name] = v
        object.__setattr__(self, "series", clean)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.series[name]

    def tail_mask(self) -> np.ndarray:
        return self.radii >= TAIL_WINDOW[0] * (1.0 - 1e-12)


def tail_radii(count: int = 24) -> np.ndarray:
    return np.geomspace(TAIL_WINDOW[0], TAIL_WINDOW[1], count)


def default_profile_radii() -> np.ndarray:
    """48 log-spaced body radii in [1e-2, 1e2) plus the 24 tail radii."""
    body = np.geomspace(1e-2, TAIL_WINDOW[0], 49)[:-1]
    return np.concatenate([body, tail_radii()])


def _shape_in(r):
    arr = np.asarray(r, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def _shape_out(values, scalar):
    return float(values[0]) if scalar else values


class RadialSolution:
    """Radial evaluator for an assembled Euclidean solution.

    Wraps zonal coefficients together with (mu, a) and exposes u, u', u''
    and the radial Laplacian u'' + 2 u'/r (limit 3 u''(0) at the origin).
    """

    def __init__(self, coeffs, mu: float, gaussian_a: float):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.mu = float(mu)
        self.gaussian_a = float(gaussian_a)
        # Gegenbauer derivative ladders for the zonal series in t.
        self._d1 = 2.0 * self.coeffs[1:]
        self._d2 = 8.0 * self.coeffs[2:]

    def _series(self, t):
        return gegenbauer_series(self.coeffs, 1.0, t) / _NORM

    def _series_d1(self, t):
        if self._d1.size == 0:
            return np.zeros_like(t)
        return gegenbauer_series(self._d1, 2.0, t) / _NORM

    def _series_d2(self, t):
        if self._d2.size == 0:
            return np.zeros_like(t)
        return gegenbauer_series(self._d2, 3.0, t) / _NORM

    def u(self, r):
        r, scalar = _shape_in(r)
        q = 1.0 + r * r
        t = (1.0 - r * r) / q
        vals = self._series(t) + (1.0 - self.mu) * (np.log(2.0) - np.log1p(r * r)) \
            - self.gaussian_a * r * r
        return _shape_out(vals, scalar)

    def du(self, r):
        r, scalar = _shape_in(r)
        q = 1.0 + r * r
        t = (1.0 - r * r) / q
        dt = -4.0 * r / q**2
        vals = self._series_d1(t) * dt - (1.0 - self.mu) * 2.0 * r / q \
            - 2.0 * self.gaussian_a * r
        return _shape_out(vals, scalar)

    def d2u(self, r):
        r, scalar = _shape_in(r)
        q = 1.0 + r * r
        t = (1.0 - r * r) / q
        dt = -4.0 * r / q**2
        ddt = -4.0 * (1.0 - 3.0 * r * r) / q**3
        vals = self._series_d2(t) * dt**2 + self._series_d1(t) * ddt \
            - (1.0 - self.mu) * 2.0 * (1.0 - r * r) / q**2 - 2.0 * self.gaussian_a
        return _shape_out(vals, scalar)

    def laplacian(self, r):
        r, scalar = _shape_in(r)
        vals = np.empty_like(r)
        origin = r < 1e-12
        if np.any(origin):
            vals[origin] = 3.0 * self.d2u(np.zeros(int(origin.sum())))
        rest = ~origin
        if np.any(rest):
            vals[rest] = self.d2u(r[rest]) + 2.0 * self.du(r[rest]) / r[rest]
        return _shape_out(vals, scalar)


class SphericalSolution:
    """Closed-form evaluator for the dilated round-sphere solution."""

    def __init__(self, lam: float = 1.0):
        if lam <= 0.0:
            raise ValueError("lam must be positive")
        self.lam = float(lam)
        self.mu = 0.0
        self.gaussian_a = 0.0

    def u(self, r):
        r, scalar = _shape_in(r)
        return _shape_out(spherical_solution(r, self.lam), scalar)

    def du(self, r):
        r, scalar = _shape_in(r)
        l2 = self.lam**2
        return _shape_out(-2.0 * l2 * r / (1.0 + l2 * r * r), scalar)

    def d2u(self, r):
        r, scalar = _shape_in(r)
        l2 = self.lam**2
        q = 1.0 + l2 * r * r
        return _shape_out(-2.0 * l2 * (1.0 - l2 * r * r) / q**2, scalar)

    def laplacian(self, r):
        r, scalar = _shape_in(r)
        l2 = self.lam**2
        q = 1.0 + l2 * r * r
        return _shape_out(-2.0 * l2 * (3.0 + l2 * r * r) / q**2, scalar)


def assemble_solution(field: ZonalField, mu: float, gaussian_a: float) -> RadialSolution:
    """Radial evaluator u(r) = utilde(theta(r)) + (1-mu) w_round(r) - a r^2."""
    return RadialSolution(field.coeffs, mu, gaussian_a)


def radial_quadrature(node_count: int = 512):
    """Mapped sphere-grid nodes s_j and weights q_j with
    int_0^inf h(s) s^2 ds ~= sum_j q_j h(s_j)."""
    grid = build_grid(node_count)
    t = grid.cos_theta
    s = r_of_theta(grid.theta)
    q = grid.weights / (4.0 * np.pi * (1.0 + t) ** 3)
    return s, q


def volume(u_eval, node_count: int = 512) -> float:
    """Total conformal volume int e^{3u} dx by mapped radial quadrature.

    Raises DivergenceError when the quadrature summand is still growing at
    the largest nodes (the metric then has no detectable finite volume;
    profiles decaying more slowly than r^{-2-eps} beyond the last node may
    be rejected conservatively).
    """
    s, q = radial_quadrature(node_count)
    with np.errstate(under="ignore"):
        density = np.exp(3.0 * np.asarray(u_eval.u(s), dtype=float))
    summand = 4.0 * np.pi * q * density
    tail = summand[-8:]
    if np.any(np.diff(tail) > 0.0) and tail[-1] > 1e-13 * summand.max():
        raise DivergenceError("volume integrand not decreasing past the last node")
    return float(np.sum(summand))


def normalized_volume(vol: float) -> float:
    """Volume in units of pi^2 (equals 2 for the round sphere)."""
    if vol <= 0.0:
        raise ValueError("volume must be positive")
    return vol / np.pi**2


def _log_mean_ratio(rho: np.ndarray) -> np.ndarray:
    """h(rho)/(4 rho) with the removable limit 1/2 + rho^2/6 at rho -> 0.

    On the diagonal rho = 1 the second term of h vanishes ((1-rho)^2 kills
    the log singularity), giving log 2."""
    out = np.empty_like(rho)
    small = rho < 1e-8
    out[small] = 0.5 + rho[small] ** 2 / 6.0
    rs = rho[~small]
    safe = np.where(rs < 1.0, rs, 0.0)
    h = (1.0 + rs) ** 2 * np.log1p(rs) \
        - np.where(rs < 1.0, (1.0 - rs) ** 2 * np.log1p(-safe), 0.0)
    out[~small] = h / (4.0 * rs)
    return out


def log_kernel_mean(r, s):
    """Mean of log|x - y| over the sphere |y| = s with |x| = r.

    Closed form log R + h(rho)/(4 rho) - 1/2 (R = max, rho = min/max);
    equivalent to [(r+s)^2 log(r+s) - (r-s)^2 log|r-s|]/(4 r s) - 1/2 but
    free of cancellation for r >> s or s >> r.  Limits: log s at r = 0,
    log r at s = 0, log(2s) - 1/2 on the diagonal.
    """
    r, r_scalar = _shape_in(r)
    s, s_scalar = _shape_in(s)
    r, s = np.broadcast_arrays(r, s)
    if np.any((r == 0.0) & (s == 0.0)):
        raise ValueError("log kernel mean undefined at r = s = 0")
    big = np.maximum(r, s)
    rho = np.minimum(r, s) / big
    vals = np.log(big) + _log_mean_ratio(rho) - 0.5
    return _shape_out(vals, r_scalar and s_scalar)


def inv_sq_kernel_mean(r, s):
    """Mean of 1/|x - y|^2 over the sphere |y| = s with |x| = r.

    Closed form log((r+s)/|r-s|) / (2 r s), limit 1/max(r,s)^2 as the
    smaller radius vanishes.  The diagonal r = s is a genuine (integrable)
    singularity and is rejected.
    """
    r, r_scalar = _shape_in(r)
    s, s_scalar = _shape_in(s)
    r, s = np.broadcast_arrays(r, s)
    if np.any((r == s)):
        raise SingularInputError("inverse-square kernel mean is singular at r = s")
    big = np.maximum(r, s)
    rho = np.minimum(r, s) / big
    vals = np.empty_like(rho)
    small = rho < 1e-8
    vals[small] = (1.0 + rho[small] ** 2 / 3.0) / big[small] ** 2
    rs = rho[~small]
    vals[~small] = (np.log1p(rs) - np.log1p(-rs)) / (2.0 * (r * s)[~small])
    return _shape_out(vals, r_scalar and s_scalar)


def surface_mean_oracle(kernel, r: float, s: float, n: int = 800) -> float:
    """Brute-force spherical mean (1/2) int_{-1}^{1} kernel(d(tau)) dtau.

    Gauss-Legendre in the cosine of the angle between x and y; used to
    gate the closed-form kernel means.
    """
    tau, wt = np.polynomial.legendre.leggauss(n)
    d = np.sqrt(r * r + s * s - 2.0 * r * s * tau)
    return 0.5 * float(np.sum(wt * kernel(d)))


def log_potential_values(u_eval, radii, node_count: int = 512) -> np.ndarray:
    """v(r) = (4/pi) int_0^inf [log s - L(r, s)] e^{3u(s)} s^2 ds.

    The logarithmic potential of the volume density, normalized so that
    v(0) = 0 identically.  The kernel is continuous across s = r, so the
    mapped grid quadrature applies directly.
    """
    radii, scalar = _shape_in(radii)
    s, q = radial_quadrature(node_count)
    with np.errstate(under="ignore"):
        density = np.exp(3.0 * np.asarray(u_eval.u(s), dtype=float))
    log_s = np.log(s)
    out = np.empty_like(radii)
    for i, r in enumerate(radii):
        if r == 0.0:
            out[i] = 0.0  # the kernel log(|y|/|x-y|) vanishes identically at x = 0
            continue
        kernel = log_s - log_kernel_mean(np.full_like(s, r), s)
        out[i] = 4.0 / np.pi * float(np.sum(q * kernel * density))
    return _shape_out(out, scalar)


def log_potential_profile(u_eval, radii=None, node_count: int = 512) -> RadialProfile:
    if radii is None:
        radii = default_profile_radii()
    radii = np.asarray(radii, dtype=float)
    return RadialProfile(radii, {"v": log_potential_values(u_eval, radii, node_count)})


def neg_laplacian_integral(u_eval, r: float, a_int: float, node_count: int | None = None) -> float:
    """Kernel-integral side of the second-order identity,

        (4/pi) int_0^inf Q(r, s) e^{3u(s)} s^2 ds + a_int,

    which equals -Delta u(r) for true solutions (a_int = 6 a for the
    Gaussian-constructed family, 0 for spherical ones).

    Default is adaptive quadrature split at the integrable log singularity
    s = r.  Passing node_count selects the fixed mapped-grid rule with
    singularity subtraction instead:

        int (g(s) - g(r)) Q ds + g(r) pi^2 / (4 r),   g(s) = e^{3u(s)} s^2,

    using int_0^inf Q(r, s) ds = pi^2 / (4 r); that route converges like
    the grid resolution and is kept for refinement studies.
    """
    if r < 0.0:
        raise ValueError("r must be nonnegative")
    if node_count is None:
        return _neg_laplacian_adaptive(u_eval, r, a_int)
    return _neg_laplacian_grid(u_eval, r, a_int, node_count)


def _neg_laplacian_adaptive(u_eval, r: float, a_int: float) -> float:
    def integrand(s):
        if s == 0.0:
            return 0.0
        with np.errstate(under="ignore"):
            g = np.exp(3.0 * float(u_eval.u(s))) * s * s
        return float(inv_sq_kernel_mean(r, s)) * g

    split = max(4.0 * r, 10.0)
    inner_points = [r] if 0.0 < r < split else None
    inner = quad(integrand, 0.0, split, points=inner_points,
                 limit=200, epsabs=1e-12, epsrel=1e-10)[0]
    outer = quad(integrand, split, np.inf, limit=200, epsabs=1e-12, epsrel=1e-10)[0]
    return 4.0 / np.pi * (inner + outer) + a_int


def _neg_laplacian_grid(u_eval, r: float, a_int: float, node_count: int) -> float:
    s, q = radial_quadrature(node_count)
    gap = np.min(np.abs(s - r))
    if gap < 1e-9 * max(r, 1.0):
        # diagonal collision with a quadrature node; nudge the radius
        r = r * (1.0 + 1e-6) if r > 0.0 else 1e-6
        warnings.warn(f"evaluation radius collided with a quadrature node; "
                      f"perturbed to {r!r}", stacklevel=3)
    with np.errstate(under="ignore"):
        density = np.exp(3.0 * np.asarray(u_eval.u(s), dtype=float))
    kernel = inv_sq_kernel_mean(np.full_like(s, r), s)
    if r == 0.0:
        return 4.0 / np.pi * float(np.sum(q * density * kernel)) + a_int
    with np.errstate(under="ignore"):
        g_r = np.exp(3.0 * float(u_eval.u(r))) * r * r
    core = float(np.sum(q * (density - g_r / s**2) * kernel))
    return 4.0 / np.pi * (core + g_r * np.pi**2 / (4.0 * r)) + a_int


def pohozaev_rhs(u_eval, gaussian_a: float, node_count: int = 512) -> float:
    """Scaling-identity right side (1/3 pi^2) int x . grad K e^{3w} dx.

    For K = 2 exp(-3 a |x|^2) and w = u + a |x|^2 this reduces to
    (4/(3 pi)) int_0^inf (-12 a s^2) e^{3u(s)} s^2 ds.
    """
    s, q = radial_quadrature(node_count)
    with np.errstate(under="ignore"):
        density = np.exp(3.0 * np.asarray(u_eval.u(s), dtype=float))
    return 4.0 / (3.0 * np.pi) * float(np.sum(q * (-12.0 * gaussian_a * s * s) * density))


def scalar_curvature(u_eval, r):
    """Scalar curvature of e^{2u}|dx|^2:  -2 e^{-2u} (2 Delta u + |u'|^2).

    Evaluated through logarithms so the steep non-spherical tail saturates
    at +-exp(700) instead of overflowing; the origin uses Delta u(0) =
    3 u''(0) and u'(0) = 0.
    """
    r, scalar = _shape_in(r)
    core = 2.0 * np.asarray(u_eval.laplacian(r), dtype=float) \
        + np.asarray(u_eval.du(r), dtype=float) ** 2
    uu = np.asarray(u_eval.u(r), dtype=float)
    with np.errstate(divide="ignore"):
        log_mag = np.log(2.0) - 2.0 * uu + np.log(np.abs(core))
    vals = -np.sign(core) * np.exp(np.minimum(log_mag, _EXP_CAP))
    return _shape_out(vals, scalar)


def log_neg_curvature(u_eval, r):
    """log(-R) where the curvature is negative (nan elsewhere); overflow-free.

    Used for the unbounded-decay trend check on non-spherical tails.
    """
    r, scalar = _shape_in(r)
    core = 2.0 * np.asarray(u_eval.laplacian(r), dtype=float) \
        + np.asarray(u_eval.du(r), dtype=float) ** 2
    uu = np.asarray(u_eval.u(r), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where(core > 0.0, np.log(2.0) - 2.0 * uu + np.log(np.abs(core)), np.nan)
    return _shape_out(vals, scalar)
