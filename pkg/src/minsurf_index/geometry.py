"""Minimal hypersurfaces of revolution in R^n: the catenoid family and the plane.

A surface of revolution about the x_n axis is written as

    X(s, theta) = (r(s) * theta, z(s)),    theta in S^{n-2},

with s the arclength of the profile curve.  Minimality of the catenoid is the
first integral ``r**(n-2) * z' = r0**(n-2)`` where ``r0`` is the neck radius.
The unit normal is ``nu = (-z' theta, r')``; with this orientation the
principal curvatures are ``z'/r`` (multiplicity n-2, spherical directions)
and ``-(n-2) z'/r`` (profile direction).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicSpline
from scipy.special import gamma

from .errors import (
    AccuracyError,
    ConsistencyError,
    DivergenceError,
    DomainError,
    InsufficientRangeError,
)

CATENOID = "catenoid"
PLANE = "plane"

UNIT_SPEED_TOL = 1e-10
FIRST_INTEGRAL_TOL = 1e-8
SYMMETRY_TOL = 1e-10


def sphere_volume(k):
    """Volume of the unit sphere S^k in R^(k+1)."""
    return 2.0 * math.pi ** ((k + 1) / 2) / gamma((k + 1) / 2)


def ball_volume(k):
    """Volume of the unit ball in R^k."""
    return math.pi ** (k / 2) / gamma(k / 2 + 1)


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ProfileGrid:
    """Uniform-arclength samples of a profile curve.

    Catenoid grids cover ``[-s_max, s_max]`` with ``2N + 1`` samples.  Plane
    grids cover ``[0, s_max]`` with ``N + 1`` samples (``r = s``, ``z = 0``);
    the sample at ``s = 0`` is the axis point of the plane.
    """

    n: int
    r0: float
    h: float
    N: int
    s: np.ndarray
    r: np.ndarray
    z: np.ndarray
    rp: np.ndarray
    zp: np.ndarray
    kind: str = CATENOID

    def __post_init__(self):
        for name in ("s", "r", "z", "rp", "zp"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def s_max(self):
        return float(self.s[-1])

    @property
    def size(self):
        return self.s.size

    @property
    def is_plane(self):
        return self.kind == PLANE

    @property
    def in_theorem_regime(self):
        return 4 <= self.n <= 7

    @property
    def weight(self):
        """Radial factor ``r**(n-2)`` of the volume element."""
        return self.r ** (self.n - 2)

    @property
    def kappa_m(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            k = np.where(self.r > 0, self.zp / np.where(self.r > 0, self.r, 1.0), 0.0)
        return k

    @property
    def kappa_p(self):
        return -(self.n - 2) * self.kappa_m

    @property
    def normsqA(self):
        return (self.n - 1) * (self.n - 2) * self.kappa_m**2

    def window(self, S):
        """Sub-grid truncated at arclength ``S`` and its offset in ``self``."""
        if self.h == 0:
            raise DomainError("cannot truncate a single-sample grid")
        k = int(round(S / self.h))
        if k < 1 or abs(k * self.h - S) > 1e-9 * max(1.0, S):
            raise DomainError(f"S={S} is not a grid node (h={self.h})")
        if k > self.N:
            raise DomainError(f"S={S} exceeds the grid extent {self.s_max}")
        if self.is_plane:
            sl = slice(0, k + 1)
        else:
            sl = slice(self.N - k, self.N + k + 1)
        sub = ProfileGrid(self.n, self.r0, self.h, k, self.s[sl], self.r[sl], self.z[sl],
                          self.rp[sl], self.zp[sl], self.kind)
        return sub, sl.start

    def refined(self, factor=2):
        """The same surface sampled with ``h / factor``."""
        if self.is_plane:
            return plane_grid(self.n, self.s_max, self.N * factor)
        return solve_profile(self.n, self.r0, self.s_max, self.N * factor)

    def index_of(self, s):
        """Index of the sample at arclength ``s`` (must be a node)."""
        i = int(round((s - self.s[0]) / self.h))
        if i < 0 or i >= self.size or abs(self.s[i] - s) > 1e-9 * max(1.0, abs(s)):
            raise DomainError(f"s={s} is not a node of this grid")
        return i

    def invariant_residuals(self):
        """Sup-norm residuals of the grid invariants."""
        out = {"unit_speed": float(np.max(np.abs(self.rp**2 + self.zp**2 - 1.0)))}
        if self.is_plane:
            out["plane_r"] = float(np.max(np.abs(self.r - self.s)))
            out["plane_z"] = float(np.max(np.abs(self.z)))
            return out
        n = self.n
        out["first_integral"] = float(np.max(np.abs(self.r ** (n - 2) * self.zp - self.r0 ** (n - 2))))
        out["symmetry_r"] = float(np.max(np.abs(self.r - self.r[::-1])))
        out["symmetry_z"] = float(np.max(np.abs(self.z + self.z[::-1])))
        out["neck"] = float(max(0.0, np.max(self.r0 - self.r)))
        return out

    def check_invariants(self):
        res = self.invariant_residuals()
        limits = {"unit_speed": UNIT_SPEED_TOL, "first_integral": FIRST_INTEGRAL_TOL,
                  "symmetry_r": SYMMETRY_TOL, "symmetry_z": SYMMETRY_TOL, "neck": 0.0,
                  "plane_r": 0.0, "plane_z": 0.0}
        bad = {k: v for k, v in res.items() if v > limits[k]}
        if bad:
            raise ConsistencyError(f"profile grid violates invariants: {bad}")
        return res


def _neck_profile(n, sigma):
    """Normalised catenoid profile (r0 = 1) on the nonnegative samples ``sigma``.

    Integrates ``rho'' = (n-2) rho**(3-2n)``, obtained by differentiating the
    first integral, so the neck is a regular point; ``z'`` is then imposed
    exactly as ``rho**(2-n)``.
    """
    if sigma[-1] == 0:
        return np.ones(1), np.zeros(1), np.zeros(1)

    def rhs(_, y):
        rho, drho, _z = y
        return [drho, (n - 2) * rho ** (3 - 2 * n), rho ** (2 - n)]

    sol = integrate.solve_ivp(rhs, (0.0, sigma[-1]), [1.0, 0.0, 0.0], method="DOP853",
                              t_eval=sigma, rtol=1e-13, atol=1e-15)
    if not sol.success:
        raise ConsistencyError(f"profile integration failed: {sol.message}")
    rho, drho, zeta = sol.y
    rho[0], drho[0], zeta[0] = 1.0, 0.0, 0.0
    return rho, drho, zeta


def solve_profile(n, r0, s_max, N):
    """Catenoid profile with neck radius ``r0`` on ``[-s_max, s_max]``."""
    n = int(n)
    if n < 3:
        raise DomainError("ambient dimension must be at least 3")
    if not r0 > 0:
        raise DomainError("neck radius must be positive")
    if s_max < 0 or (s_max > 0 and N < 1):
        raise DomainError("need s_max >= 0 and N >= 1")
    if s_max == 0:
        N = 0
    N = int(N)
    h = s_max / N if N else 0.0
    # r0 = 1 solution rescaled, so r_{2 r0}(s) = 2 r_{r0}(s/2) holds sample by sample
    sigma = np.linspace(0.0, s_max / r0, N + 1)
    rho, drho, zeta = _neck_profile(n, sigma)
    half_s = sigma * r0
    s = np.concatenate([-half_s[:0:-1], half_s])
    r = r0 * np.concatenate([rho[:0:-1], rho])
    z = r0 * np.concatenate([-zeta[:0:-1], zeta])
    rp = np.concatenate([-drho[:0:-1], drho])
    zp = np.concatenate([rho[:0:-1], rho]) ** (2 - n)
    grid = ProfileGrid(n, float(r0), h, N, s, r, z, rp, zp, CATENOID)
    grid.check_invariants()
    return grid


def plane_grid(n, s_max, N):
    """The hyperplane x_n = 0 in the radial format ``r = s``, ``z = 0``."""
    n = int(n)
    if n < 3:
        raise DomainError("ambient dimension must be at least 3")
    if not s_max > 0 or N < 1:
        raise DomainError("need s_max > 0 and N >= 1")
    s = np.linspace(0.0, s_max, int(N) + 1)
    zeros = np.zeros_like(s)
    return ProfileGrid(n, 0.0, s_max / N, int(N), s, s.copy(), zeros, np.ones_like(s), zeros, PLANE)


def catenoid_rp(n, r0, r):
    """``|dr/ds|`` as a function of the radius on the catenoid."""
    return np.sqrt(1.0 - (r0 / np.asarray(r, dtype=float)) ** (2 * (n - 2)))


def radial_tail(grid, func, R=None):
    """``int_R^inf func(r) ds`` along one end, with ``ds = dr / |r'(r)|``.

    ``R`` defaults to the outermost radius of the grid.
    """
    R = float(grid.r[-1]) if R is None else float(R)
    if grid.is_plane:
        integrand = func
    else:
        n, r0 = grid.n, grid.r0

        def integrand(x):
            return func(x) / catenoid_rp(n, r0, x)

    with warnings.catch_warnings():
        # roundoff warnings at epsrel=1e-12 are expected; ``err`` is returned
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(integrand, R, np.inf, limit=200, epsabs=0.0, epsrel=1e-12)
    return val, err


@dataclass(frozen=True)
class GeometryFrame:
    kappa_m: float
    kappa_p: float
    normsqA: float
    nu_axis: float
    nu_radial_coeff: float
    weight: float


def frame_at(grid, idx):
    """Extrinsic geometry at one sample."""
    if not -grid.size <= idx < grid.size:
        raise IndexError(f"sample index {idx} out of range")
    n = grid.n
    r = float(grid.r[idx])
    if r == 0.0:
        # axis point of the plane
        return GeometryFrame(0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
    km = float(grid.zp[idx]) / r
    return GeometryFrame(
        kappa_m=km,
        kappa_p=-(n - 2) * km,
        normsqA=(n - 1) * (n - 2) * km * km,
        nu_axis=float(grid.rp[idx]),
        nu_radial_coeff=-float(grid.zp[idx]),
        weight=r ** (n - 2),
    )


def principal_curvatures(grid):
    """Array of shape ``(size, n-1)`` with the principal curvatures per sample."""
    km = grid.kappa_m
    return np.column_stack([km] * (grid.n - 2) + [grid.kappa_p])


@dataclass(frozen=True)
class TotalCurvature:
    value: float
    error_estimate: float
    tail: float


def total_curvature(grid, rtol=None):
    """``int_Sigma |A|^(n-1) dV``, composite Simpson plus an analytic tail.

    The tail beyond the grid uses the decay ``|A| <= C r^(1-n)`` with ``C``
    matched at the outermost sample.  If ``rtol`` is given and the error
    estimate exceeds ``rtol * value``, :class:`AccuracyError` is raised.
    """
    if grid.is_plane:
        return TotalCurvature(0.0, 0.0, 0.0)
    if grid.N < 2:
        raise DomainError("grid too small for Simpson quadrature")
    n = grid.n
    vol = sphere_volume(n - 2)
    A = np.sqrt(grid.normsqA)
    f = A ** (n - 1) * grid.weight
    body = integrate.simpson(f, x=grid.s)
    if grid.N % 2 == 0:
        coarse = integrate.simpson(f[::2], x=grid.s[::2])
        quad_err = abs(body - coarse) / 15.0
    else:
        quad_err = abs(body - integrate.trapezoid(f, x=grid.s))
    R = float(grid.r[-1])
    C = float(A[-1]) * R ** (n - 1)
    one_end, _ = radial_tail(grid, lambda x: C ** (n - 1) * x ** ((1 - n) * (n - 1) + n - 2))
    tail = 2.0 * one_end
    # |A| r^(n-1) -> its limit with relative corrections O((r0/r)^(2(n-2)))
    tail_err = tail * 2.0 * (grid.r0 / R) ** (2 * (n - 2)) * (n - 1)
    value = vol * (body + tail)
    est = vol * (quad_err + tail_err)
    if rtol is not None and est > rtol * abs(value):
        raise AccuracyError(f"total curvature error estimate {est:.3g} exceeds rtol", est)
    return TotalCurvature(float(value), float(est), float(vol * tail))


def height_at_infinity(grid):
    """Limit of the height ``z`` along the upper end (tail quadrature of ``z'``)."""
    if grid.is_plane:
        return 0.0
    n, r0 = grid.n, grid.r0
    if n == 3:
        raise DivergenceError("the height grows logarithmically on the 3-dimensional catenoid")
    tail, _ = radial_tail(grid, lambda x: (r0 / x) ** (n - 2))
    return float(grid.z[-1] + tail)


@dataclass(frozen=True)
class DecayFit:
    exponent_u: float
    exponent_grad: float
    limit_of_scaled_u: float
    z_inf: float
    window: tuple
    trivial: bool = False


def _loglog_slope(x, y):
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def end_asymptotics(grid):
    """Fit the decay of the upper end viewed as a graph over ``{x_n = z_inf}``.

    ``u(r) = z_inf - z(r)``; the slopes of ``log|u|`` and ``log|dz/dr|``
    against ``log r`` over the outer decade give the decay exponents.
    """
    if grid.is_plane:
        return DecayFit(float("nan"), float("nan"), 0.0, 0.0, (0.0, 0.0), trivial=True)
    n = grid.n
    z_inf = height_at_infinity(grid)
    upper = grid.s > 0
    r, z, rp, zp = grid.r[upper], grid.z[upper], grid.rp[upper], grid.zp[upper]
    r_max = float(r[-1])
    r_lo = max(r_max / 10.0, 2.0 * grid.r0)
    if r_max < 10.0 * r_lo * (1 - 1e-12):
        raise InsufficientRangeError(f"fit window [{r_lo:.3g}, {r_max:.3g}] is shorter than one decade")
    sel = r >= r_lo
    u = z_inf - z[sel]
    dzdr = zp[sel] / rp[sel]
    return DecayFit(
        exponent_u=_loglog_slope(r[sel], u),
        exponent_grad=_loglog_slope(r[sel], dzdr),
        limit_of_scaled_u=float(r_max ** (n - 3) * u[-1]),
        z_inf=z_inf,
        window=(r_lo, r_max),
    )


@dataclass(frozen=True)
class LevelSetChecks:
    R: float
    pinching_residual: float
    mu1_estimate: float
    volume_ratio: float
    curvature_decay: float
    level_radius: float


def _radius_crossing(grid, R):
    """Arclength ``s >= 0`` where ``|x(s)| = R`` on the upper half."""
    upper = grid.s >= 0
    s = grid.s[upper]
    dist2 = grid.r[upper] ** 2 + grid.z[upper] ** 2
    if R ** 2 > dist2[-1]:
        raise DomainError(f"R={R} exceeds the grid extent")
    if R ** 2 <= dist2[0]:
        raise DomainError(f"R={R} does not reach the surface")
    spline = CubicSpline(s, dist2 - R ** 2)
    j = int(np.searchsorted(dist2, R ** 2))
    return optimize.brentq(spline, s[max(j - 1, 0)], s[min(j, s.size - 1)], xtol=1e-14)


def levelset_and_volume_checks(grid, R):
    """Level-set pinching, volume ratio and scaled curvature at radius ``R``.

    The level sets of ``|x|`` are round spheres of radius ``r(s)``; the
    pinching residual is ``|1/r^2 - 1/R^2|`` on the level set ``|x| = R``.
    The volume ratio is ``Vol(Sigma cap B_R) / (omega_{n-1} R^(n-1))``.
    """
    n = grid.n
    s_R = _radius_crossing(grid, R)
    upper = grid.s >= 0
    w = CubicSpline(grid.s[upper], grid.weight[upper])
    half = w.integrate(0.0, s_R)
    ends = 1 if grid.is_plane else 2
    vol = ends * sphere_volume(n - 2) * half
    ratio = vol / (ball_volume(n - 1) * R ** (n - 1))
    r_level = float(CubicSpline(grid.s[upper], grid.r[upper])(s_R))
    pinch = abs(1.0 / r_level**2 - 1.0 / R**2)
    dist = np.hypot(grid.r, grid.z)
    outside = dist >= R
    decay = float(np.max(np.sqrt(grid.normsqA[outside]) * dist[outside])) if outside.any() else 0.0
    return LevelSetChecks(float(R), float(pinch), float(R * pinch / 2.0), float(ratio), decay, r_level)
