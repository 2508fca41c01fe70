"""Factorized scalar fields ``f(s, theta) = radial(s) * Y(theta)`` on a profile grid.

The angular factor ``Y`` is one of the monomials ``1``, ``theta_i`` or
``theta_i theta_j`` (``i != j``), which are spherical harmonics of degree 0,
1 and 2 on S^{n-2}.  Indices are 1-based, matching the coordinate axes
``e_1, ..., e_{n-1}`` orthogonal to the rotation axis.  Sphere integrals of
these monomials are tabulated exactly, so every integral below reduces to a
one-dimensional quadrature in ``s``.

Quadrature rules (all second order):

* ``int rho sigma w ds``: trapezoid over the samples;
* ``int rho' sigma' w ds``: midpoint rule per cell with
  ``w_{i+1/2} = (w_i + w_{i+1}) / 2``, or Simpson's rule on the exact
  derivative samples when a field carries them.

Beyond the grid each end is continued by a power-law tail model fitted over
the outer samples and integrated against the exact end geometry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DegenerateInputError, DomainError, IntegrabilityError
from .geometry import radial_tail, sphere_volume

TAIL_WINDOW = 0.8          # fit over r >= TAIL_WINDOW * r_max
CONVERGENCE_MARGIN = 0.02  # integrand ~ r^beta counts as integrable iff beta < -1 - margin


def mode_degree(angular):
    return len(angular)


def angular_eigenvalue(n, l):
    """``-Delta_{S^{n-2}} Y = l (l + n - 3) Y`` for a degree-l harmonic."""
    return l * (l + n - 3)


def angular_norm(n, angular):
    """``int_{S^{n-2}} Y^2`` for the monomial ``Y``."""
    vol = sphere_volume(n - 2)
    l = len(angular)
    if l == 0:
        return vol
    if l == 1:
        return vol / (n - 1)
    return vol / ((n - 1) * (n + 1))


def harmonic_multiplicity(n, l):
    """Dimension of the degree-l spherical harmonics on S^{n-2}."""
    from math import comb

    d = n - 1
    if l == 0:
        return 1
    if l == 1:
        return d
    return comb(l + d - 1, d - 1) - comb(l + d - 3, d - 1)


def evaluate_angular(angular, theta):
    """Value of the monomial at points ``theta`` (shape ``(..., n-1)``)."""
    theta = np.asarray(theta, dtype=float)
    out = np.ones(theta.shape[:-1])
    for i in angular:
        out = out * theta[..., i - 1]
    return out


def _check_tag(n, angular):
    angular = tuple(int(i) for i in angular)
    if len(angular) > 2 or any(not 1 <= i <= n - 1 for i in angular):
        raise DomainError(f"unsupported angular factor {angular} for n={n}")
    if len(angular) == 2 and angular[0] == angular[1]:
        raise DomainError("theta_i**2 is not a spherical harmonic")
    return tuple(sorted(angular))


@dataclass(frozen=True, eq=False)
class FactorizedField:
    grid: object
    radial: np.ndarray
    angular: tuple = ()
    derivative: np.ndarray = None  # exact d(radial)/ds samples, when known

    def __post_init__(self):
        for name in ("radial", "derivative"):
            a = getattr(self, name)
            if a is None:
                continue
            a = np.ascontiguousarray(a, dtype=float)
            if a.shape != self.grid.s.shape:
                raise DomainError(f"{name} samples do not match the grid")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        object.__setattr__(self, "angular", _check_tag(self.grid.n, self.angular))

    @property
    def l(self):
        return len(self.angular)

    @property
    def n(self):
        return self.grid.n

    def __neg__(self):
        return self.scaled(-1.0)

    def scaled(self, c):
        d = None if self.derivative is None else c * self.derivative
        return FactorizedField(self.grid, c * self.radial, self.angular, d)

    def is_zero(self):
        return not np.any(self.radial)


# ---------------------------------------------------------------- quadrature


def trapezoid_weights(grid):
    c = np.full(grid.size, grid.h)
    c[0] *= 0.5
    c[-1] *= 0.5
    return c


def cell_weights(grid):
    w = grid.weight
    return 0.5 * (w[1:] + w[:-1])


def _inv_r2_weight(grid):
    w = grid.weight
    r = grid.r
    out = np.zeros_like(r)
    pos = r > 0
    out[pos] = w[pos] / r[pos] ** 2
    return out


@dataclass(frozen=True)
class PowerTail:
    """``y ~ coeff * r^exponent`` along one end, beyond radius ``R``."""

    coeff: float
    exponent: float
    R: float

    @property
    def zero(self):
        return self.coeff == 0.0

    def __call__(self, r):
        return self.coeff * np.asarray(r, dtype=float) ** self.exponent


def fit_power_tail(r, y):
    """Least-squares power law through the outer samples of ``|y|``."""
    r = np.asarray(r, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    R = float(r[-1])
    if y[-1] == 0.0:
        return PowerTail(0.0, 0.0, R)
    sel = (r >= TAIL_WINDOW * R) & (y > 0)
    if sel.sum() < 3:
        pos = np.flatnonzero(y > 0)[-3:]
        sel = np.zeros_like(sel)
        sel[pos] = True
    if sel.sum() < 2:
        return PowerTail(float(y[-1]), 0.0, R)
    slope, icpt = np.polyfit(np.log(r[sel]), np.log(y[sel]), 1)
    # pin the amplitude at the outermost sample
    coeff = y[-1] / R**slope
    return PowerTail(float(coeff), float(slope), R)


def _ends(grid):
    """Sample indices of each end, ordered outward."""
    if grid.is_plane:
        return [np.arange(grid.size)]
    mid = grid.N
    return [np.arange(mid, grid.size), np.arange(mid, -1, -1)]


def _derivative(grid, y):
    return np.gradient(y, grid.h, edge_order=2)


def _tail_integral(grid, density_exponent, func):
    """``int_R^inf func(r) ds`` when the integrand decays like ``r^density_exponent``."""
    if density_exponent >= -1.0 - CONVERGENCE_MARGIN:
        return np.inf
    val, _ = radial_tail(grid, func)
    return val


@dataclass(frozen=True)
class FieldIntegrals:
    """Integrals of one field, split into grid body and tail."""

    l2sq: float
    gradsq: float
    potential: float
    tail_l2sq: float
    tail_gradsq: float
    tail_potential: float

    @property
    def l2_finite(self):
        return np.isfinite(self.tail_l2sq)

    @property
    def grad_finite(self):
        return np.isfinite(self.tail_gradsq)


def field_integrals(field):
    """Angular-weighted ``int f^2``, ``int |grad f|^2`` and ``int |A|^2 f^2``."""
    grid = field.grid
    n, l = grid.n, field.l
    rho = field.radial
    c = trapezoid_weights(grid)
    w = grid.weight
    lam = angular_eigenvalue(n, l)
    l2 = float(np.sum(c * w * rho**2))
    if field.derivative is not None and grid.size > 2:
        grad = float(integrate.simpson(field.derivative**2 * w, dx=grid.h))
    else:
        d = np.diff(rho)
        grad = float(np.sum(cell_weights(grid) * d * d) / grid.h) if grid.size > 1 else 0.0
    grad += lam * float(np.sum(c * _inv_r2_weight(grid) * rho**2))
    pot = float(np.sum(c * w * grid.normsqA * rho**2))

    t_l2 = t_grad = t_pot = 0.0
    if grid.size > 2:
        drho = _derivative(grid, rho) if field.derivative is None else field.derivative
        for idx in _ends(grid):
            r = grid.r[idx]
            f_tail = fit_power_tail(r, rho[idx])
            if f_tail.zero:
                continue
            d_tail = fit_power_tail(r, drho[idx])
            p, q = f_tail.exponent, d_tail.exponent
            m = n - 2
            t_l2 += _tail_integral(grid, 2 * p + m, lambda x: f_tail(x) ** 2 * x**m)
            if lam:
                t_grad += _tail_integral(grid, 2 * p + m - 2, lambda x: lam * f_tail(x) ** 2 * x ** (m - 2))
            if not d_tail.zero:
                t_grad += _tail_integral(grid, 2 * q + m, lambda x: d_tail(x) ** 2 * x**m)
            if not grid.is_plane:
                r0 = grid.r0
                a2 = lambda x: (n - 1) * (n - 2) * r0 ** (2 * (n - 2)) * x ** (2 - 2 * n)
                t_pot += _tail_integral(grid, 2 * p + m + 2 - 2 * n, lambda x: a2(x) * f_tail(x) ** 2 * x**m)
    norm = angular_norm(n, field.angular)
    return FieldIntegrals(norm * l2, norm * grad, norm * pot, norm * t_l2, norm * t_grad, norm * t_pot)


def l2_inner(f, g):
    """``int_Sigma f g`` for fields on the same grid (no tail)."""
    if f.grid is not g.grid and f.grid.s.shape != g.grid.s.shape:
        raise DomainError("fields live on different grids")
    if f.angular != g.angular:
        return 0.0
    c = trapezoid_weights(f.grid)
    return angular_norm(f.n, f.angular) * float(np.sum(c * f.grid.weight * f.radial * g.radial))


def quadratic_form(field):
    """``Q(f, f) = int |grad f|^2 - |A|^2 f^2`` including tails beyond the grid."""
    fi = field_integrals(field)
    if not (np.isfinite(fi.tail_gradsq) and np.isfinite(fi.tail_potential)):
        raise IntegrabilityError("Q(f, f) diverges under the tail model")
    return (fi.gradsq + fi.tail_gradsq) - (fi.potential + fi.tail_potential)


# --------------------------------------------------------------- operators


def radial_laplacian(grid, rho):
    """``r^(2-n) (r^(n-2) rho')'`` at interior samples (NaN at the two ends)."""
    h = grid.h
    wc = cell_weights(grid)
    out = np.full(grid.size, np.nan)
    flux = wc * np.diff(rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[1:-1] = (flux[1:] - flux[:-1]) / (grid.weight[1:-1] * h * h)
    return out


def jacobi_operator(field):
    """Samples of ``J f = Delta f + |A|^2 f`` (radial factor; NaN at the ends)."""
    grid = field.grid
    lam = angular_eigenvalue(grid.n, field.l)
    rho = field.radial
    with np.errstate(divide="ignore", invalid="ignore"):
        ang = np.where(grid.r > 0, lam * rho / np.where(grid.r > 0, grid.r, 1.0) ** 2, 0.0)
    return radial_laplacian(grid, rho) - ang + grid.normsqA * rho


def jacobi_residual(field):
    """``sup |J f| / sup |f|`` over interior samples."""
    sup = float(np.max(np.abs(field.radial)))
    if sup == 0.0:
        raise DegenerateInputError("field is identically zero")
    Jf = jacobi_operator(field)[1:-1]
    if field.grid.is_plane:
        Jf = Jf[1:]  # axis sample
    return float(np.max(np.abs(Jf))) / sup


# ---------------------------------------------------------- geometric fields


def translation_field(grid, i):
    """``<e_i, nu>`` for a horizontal axis ``i < n`` (mode 1) or the axis ``i = n``."""
    n = grid.n
    if i == n:
        return FactorizedField(grid, grid.rp, ())
    if not 1 <= i < n:
        raise DomainError(f"coordinate index {i} out of range")
    return FactorizedField(grid, -grid.zp, (i,))


def axial_field(grid):
    return translation_field(grid, grid.n)


def dilation_field(grid):
    """``<x, nu> = z r' - r z'`` (mode 0)."""
    return FactorizedField(grid, grid.z * grid.rp - grid.r * grid.zp, ())
