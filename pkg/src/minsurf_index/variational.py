"""Test functions built from harmonic 1-forms and the identities behind them.

Notation on a surface of revolution ``X = (r(s) Theta, z(s))``:

* ``T = (r' Theta, z')`` is the unit meridian tangent, ``nu = (-z' Theta, r')``
  the unit normal; ``S(T) = kappa_p T`` and ``S(e) = kappa_m e`` for unit
  vectors ``e`` tangent to the rotation spheres.
* For a coordinate axis ``e_a``: ``<e_a, nu> = nu_a Y_a`` and
  ``<e_a, T> = t_a Y_a`` with ``(nu_a, t_a, Y_a) = (-z', r', Theta_a)`` for
  ``a < n`` and ``(r', z', 1)`` for ``a = n``.  The tangential projection is
  ``V_a = t_a Y_a T + P_a`` where ``P_a = E_a - Theta_a Theta`` (``a < n``) is
  tangent to the rotation sphere, ``<P_a, P_b> = delta_ab - Theta_a Theta_b``,
  and ``P_n = 0``.
* A rotationally invariant harmonic 1-form ``omega = phi' ds`` is dual to
  ``xi = phi' T``; then ``nabla_T xi = phi'' T``, ``nabla_e xi = phi' (r'/r) e``
  and ``<A, nabla xi> = kappa_p phi'' + (n - 2) kappa_m phi' r'/r``.

In this representation the test function
``f_{omega,ij} = <e_i, nu><V_j, omega> - <e_j, nu><V_i, omega>`` has radial
factor ``phi' (nu_i t_j - nu_j t_i)`` and angular factor ``Y_i Y_j``.

The tensor identities checked here reduce, after the angular factor is
divided out, to relations between radial samples.  Laplacians are applied as
``Delta (rho Y) = (r^(2-n) (r^(n-2) rho')') Y + rho Delta_sphere(Y) / r^2``,
with the radial part by second-order finite differences and the sphere part
exact (``Delta Theta_i = -(n-2) Theta_i``,
``Delta (Theta_i Theta_j) = -2 (n-1) Theta_i Theta_j + 2 delta_ij``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DegenerateInputError, DomainError, IntegrabilityError, StencilError
from .fields import (
    FactorizedField,
    angular_norm,
    field_integrals,
    jacobi_residual,
    quadratic_form,
    radial_laplacian,
    trapezoid_weights,
)
from .spectral import ORDER_THRESHOLD, observed_orders

RANK_RTOL = 1e-8


# ------------------------------------------------------------ coordinate data


@dataclass(frozen=True, eq=False)
class CoordinateComponent:
    """``<e_a, nu>`` and ``<e_a, T>`` as factorized fields, for one axis ``a``."""

    a: int
    normal: FactorizedField
    tangent: FactorizedField

    @property
    def horizontal(self):
        """True when ``V_a`` has a component tangent to the rotation spheres."""
        return self.normal.angular != ()


def coordinate_projection_fields(grid):
    """Components of ``e_1, ..., e_n`` along ``nu`` and ``T`` (index ``a - 1``)."""
    n = grid.n
    out = []
    for a in range(1, n + 1):
        if a < n:
            out.append(CoordinateComponent(a, FactorizedField(grid, -grid.zp, (a,)),
                                           FactorizedField(grid, grid.rp, (a,))))
        else:
            out.append(CoordinateComponent(a, FactorizedField(grid, grid.rp, ()),
                                           FactorizedField(grid, grid.zp, ())))
    return out


@dataclass(frozen=True)
class SampleSet:
    """Sample points ``(s_k, Theta_k)``: grid indices and unit vectors in R^(n-1)."""

    indices: np.ndarray
    theta: np.ndarray
    factor: int = 1

    def __len__(self):
        return self.indices.size

    def refined(self, grid, factor):
        """The same points on ``grid`` refined by ``factor`` (index map ``k -> factor k``)."""
        if grid.is_plane:
            idx = self.indices * factor
        else:
            N0 = (grid.size - 1) // (2 * factor)
            idx = (self.indices - N0) * factor + (grid.size - 1) // 2
        return SampleSet(idx, self.theta, self.factor * factor)


def sample_set(grid, count=128, seed=0, s_limit=None):
    """``count`` seeded points with ``s`` on interior grid nodes and uniform ``Theta``."""
    rng = np.random.default_rng(seed)
    lo, hi = 1, grid.size - 2
    if s_limit is not None:
        lo = max(lo, int(np.searchsorted(grid.s, -abs(s_limit) if not grid.is_plane else 0.0)))
        hi = min(hi, int(np.searchsorted(grid.s, abs(s_limit), side="right")) - 1)
    if hi < lo:
        raise StencilError("grid too small for interior sample points")
    idx = rng.integers(lo, hi + 1, size=count)
    th = rng.standard_normal((count, grid.n - 1))
    th /= np.linalg.norm(th, axis=1, keepdims=True)
    return SampleSet(idx, th)


def _check_stencil(grid, samples):
    idx = samples.indices
    if np.any(idx < 1) or np.any(idx > grid.size - 2):
        raise StencilError("sample point within one stencil width of the grid boundary")


def projection_residuals(grid, samples):
    """Sup residuals of ``|V_a|^2 + <e_a,nu>^2 = 1`` and ``sum_a <e_a,nu>^2 = 1``."""
    idx, th = samples.indices, samples.theta
    rp, zp = grid.rp[idx], grid.zp[idx]
    n = grid.n
    split = 0.0
    total = np.zeros(len(idx))
    for a in range(1, n + 1):
        if a < n:
            Y = th[:, a - 1]
            nu, t, p2 = -zp * Y, rp * Y, 1.0 - Y**2
        else:
            nu, t, p2 = rp, zp, 0.0
        split = max(split, float(np.max(np.abs(t**2 + p2 + nu**2 - 1.0))))
        total += nu**2
    return {"tangent_normal_split": split, "normal_unit": float(np.max(np.abs(total - 1.0)))}


# ------------------------------------------------------------ local geometry


class _Local:
    """Pointwise quantities at the sample points of one grid."""

    def __init__(self, grid, omega, samples):
        _check_stencil(grid, samples)
        if omega.grid.size != grid.size:
            raise DomainError("the 1-form lives on a different grid")
        self.grid, self.samples = grid, samples
        self.n = n = grid.n
        i = samples.indices
        self.idx = i
        self.th = samples.theta
        self.r = grid.r[i]
        self.rp, self.zp = grid.rp[i], grid.zp[i]
        self.km, self.kp, self.A2 = grid.kappa_m[i], grid.kappa_p[i], grid.normsqA[i]
        self.dphi_full = np.asarray(omega.omega_radial, dtype=float)
        self.dphi = self.dphi_full[i]
        self.ddphi = np.gradient(self.dphi_full, grid.h, edge_order=2)[i]
        self.A_nabla_xi = self.kp * self.ddphi + (n - 2) * self.km * self.dphi * self.rp / self.r

    # radial profiles on the whole grid
    def nu_full(self, a):
        return -self.grid.zp if a < self.n else self.grid.rp

    def t_full(self, a):
        return self.grid.rp if a < self.n else self.grid.zp

    def nu(self, a):
        return self.nu_full(a)[self.idx]

    def t(self, a):
        return self.t_full(a)[self.idx]

    def Y(self, a):
        return self.th[:, a - 1] if a < self.n else np.ones(len(self.idx))

    def PP(self, a, b):
        """``<P_a, P_b>`` at the samples."""
        if a == self.n or b == self.n:
            return np.zeros(len(self.idx))
        return float(a == b) - self.th[:, a - 1] * self.th[:, b - 1]

    def d(self, full):
        return np.gradient(full, self.grid.h, edge_order=2)[self.idx]

    def lap_radial(self, full):
        return radial_laplacian(self.grid, full)[self.idx]

    def sphere_laplacian_Y(self, a, b=None):
        """``Delta_sphere`` of ``Y_a`` (or of ``Y_a Y_b``) at the samples."""
        n = self.n
        if b is None:
            return -(n - 2) * self.Y(a) if a < n else np.zeros(len(self.idx))
        if a == n and b == n:
            return np.zeros(len(self.idx))
        if a == n or b == n:
            return self.sphere_laplacian_Y(b if a == n else a)
        YY = self.Y(a) * self.Y(b)
        return -2.0 * (n - 1) * YY + 2.0 * float(a == b)

    def laplacian_product(self, radial_full, a, b=None):
        """``Delta (rho Y_a [Y_b])`` at the samples."""
        Y = self.Y(a) if b is None else self.Y(a) * self.Y(b)
        rho = radial_full[self.idx]
        return self.lap_radial(radial_full) * Y + rho * self.sphere_laplacian_Y(a, b) / self.r**2

    def grad_xi_term(self, b, a):
        """``<nabla_{S(V_b)} xi, V_a>``."""
        return (self.kp * self.t(b) * self.Y(b) * self.ddphi * self.t(a) * self.Y(a)
                + self.km * self.dphi * self.rp / self.r * self.PP(b, a))


def _sup(x):
    x = np.abs(np.asarray(x, dtype=float))
    return float(np.max(x)) if x.size else 0.0


# ------------------------------------------------------------- identities


def _frame_derivative(L):
    """``nabla_X V_a = <e_a, nu> S(X)`` for ``X = T`` and ``X = e``."""
    res = 0.0
    for a in range(1, L.n + 1):
        # X = T: only the T component survives (nabla_T T = 0, P_a is constant along s)
        res = max(res, _sup((L.d(L.t_full(a)) - L.nu(a) * L.kp) * L.Y(a)))
        # X = e tangent to the sphere: coefficient of e from the warped-product connection
        if a < L.n:
            lhs = (L.t(a) * L.rp - 1.0) / L.r * L.Y(a)
        else:
            lhs = L.t(a) * L.rp / L.r
        res = max(res, _sup(lhs - L.nu(a) * L.Y(a) * L.km))
    return res


def _normal_gradient(L):
    """``nabla <e_a, nu> = -S(V_a)``."""
    res = 0.0
    for a in range(1, L.n + 1):
        res = max(res, _sup((L.d(L.nu_full(a)) + L.kp * L.t(a)) * L.Y(a)))
        if a < L.n:
            # e(<e_a,nu>) = nu_a <P_a, e> / r against -kappa_m <P_a, e>
            res = max(res, _sup((L.nu(a) / L.r + L.km) * np.sqrt(L.PP(a, a))))
    return res


def _normal_jacobi(L):
    """``Delta <e_a, nu> = -|A|^2 <e_a, nu>``."""
    res = 0.0
    for a in range(1, L.n + 1):
        lhs = L.laplacian_product(L.nu_full(a), a)
        res = max(res, _sup(lhs + L.A2 * L.nu(a) * L.Y(a)))
    return res


def _projection_laplacian_terms(L, a):
    lhs = L.laplacian_product(L.dphi_full * L.t_full(a), a)
    SS = L.kp**2 * L.dphi * L.t(a) * L.Y(a)           # <S(V_a), S(xi)>
    nuA = L.nu(a) * L.Y(a) * L.A_nabla_xi            # <e_a, nu> <A, nabla xi>
    return lhs, SS, nuA


def _projection_laplacian(L, sign=1.0):
    """``Delta <V_a, xi> = -2 <S(V_a), S(xi)> + 2 <e_a, nu> <A, nabla xi>``.

    ``sign=-1`` evaluates the opposite overall sign of the right-hand side.
    """
    res = 0.0
    for a in range(1, L.n + 1):
        lhs, SS, nuA = _projection_laplacian_terms(L, a)
        res = max(res, _sup(lhs - sign * (-2.0 * SS + 2.0 * nuA)))
    return res


def _alpha(L, b, a):
    """``alpha(V_b, V_a, xi)``."""
    nub, nua = L.nu(b) * L.Y(b), L.nu(a) * L.Y(a)
    SaSxi = L.kp**2 * L.dphi * L.t(a) * L.Y(a)
    SbSxi = L.kp**2 * L.dphi * L.t(b) * L.Y(b)
    return (-2.0 * nub * SaSxi - 2.0 * nua * SbSxi
            + 2.0 * nub * nua * L.A_nabla_xi - 2.0 * L.grad_xi_term(b, a))


def _product_laplacian(L):
    """``Delta (<e_b,nu> <V_a,xi>) = -|A|^2 <e_b,nu> <V_a,xi> + alpha(V_b, V_a, xi)``."""
    res = 0.0
    for b in range(1, L.n + 1):
        for a in range(1, L.n + 1):
            radial = L.nu_full(b) * L.dphi_full * L.t_full(a)
            lhs = L.laplacian_product(radial, b, a)
            F = radial[L.idx] * L.Y(b) * L.Y(a)
            res = max(res, _sup(lhs - (-L.A2 * F + _alpha(L, b, a))))
    return res


def _test_function_laplacian(L, omega, pairs=None):
    """``Delta f_ij = -|A|^2 f_ij - 2 <nabla_{S V_i} xi, V_j> + 2 <nabla_{S V_j} xi, V_i>``."""
    n = L.n
    res = 0.0
    for i, j in pairs or itertools.combinations(range(1, n + 1), 2):
        f = _test_field(L.grid, omega, i, j)
        Y = L.Y(i) * L.Y(j)
        lhs = (L.lap_radial(f.radial) * Y
               - f.l * (f.l + n - 3) * f.radial[L.idx] * Y / L.r**2)
        rhs = (-L.A2 * f.radial[L.idx] * Y
               - 2.0 * L.grad_xi_term(i, j) + 2.0 * L.grad_xi_term(j, i))
        res = max(res, _sup(lhs - rhs))
    return res


IDENTITIES = {
    "frame_derivative": _frame_derivative,
    "normal_gradient": _normal_gradient,
    "normal_jacobi": _normal_jacobi,
    "projection_laplacian": _projection_laplacian,
    "product_laplacian": _product_laplacian,
}
LAPLACE_IDENTITY = "test_function_laplacian"

EXACT_RESIDUAL = 1e-12
ROUNDOFF_Q = 1e-10  # Q-sums below this are at the rounding floor; no order is observable


@dataclass
class IdentityResult:
    identity_id: str
    sup_residual: float
    h: float
    observed_order: float
    residuals: list
    hs: list

    @property
    def passed(self):
        return self.observed_order >= ORDER_THRESHOLD

    def to_dict(self):
        return {"identity_id": self.identity_id, "sup_residual": self.sup_residual,
                "h": self.h, "observed_order": self.observed_order}


def _grid_sequence(grid, omega, samples, refinements):
    out = [(grid, omega, samples)]
    g = grid
    for k in range(1, refinements + 1):
        g = g.refined(2)
        out.append((g, omega.rebuilt(g), samples.refined(g, 2**k)))
    return out


def _order(residuals):
    if max(residuals) <= EXACT_RESIDUAL:
        return math.inf
    orders = observed_orders([max(r, 0.0) for r in residuals])
    return float(min(orders)) if orders else math.nan


def _convergence(identity_id, seq, evaluate):
    residuals = [evaluate(g, w, smp) for g, w, smp in seq]
    hs = [g.h for g, _, _ in seq]
    return IdentityResult(identity_id, residuals[0], hs[0], _order(residuals), residuals, hs)


def lemma_identities_check(grid, omega, samples=None, refinements=2, identities=None):
    """Residuals of the five identities for coordinate projections and ``omega``.

    Each residual is measured on ``grid`` and on ``refinements`` successive
    halvings of ``h`` at the same points; the observed order comes from
    consecutive residual ratios.
    """
    samples = samples if samples is not None else sample_set(grid)
    seq = _grid_sequence(grid, omega, samples, refinements)
    out = []
    for name in identities or IDENTITIES:
        fn = IDENTITIES[name]
        out.append(_convergence(name, seq, lambda g, w, smp, fn=fn: fn(_Local(g, w, smp))))
    return out


def laplace_identity_check(grid, omega, i=None, j=None, samples=None, refinements=2):
    """Residual of ``Delta f_ij = -|A|^2 f_ij - 2<nabla_{S V_i} xi, V_j> + 2<nabla_{S V_j} xi, V_i>``.

    With ``i = j = None`` the sup runs over all pairs.
    """
    samples = samples if samples is not None else sample_set(grid)
    pairs = None if i is None else [(i, j)]
    seq = _grid_sequence(grid, omega, samples, refinements)
    return _convergence(LAPLACE_IDENTITY, seq,
                        lambda g, w, smp: _test_function_laplacian(_Local(g, w, smp), w, pairs))


def projection_laplacian_sign_check(grid, omega, samples=None):
    """Residuals of the projection-Laplacian identity with either overall sign."""
    samples = samples if samples is not None else sample_set(grid)
    L = _Local(grid, omega, samples)
    return {"minus_S_S": _projection_laplacian(L, 1.0), "plus_S_S": _projection_laplacian(L, -1.0)}


# ----------------------------------------------------------- test functions


def _tag(n, a):
    return (a,) if a < n else ()


def _test_field(grid, omega, i, j):
    n = grid.n
    if i == j:
        raise DomainError("test functions need i != j")
    if not (1 <= i <= n and 1 <= j <= n):
        raise DomainError(f"pair ({i}, {j}) out of range for n={n}")
    nu = lambda a: -grid.zp if a < n else grid.rp
    t = lambda a: grid.rp if a < n else grid.zp
    dphi = np.asarray(omega.omega_radial)
    radial = dphi * (nu(i) * t(j) - nu(j) * t(i))
    return FactorizedField(grid, radial, tuple(sorted(_tag(n, i) + _tag(n, j))))


@dataclass
class TestFunctionField:
    """``f_{omega,ij}`` with its quadratic-form data."""

    form: object
    pair: tuple
    field: FactorizedField
    q_value: float = math.nan
    jacobi_residual: float = math.nan
    l2: float = math.nan
    w12: float = math.nan
    w12_finite: bool = True

    @property
    def angular_type(self):
        return self.field.angular

    @property
    def radial_part(self):
        return self.field.radial

    __test__ = False  # not a pytest class


def _resolve_form(grid, omega):
    if omega.grid is grid or omega.grid.size == grid.size and np.array_equal(omega.grid.s, grid.s):
        return omega
    return omega.rebuilt(grid)


def test_function(grid, omega, i, j, evaluate=True):
    """``f_{omega,ij} = <e_i,nu><V_j,omega> - <e_j,nu><V_i,omega>`` in factorized form."""
    omega = _resolve_form(grid, omega)
    f = _test_field(omega.grid, omega, i, j)
    tf = TestFunctionField(omega, (i, j), f)
    if evaluate:
        w = w12_check(f)
        tf.l2, tf.w12, tf.w12_finite = w["l2"], w["w12"], w["finite"]
        if f.is_zero():
            tf.q_value, tf.jacobi_residual = 0.0, 0.0
        else:
            tf.q_value = quadratic_form(f) if w["finite"] else math.inf
            tf.jacobi_residual = jacobi_residual(f)
    return tf


test_function.__test__ = False


def w12_check(field):
    """``L^2`` norms of ``f`` and of ``grad f`` with tails; ``finite`` iff both converge."""
    f = field.field if isinstance(field, TestFunctionField) else field
    if f.is_zero():
        return {"l2": 0.0, "w12": 0.0, "finite": True}
    fi = field_integrals(f)
    l2sq = fi.l2sq + fi.tail_l2sq
    g2 = fi.gradsq + fi.tail_gradsq
    return {"l2": math.sqrt(l2sq), "w12": math.sqrt(g2),
            "finite": bool(np.isfinite(l2sq) and np.isfinite(g2))}


@dataclass
class QSum:
    total: float
    terms: dict
    residuals: dict

    def csv_rows(self):
        return [(i, j, q, self.residuals[(i, j)]) for (i, j), q in self.terms.items()]


PAIR_CSV_HEADER = ("i", "j", "Q", "residual")


def q_sum(grid, omega):
    """``sum_{i<j} Q(f_{omega,ij}, f_{omega,ij})`` with the per-pair terms (fixed pair order)."""
    if not np.isfinite(omega.l2_norm_form):
        raise IntegrabilityError("the 1-form is not L^2")
    terms, residuals = {}, {}
    total = 0.0
    for i, j in itertools.combinations(range(1, grid.n + 1), 2):
        tf = test_function(grid, omega, i, j)
        if not tf.w12_finite:
            raise IntegrabilityError(f"f_{{omega,{i}{j}}} is not in W^(1,2)")
        terms[(i, j)] = float(tf.q_value)
        residuals[(i, j)] = float(tf.jacobi_residual)
        total += tf.q_value
    return QSum(total, terms, residuals)


def q_sum_sequence(grid, omega, refinements=2):
    """``q_sum`` on ``grid`` and on ``refinements`` successive halvings of ``h``."""
    out = []
    g, w = grid, omega
    for k in range(refinements + 1):
        if k:
            g = g.refined(2)
            w = omega.rebuilt(g)
        out.append((g.h, q_sum(g, w)))
    return out


def q_sum_convergence(grid, omega, refinements=2, sequence=None):
    """``q_sum`` totals on ``grid`` and its refinements, with the observed order."""
    seq = sequence if sequence is not None else q_sum_sequence(grid, omega, refinements)
    totals = [float(q.total) for _, q in seq]
    hs = [h for h, _ in seq]
    return IdentityResult("q_sum", totals[0], hs[0], _order([abs(t) for t in totals]), totals, hs)


def richardson(coarse, fine, order=2.0):
    """Extrapolated limit from values at ``h`` and ``h/2`` with error ``~ h^order``."""
    f = 2.0 ** order
    return (f * fine - coarse) / (f - 1.0)


# ------------------------------------------------------------ projection rank


def test_function_family(grid, forms):
    """``{(i, j): [f_{omega_k, ij} for k]}`` for all pairs ``i < j``."""
    return {
        (i, j): [test_function(grid, w, i, j, evaluate=False) for w in forms]
        for i, j in itertools.combinations(range(1, grid.n + 1), 2)
    }


test_function_family.__test__ = False


def _weighted_rows(fields):
    g = fields[0].field.grid
    c = np.sqrt(trapezoid_weights(g) * g.weight)
    return np.array([c * math.sqrt(angular_norm(g.n, f.field.angular)) * f.field.radial for f in fields])


def _numerical_rank(rows):
    if rows.size == 0:
        return 0
    sv = np.linalg.svd(rows, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > RANK_RTOL * sv[0]))


@dataclass
class ProjectionRank:
    per_pair: dict
    max_rank: int
    required: int
    bound_ok: bool
    family_rank: int
    injective: bool
    h: int


def projection_rank(family):
    """Numerical ranks of ``{f_{omega_k,ij}}_k`` per pair and of the whole family."""
    pairs = sorted(family)
    if not pairs or not family[pairs[0]]:
        raise DegenerateInputError("empty family")
    h = len(family[pairs[0]])
    ref = family[pairs[0]][0].field.grid
    for p in pairs:
        if len(family[p]) != h:
            raise DomainError("every pair needs one field per form")
        for f in family[p]:
            g = f.field.grid
            if g.size != ref.size or g.n != ref.n or not np.array_equal(g.s, ref.s):
                raise DomainError("fields live on inconsistent grids")
    n = ref.n
    per_pair = {p: _numerical_rank(_weighted_rows(family[p])) for p in pairs}
    full = np.hstack([_weighted_rows(family[p]) for p in pairs])
    family_rank = _numerical_rank(full)
    max_rank = max(per_pair.values())
    required = math.ceil(Fraction(2 * h, n * (n - 1)))
    return ProjectionRank(per_pair, max_rank, required, max_rank >= required, family_rank, family_rank == h, h)
