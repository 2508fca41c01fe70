"""Morse index of the Jacobi operator by spherical-harmonic mode reduction.

On a surface of revolution a field ``f = rho(s) Y(theta)`` with ``Y`` a
degree-l spherical harmonic satisfies ``(-Delta - |A|^2) f = (L_l rho) Y``
where

    L_l rho = -r^(2-n) (r^(n-2) rho')' + (l (l + n - 3) / r^2 - |A|^2) rho.

Each mode is discretized on ``[-S, S]`` with Dirichlet ends as the
generalized symmetric tridiagonal problem ``K v = lambda M v``,
``M = diag(h r^(n-2))``.  The spectrum is that of ``-Delta - |A|^2``, so
the index is the number of negative eigenvalues and ``Q(f, f) = <f, L f>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConsistencyError, DegenerateInputError, DomainError, InconclusiveError
from .fields import (
    FactorizedField,
    angular_eigenvalue,
    field_integrals,
    harmonic_multiplicity,
    jacobi_residual,
    l2_inner,
    quadratic_form,
    translation_field,
    axial_field,
    dilation_field,
)

ORDER_THRESHOLD = 1.8
EXACT_RESIDUAL = 1e-13


def representative_tag(l):
    """Angular monomial used to carry a mode-l eigenfunction."""
    return {0: (), 1: (1,), 2: (1, 2)}.get(l)


@dataclass(frozen=True, eq=False)
class ModeOperator:
    l: int
    multiplicity: int
    k_diag: np.ndarray
    k_off: np.ndarray
    m_diag: np.ndarray
    grid: object          # truncated window grid
    parent: object        # grid the window was cut from
    offset: int           # index of the window's first sample in ``parent``
    unknowns: np.ndarray  # window indices carrying degrees of freedom
    epsilon: float        # spectral floor
    bc: str = "dirichlet"

    @property
    def size(self):
        return self.k_diag.size

    @property
    def S(self):
        return self.grid.s_max

    def symmetric_tridiagonal(self):
        """Diagonal and off-diagonal of ``M^(-1/2) K M^(-1/2)``."""
        d = self.k_diag / self.m_diag
        e = self.k_off / np.sqrt(self.m_diag[:-1] * self.m_diag[1:])
        return d, e

    def dense(self):
        K = np.diag(self.k_diag) + np.diag(self.k_off, 1) + np.diag(self.k_off, -1)
        return K, np.diag(self.m_diag)

    def embed(self, v):
        """Radial samples on the parent grid of an unknown vector (zero outside)."""
        out = np.zeros(self.parent.size)
        out[self.offset + self.unknowns] = v
        if self.parent.is_plane and self.l == 0:
            out[self.offset] = v[0]  # zero-flux ghost at the axis
        return out


def spectral_floor(grid):
    """``max(10 h^2 max|A|^2, 1e-10)``: eigenvalues above ``-floor`` are not counted."""
    scale = float(np.max(grid.normsqA)) if grid.size else 0.0
    return max(10.0 * grid.h**2 * scale, 1e-10)


def build_mode_operator(grid, l, S=None):
    """Discretize mode ``l`` of ``-Delta - |A|^2`` on the window ``|s| <= S``."""
    if l < 0:
        raise DomainError("mode degree must be nonnegative")
    parent = grid
    if S is None:
        win, offset = grid, 0
    else:
        win, offset = grid.window(S)
    n, h = win.n, win.h
    w = win.weight
    wc = 0.5 * (w[1:] + w[:-1])
    lam = angular_eigenvalue(n, l)
    idx = np.arange(1, win.size - 1)
    r = win.r[idx]
    V = lam / r**2 - win.normsqA[idx]
    k_diag = (wc[idx - 1] + wc[idx]) / h + h * w[idx] * V
    if win.is_plane and l == 0:
        k_diag[0] -= wc[0] / h
    k_off = -wc[idx[:-1]] / h
    m_diag = h * w[idx]
    return ModeOperator(
        l=l,
        multiplicity=harmonic_multiplicity(n, l),
        k_diag=k_diag,
        k_off=k_off,
        m_diag=m_diag,
        grid=win,
        parent=parent,
        offset=offset,
        unknowns=idx,
        epsilon=spectral_floor(win),
    )


def _ldl_negative_pivots(d, e, shift):
    count = 0
    prev = 1.0
    e2 = (e * e).tolist()
    dl = (d + shift).tolist()
    for i, di in enumerate(dl):
        piv = di - (e2[i - 1] / prev if i else 0.0)
        if piv == 0.0:
            return None
        if piv < 0.0:
            count += 1
        prev = piv
    return count


def negative_count(op, epsilon=None, retries=4):
    """Number of generalized eigenvalues below ``-epsilon`` (Sylvester inertia).

    Counts negative pivots of the LDL^T factorization of ``T + epsilon I``
    with ``T = M^(-1/2) K M^(-1/2)``, which is congruent to ``K + epsilon M``.
    """
    eps = op.epsilon if epsilon is None else epsilon
    d, e = op.symmetric_tridiagonal()
    shift = eps
    for _ in range(retries + 1):
        count = _ldl_negative_pivots(d, e, shift)
        if count is not None:
            return count
        shift = shift * (1.0 + 1e-9) + 1e-300
    raise InconclusiveError("LDL^T breakdown persists under shift perturbation")


def dense_negative_count(op, epsilon=None):
    """Oracle: count Ritz values ``< -epsilon`` from a dense generalized eigensolve."""
    eps = op.epsilon if epsilon is None else epsilon
    K, M = op.dense()
    vals = scipy.linalg.eigh(K, M, eigvals_only=True)
    return int(np.sum(vals < -eps))


def lowest_eigenvalues(op, k=2):
    d, e = op.symmetric_tridiagonal()
    k = min(k, op.size)
    return scipy.linalg.eigvalsh_tridiagonal(d, e, select="i", select_range=(0, k - 1))


def eigenpairs(op, k=1):
    """Lowest ``k`` eigenvalues and eigenfunctions (factorized, on the parent grid)."""
    d, e = op.symmetric_tridiagonal()
    vals, vecs = scipy.linalg.eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1))
    tag = representative_tag(op.l)
    if tag is None:
        raise DomainError("eigenfunctions are only carried for modes l <= 2")
    funcs = []
    for j in range(vals.size):
        v = vecs[:, j] / np.sqrt(op.m_diag)
        funcs.append(FactorizedField(op.parent, op.embed(v), tag))
    return vals, funcs


def negative_eigenfunctions(grid, S, l_max=2):
    """All eigenfunctions with eigenvalue below the floor, modes ``l <= l_max``."""
    out = []
    for l in range(l_max + 1):
        op = build_mode_operator(grid, l, S)
        k = negative_count(op)
        if k:
            vals, funcs = eigenpairs(op, k)
            out.extend(zip(vals, funcs))
    return out


# ------------------------------------------------------------------ reports


@dataclass
class ModeRecord:
    l: int
    multiplicity: int
    negative_count: int
    lowest: list
    certified_positive: bool


@dataclass
class SweepEntry:
    S: float
    epsilon: float
    modes: list
    index_of_ball: int
    l_stop: int


@dataclass
class SpectralReport:
    n: int
    r0: float
    kind: str
    h: float
    sweep: list
    morse_index: int
    stable: bool
    nullity_lower_bound: int
    nullity_fields: list = field(default_factory=list)
    l_stop: int = 0

    def to_dict(self):
        return {
            "surface": {"n": self.n, "r0": self.r0, "kind": self.kind},
            "sweep": [
                {
                    "S": e.S,
                    "modes": [
                        {"l": m.l, "mult": m.multiplicity, "neg": m.negative_count,
                         "lowest": list(m.lowest)}
                        for m in e.modes
                    ],
                    "index_of_ball": e.index_of_ball,
                }
                for e in self.sweep
            ],
            "morse_index": self.morse_index,
            "stable": self.stable,
            "nullity_lower_bound": self.nullity_lower_bound,
            "nullity_fields": self.nullity_fields,
            "l_stop": self.l_stop,
            "tolerances": {"h": self.h, "epsilon": [e.epsilon for e in self.sweep],
                           "order_threshold": ORDER_THRESHOLD},
        }

    def csv_rows(self):
        rows = []
        for e in self.sweep:
            for m in e.modes:
                lo = list(m.lowest) + [float("nan")] * (2 - len(m.lowest))
                rows.append((e.S, m.l, lo[0], lo[1], m.negative_count))
        return rows


CSV_HEADER = ("S", "l", "lambda1", "lambda2", "neg_count")


def mode_sweep(grid, S, l_max_cap=20, epsilon=None):
    """Mode records at one truncation, stopping after two certified-positive modes."""
    modes = []
    streak = 0
    for l in range(l_max_cap + 1):
        op = build_mode_operator(grid, l, S)
        eps = op.epsilon if epsilon is None else epsilon
        neg = negative_count(op, eps)
        low = [float(x) for x in lowest_eigenvalues(op, 2)]
        pos = low[0] > eps
        modes.append(ModeRecord(l, op.multiplicity, neg, low, pos))
        streak = streak + 1 if pos else 0
        if streak == 2:
            return modes, l, eps
    raise InconclusiveError(f"no positivity certificate up to l={l_max_cap} at S={S}", partial=modes)


def morse_index(grid, S_sweep, l_max_cap=20, certify_nullity=True, epsilon=None):
    """Index of ``Sigma cap {|s| <= S}`` over a sweep of truncations.

    The Morse index is the value at the largest ``S``; ``stable`` records
    whether the last two truncations agree.  ``epsilon`` overrides the
    spectral floor of :func:`spectral_floor`.
    """
    S_sweep = [float(S) for S in S_sweep]
    if any(b <= a for a, b in zip(S_sweep, S_sweep[1:])):
        raise DomainError("S_sweep must be strictly increasing")
    entries = []
    for S in S_sweep:
        try:
            modes, l_stop, eps = mode_sweep(grid, S, l_max_cap, epsilon)
        except InconclusiveError as exc:
            exc.partial = {"completed": entries, "S": S, "modes": exc.partial}
            raise
        idx = sum(m.multiplicity * m.negative_count for m in modes)
        entries.append(SweepEntry(S, eps, modes, idx, l_stop))
    values = [e.index_of_ball for e in entries]
    if any(b < a for a, b in zip(values, values[1:])):
        raise ConsistencyError(f"index of balls decreases along the sweep: {values}")
    for e in entries:
        negs = [m.negative_count for m in e.modes]
        if any(b > a for a, b in zip(negs, negs[1:])):
            raise ConsistencyError(f"negative counts increase with l at S={e.S}: {negs}")
    stable = len(values) >= 2 and values[-1] == values[-2]
    nul, details = (nullity_lower_bound(grid) if certify_nullity else (0, []))
    return SpectralReport(
        n=grid.n, r0=grid.r0, kind=grid.kind, h=grid.h, sweep=entries,
        morse_index=values[-1], stable=stable, nullity_lower_bound=nul,
        nullity_fields=details, l_stop=entries[-1].l_stop,
    )


# ----------------------------------------------------------- Jacobi fields


@dataclass
class JacobiCertificate:
    residual_sup: float
    residuals: list
    orders: list
    is_L2: bool
    converges: bool
    certified: bool


def observed_orders(values, factor=2.0):
    out = []
    for a, b in zip(values, values[1:]):
        if a <= EXACT_RESIDUAL and b <= EXACT_RESIDUAL:
            out.append(math.inf)
        elif b == 0.0:
            out.append(math.inf)
        else:
            out.append(math.log(a / b) / math.log(factor))
    return out


def certify_jacobi_field(grid, field, refinements=2):
    """Check that a mode field solves ``J f = 0`` and whether it lies in L^2.

    ``field`` is either a :class:`FactorizedField` on ``grid`` or a callable
    ``grid -> FactorizedField``.  With a callable, the residual is measured on
    ``grid`` and on ``refinements`` successive halvings of ``h``; the field is
    certified when the residual converges at order >= 1.8 and it is L^2.
    """
    build = field if callable(field) else None
    f0 = build(grid) if build else field
    if f0.is_zero():
        raise DegenerateInputError("field is identically zero")
    residuals = [jacobi_residual(f0)]
    if build:
        g = grid
        for _ in range(refinements):
            g = g.refined(2)
            residuals.append(jacobi_residual(build(g)))
    orders = observed_orders(residuals)
    converges = bool(orders) and all(o >= ORDER_THRESHOLD for o in orders)
    is_L2 = bool(field_integrals(f0).l2_finite)
    return JacobiCertificate(residuals[0], residuals, orders, is_L2, converges, converges and is_L2)


def nullity_lower_bound(grid):
    """Certified count of L^2 Jacobi fields among the geometric candidates.

    Candidates: the horizontal translations ``<e_i, nu>`` (one mode-1 radial
    profile carrying ``n - 1`` fields), the axial translation and the dilation.
    """
    details = []
    total = 0
    if grid.is_plane:
        cert = certify_jacobi_field(grid, lambda g: FactorizedField(g, np.ones(g.size), ()))
        details.append({"field": "constant", "count": 1, "certified": cert.certified,
                        "is_L2": cert.is_L2, "residual": cert.residual_sup})
        return 0, details
    candidates = [
        ("translation_horizontal", grid.n - 1, lambda g: translation_field(g, 1)),
        ("translation_axial", 1, axial_field),
        ("dilation", 1, dilation_field),
    ]
    for name, count, build in candidates:
        cert = certify_jacobi_field(grid, build)
        if cert.certified:
            total += count
        details.append({"field": name, "count": count, "certified": cert.certified,
                        "is_L2": cert.is_L2, "residual": cert.residual_sup,
                        "orders": cert.orders})
    return total, details


# ------------------------------------------------------------ stability


@dataclass
class ComplementStability:
    projected_Q: float
    overlaps: list
    remainder: FactorizedField
    jacobi_residual: float = None


def stability_on_complement(f, eigenfunctions, tol=1e-6):
    """``Q`` of ``f`` after removing its components along the given eigenfunctions."""
    grid = f.grid
    if not eigenfunctions and not grid.is_plane:
        raise DomainError("an unstable surface needs its negative eigenfunctions")
    overlaps = [float(l2_inner(f, phi)) for phi in eigenfunctions]
    rem = f
    same = [phi for phi in eigenfunctions if phi.angular == f.angular]
    if same:
        G = np.array([[l2_inner(a, b) for b in same] for a in same])
        b = np.array([l2_inner(f, a) for a in same])
        c = np.linalg.solve(G, b)
        radial = f.radial - sum(ci * phi.radial for ci, phi in zip(c, same))
        rem = FactorizedField(grid, radial, f.angular)
    q = quadratic_form(rem)
    res = None
    if q <= tol:
        res = 0.0 if rem.is_zero() else jacobi_residual(rem)
    return ComplementStability(q, overlaps, rem, res)
