"""Principal-curvature patterns, second-order constraint counts and index bounds.

* :func:`multiplicity_scan` classifies principal-curvature tuples by their
  equality pattern.
* :func:`constraint_rank` counts the second-order data ``(phi, grad phi,
  Hess phi)`` at a point that is compatible with ``Hess phi`` commuting with
  the shape operator (``Hess(e_i, e_j) = 0`` when ``kappa_i != kappa_j``) and
  with ``Delta phi = 0``.  The count is done by exact rational elimination.
* :func:`frame_equation_check` verifies, on a catenoid, the relation between
  the meridian connection coefficient ``r'/r`` and the derivative of the
  repeated principal curvature.
* :func:`bound_report` evaluates the two lower bounds for the index in terms
  of the number of ends and the first Betti number, as exact fractions.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .geometry import principal_curvatures

EQUALITY_TOL = 1e-6
FRAME_TOL = 1e-8

ALL_DISTINCT = "all-distinct"
UMBILIC = "umbilic-zero"
MIXED = "mixed"


def multiplicity_tag(n):
    return f"multiplicity-{n - 2}"


# --------------------------------------------------------------- patterns


def equality_classes(kappas, tol=EQUALITY_TOL):
    """Partition of indices into classes of coinciding curvatures.

    ``kappa_i`` and ``kappa_j`` coincide when ``|kappa_i - kappa_j| <= tol *
    max|kappa|``; classes are the connected components of that relation.
    """
    k = [float(x) for x in kappas]
    scale = max((abs(x) for x in k), default=0.0)
    thr = tol * scale
    parent = list(range(len(k)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(range(len(k)), 2):
        if abs(k[i] - k[j]) <= thr:
            parent[find(i)] = find(j)
    groups = {}
    for i in range(len(k)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def classify(kappas, tol=EQUALITY_TOL):
    """Tag of one tuple of ``n - 1`` principal curvatures."""
    m = len(kappas)
    n = m + 1
    sizes = sorted(len(c) for c in equality_classes(kappas, tol))
    if len(sizes) == 1:
        return UMBILIC
    if all(s == 1 for s in sizes):
        return ALL_DISTINCT
    if sizes == [1, n - 2]:
        return multiplicity_tag(n)
    return MIXED


def _check_minimal(kappas, tol):
    k = np.asarray(kappas, dtype=float)
    scale = float(np.max(np.abs(k))) if k.size else 0.0
    if abs(float(np.sum(k))) > tol * scale:
        raise DomainError(f"curvature tuple {tuple(k)} is not minimal (sum {np.sum(k):.3g})")


@dataclass
class MultiplicityScan:
    n: int
    tags: list
    counts: dict
    has_distinct_point: bool
    multiplicity_everywhere: bool
    umbilic_everywhere: bool

    @property
    def branch(self):
        """Which alternative of the rigidity trichotomy the samples point to."""
        if self.has_distinct_point:
            return "distinct-point"
        if self.umbilic_everywhere:
            return "hyperplane"
        if self.multiplicity_everywhere:
            return "catenoid"
        return "undetermined"

    def fraction(self, tag):
        return self.counts.get(tag, 0) / len(self.tags) if self.tags else 0.0

    def to_dict(self):
        return {"n": self.n, "counts": dict(self.counts), "branch": self.branch,
                "has_distinct_point": self.has_distinct_point,
                "multiplicity_everywhere": self.multiplicity_everywhere}


def multiplicity_scan(samples, tol=EQUALITY_TOL):
    """Classify each curvature tuple; ``samples`` is an ``(k, n-1)`` array or a grid."""
    if hasattr(samples, "kappa_m"):
        samples = principal_curvatures(samples)
    samples = [tuple(float(x) for x in row) for row in samples]
    if not samples:
        raise DomainError("no curvature samples")
    m = len(samples[0])
    if any(len(t) != m for t in samples):
        raise DomainError("curvature tuples have different lengths")
    n = m + 1
    for t in samples:
        _check_minimal(t, tol)
    tags = [classify(t, tol) for t in samples]
    counts = Counter(tags)
    mult = multiplicity_tag(n)
    return MultiplicityScan(
        n=n,
        tags=tags,
        counts=dict(counts),
        has_distinct_point=counts.get(ALL_DISTINCT, 0) > 0,
        multiplicity_everywhere=counts.get(mult, 0) + counts.get(UMBILIC, 0) == len(tags)
        and counts.get(mult, 0) > 0,
        umbilic_everywhere=counts.get(UMBILIC, 0) == len(tags),
    )


# --------------------------------------------------------- constraint rank


def _rational_rank(rows):
    """Rank of a matrix with Fraction entries by Gauss-Jordan elimination."""
    rows = [list(r) for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank][c]
        rows[rank] = [x / p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def constraint_system(kappas, tol=EQUALITY_TOL):
    """Variables and rational constraint rows on ``(phi, grad phi, Hess phi)``.

    Variables: ``phi``; ``phi_i`` (``i < m``); ``H_ij`` (``i <= j``), with
    ``m = n - 1``.
    """
    m = len(kappas)
    hess = [(i, j) for i in range(m) for j in range(i, m)]
    names = ["phi"] + [f"d{i + 1}" for i in range(m)] + [f"H{i + 1}{j + 1}" for i, j in hess]
    col = {p: 1 + m + k for k, p in enumerate(hess)}
    cls = equality_classes(kappas, tol)
    label = {i: c for c, members in enumerate(cls) for i in members}
    rows = []
    for i, j in hess:
        if i != j and label[i] != label[j]:
            row = [Fraction(0)] * len(names)
            row[col[(i, j)]] = Fraction(1)
            rows.append(row)
    trace = [Fraction(0)] * len(names)
    for i in range(m):
        trace[col[(i, i)]] = Fraction(1)
    rows.append(trace)
    return names, rows


def constraint_rank(kappas, tol=EQUALITY_TOL):
    """Dimension of the admissible second-order data at a point with curvatures ``kappas``."""
    names, rows = constraint_system(kappas, tol)
    return len(names) - _rational_rank(rows)


def form_constraint_rank(kappas, tol=EQUALITY_TOL):
    """The same count for 1-forms ``d phi``: the constant mode of ``phi`` drops out."""
    return constraint_rank(kappas, tol) - 1


# ---------------------------------------------------------- frame equations


@dataclass
class FrameResiduals:
    n: int
    a_residual: float
    b: float
    d: float
    lambda_level_constancy: float
    alpha_level_constancy: float
    skipped: bool = False
    umbilic: bool = False
    exact: tuple = ("b", "d", "lambda_level_constancy", "alpha_level_constancy")

    @property
    def ok(self):
        return self.skipped or self.a_residual <= FRAME_TOL

    def to_dict(self):
        return {"n": self.n, "a_residual": self.a_residual, "b": self.b, "d": self.d,
                "lambda_level_constancy": self.lambda_level_constancy,
                "alpha_level_constancy": self.alpha_level_constancy,
                "skipped": self.skipped, "umbilic": self.umbilic, "exact": list(self.exact)}


_D1_6TH = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0


def sixth_order_derivative(y, h):
    """Central sixth-order first derivative at samples ``3 .. len(y) - 4``."""
    y = np.asarray(y, dtype=float)
    k = len(_D1_6TH) // 2
    out = np.zeros(y.size - 2 * k)
    for c, off in zip(_D1_6TH, range(-k, k + 1)):
        if c:
            out += c * y[k + off: y.size - k + off]
    return out / h, slice(k, y.size - k)


def frame_equation_check(grid):
    """Residual of ``<nabla_{e_1} e_3, e_1> = -e_3(lambda) / ((n-1) lambda)``.

    ``e_3`` is the unit meridian direction and ``lambda = kappa_m`` the
    repeated principal curvature; on a surface of revolution the left side is
    ``r'/r``.  ``lambda'`` is taken by sixth-order central differences.  The
    mixed frame coefficients ``b, d`` and the variation of ``lambda`` and of
    ``r'/r`` along a level sphere vanish identically because every quantity
    depends on ``s`` alone; they are reported as exact zeros.
    """
    n = grid.n
    lam = grid.kappa_m
    if grid.is_plane or np.any(lam == 0.0):
        return FrameResiduals(n, math.nan, 0.0, 0.0, 0.0, 0.0, skipped=True, umbilic=True)
    dlam, sl = sixth_order_derivative(lam, grid.h)
    lhs = grid.rp[sl] / grid.r[sl]
    rhs = -dlam / ((n - 1) * lam[sl])
    return FrameResiduals(n, float(np.max(np.abs(lhs - rhs))), 0.0, 0.0, 0.0, 0.0)


# ------------------------------------------------------------------ reports


@dataclass
class RigidityReport:
    classification: MultiplicityScan
    constraint_rank_at: dict
    frame_residuals: FrameResiduals

    def to_dict(self):
        return {
            "classification": self.classification.to_dict(),
            "constraint_rank_at": {
                k: {"functions": v, "forms": v - 1} for k, v in self.constraint_rank_at.items()
            },
            "frame_residuals": self.frame_residuals.to_dict(),
        }


def _tuple_key(t):
    return "(" + ", ".join(f"{x + 0.0:.12g}" for x in t) + ")"


def reference_tuples(n):
    """Distinct, multiplicity-(n-2) and umbilic curvature tuples for dimension ``n``."""
    m = n - 1
    distinct = list(range(1, m)) + [-sum(range(1, m))]
    return {
        "distinct": tuple(float(x) for x in distinct),
        "multiplicity": tuple([1.0] * (n - 2) + [-(n - 2.0)]),
        "umbilic": tuple([0.0] * m),
    }


def rigidity_report(grid, tol=EQUALITY_TOL):
    scan = multiplicity_scan(grid, tol)
    ranks = {}
    k = principal_curvatures(grid)
    mid = k[grid.N] if not grid.is_plane else k[0]
    ranks[_tuple_key(mid)] = constraint_rank(mid, tol)
    for t in reference_tuples(grid.n).values():
        ranks[_tuple_key(t)] = constraint_rank(t, tol)
    return RigidityReport(scan, ranks, frame_equation_check(grid))


@dataclass(frozen=True)
class BoundReport:
    n: int
    ends: int
    b1: int
    index: int
    nullity_lb: int
    rhs_index_nullity: Fraction
    rhs_distinct_point: Fraction
    index_nullity_ok: bool
    distinct_point_ok: bool
    branch: str = "undetermined"

    def to_dict(self):
        return {
            "n": self.n, "ends": self.ends, "b1": self.b1,
            "index": self.index, "nullity_lb": self.nullity_lb,
            "rhs_index_plus_nullity": str(self.rhs_index_nullity),
            "rhs_index_distinct_point": str(self.rhs_distinct_point),
            "rhs_index_plus_nullity_float": float(self.rhs_index_nullity),
            "rhs_index_distinct_point_float": float(self.rhs_distinct_point),
            "index_plus_nullity_ok": self.index_nullity_ok,
            "index_distinct_point_ok": self.distinct_point_ok,
            "branch": self.branch,
        }


def bound_rhs(n, ends, b1):
    """``2/(n(n-1)) (ends + b1 - 1)`` and ``2/(n(n-1)) (ends + b1) - 4/n``."""
    c = Fraction(2, n * (n - 1))
    return c * (ends + b1 - 1), c * (ends + b1) - Fraction(4, n)


def bound_report(n, ends, b1, spectral=None, index=None, nullity_lb=None, branch=None):
    """Exact evaluation of both index bounds for given topology and spectral data."""
    if ends < 1:
        raise DomainError("a complete hypersurface has at least one end")
    if b1 < 0:
        raise DomainError("b1 must be nonnegative")
    if spectral is not None:
        index = spectral.morse_index if index is None else index
        nullity_lb = spectral.nullity_lower_bound if nullity_lb is None else nullity_lb
    if index is None:
        raise DomainError("an index (or a spectral report) is required")
    nullity_lb = 0 if nullity_lb is None else nullity_lb
    r11, r13 = bound_rhs(n, ends, b1)
    return BoundReport(
        n=int(n), ends=int(ends), b1=int(b1), index=int(index), nullity_lb=int(nullity_lb),
        rhs_index_nullity=r11, rhs_distinct_point=r13,
        index_nullity_ok=index + nullity_lb >= r11,
        distinct_point_ok=index >= r13,
        branch=branch or "undetermined",
    )
