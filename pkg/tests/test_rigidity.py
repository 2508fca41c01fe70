import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from minsurf_index.errors import DomainError
from minsurf_index.geometry import plane_grid, principal_curvatures, solve_profile
from minsurf_index.rigidity import (
    ALL_DISTINCT,
    MIXED,
    UMBILIC,
    bound_report,
    bound_rhs,
    classify,
    constraint_rank,
    form_constraint_rank,
    frame_equation_check,
    multiplicity_scan,
    multiplicity_tag,
    reference_tuples,
    rigidity_report,
)


def commutator_oracle(kappas):
    """1 + m + dim{H symmetric : [H, diag(kappa)] = 0, tr H = 0}, by SVD."""
    k = np.asarray(kappas, dtype=float)
    m = k.size
    K = np.diag(k)
    basis = []
    for i, j in itertools.combinations_with_replacement(range(m), 2):
        E = np.zeros((m, m))
        E[i, j] = E[j, i] = 1.0
        basis.append(E)
    rows = np.array([np.append((B @ K - K @ B).ravel(), np.trace(B)) for B in basis]).T
    scale = max(1.0, float(np.max(np.abs(k))))
    rank = np.linalg.matrix_rank(rows, tol=1e-9 * scale)
    return 1 + m + len(basis) - rank


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_reference_ranks(n):
    m = n - 1
    refs = reference_tuples(n)
    assert constraint_rank(refs["distinct"]) == 2 * m
    assert constraint_rank(refs["multiplicity"]) == 2 * m + (n - 2) * (n - 3) // 2
    assert constraint_rank(refs["umbilic"]) == 2 * m + m * (m - 1) // 2
    for t in refs.values():
        assert constraint_rank(t) == commutator_oracle(t)
        assert form_constraint_rank(t) == constraint_rank(t) - 1


def test_n4_values():
    assert constraint_rank((1.0, 1.0, -2.0)) == 7
    assert constraint_rank((0.0, 0.0, 0.0)) == 9


patterns = st.lists(st.integers(0, 3), min_size=2, max_size=6)


@settings(max_examples=100, deadline=None)
@given(labels=patterns, values=st.lists(st.integers(-9, 9), min_size=4, max_size=4),
       perm_seed=st.integers(0, 10**6), scale=st.floats(0.01, 100.0))
def test_rank_matches_oracle_and_is_invariant(labels, values, perm_seed, scale):
    k = [float(values[c]) for c in labels]
    assume(len(set(values)) == len(values))
    r = constraint_rank(k)
    assert r == commutator_oracle(k)
    perm = np.random.default_rng(perm_seed).permutation(len(k))
    assert constraint_rank([k[p] for p in perm]) == r
    assert constraint_rank([scale * x for x in k]) == r


def test_classify():
    assert classify((1.0, 2.0, -3.0)) == ALL_DISTINCT
    assert classify((1.0, 1.0, -2.0)) == multiplicity_tag(4)
    assert classify((0.0, 0.0, 0.0)) == UMBILIC
    assert classify((1.0, 1.0, -1.0, -1.0)) == MIXED
    assert classify((1.0, 1.0 + 1e-9, -2.0 - 1e-9)) == multiplicity_tag(4)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_catenoid_scan(n):
    g = solve_profile(n, 1.0, 20.0, 2000)
    scan = multiplicity_scan(g)
    assert scan.fraction(multiplicity_tag(n)) == 1.0
    assert scan.branch == "catenoid" and not scan.has_distinct_point


def test_plane_scan():
    scan = multiplicity_scan(plane_grid(5, 10, 100))
    assert scan.fraction(UMBILIC) == 1.0 and scan.branch == "hyperplane"


def test_distinct_branch():
    scan = multiplicity_scan(np.array([[1.0, 2.0, -3.0], [1.0, 1.0, -2.0]]))
    assert scan.branch == "distinct-point"


def test_non_minimal_rejected():
    with pytest.raises(DomainError):
        multiplicity_scan(np.array([[1.0, 1.0, 1.0]]))
    with pytest.raises(DomainError):
        multiplicity_scan(np.zeros((0, 3)))


@pytest.mark.parametrize("n", [4, 5, 7])
def test_frame_relation(n):
    fr = frame_equation_check(solve_profile(n, 1.0, 20.0, 4000))
    assert fr.a_residual <= 1e-8 and fr.ok
    assert frame_equation_check(plane_grid(n, 10, 100)).skipped


def test_rigidity_report_keys():
    rep = rigidity_report(solve_profile(4, 1.0, 10.0, 500)).to_dict()
    ranks = rep["constraint_rank_at"]
    assert ranks["(1, 1, -2)"]["functions"] == 7
    assert ranks["(0, 0, 0)"]["functions"] == 9
    assert ranks["(1, 2, -3)"]["functions"] == 6


def test_bounds_catenoid_and_plane():
    br = bound_report(4, 2, 0, index=1, nullity_lb=3)
    assert br.rhs_index_nullity == Fraction(1, 6) and br.rhs_distinct_point == Fraction(-2, 3)
    assert br.index_nullity_ok and br.distinct_point_ok
    d = br.to_dict()
    assert d["rhs_index_plus_nullity"] == "1/6" and d["rhs_index_distinct_point"] == "-2/3"
    pl = bound_report(4, 1, 0, index=0, nullity_lb=0)
    assert pl.index_nullity_ok and pl.distinct_point_ok and pl.rhs_index_nullity == 0


def test_bound_violation_detected():
    bad = bound_report(4, 20, 0, index=1, nullity_lb=0)
    assert bad.rhs_index_nullity == Fraction(19, 6) and not bad.index_nullity_ok


@given(n=st.integers(3, 12), ends=st.integers(1, 500), b1=st.integers(0, 50))
def test_bound_rhs_exact(n, ends, b1):
    a, b = bound_rhs(n, ends, b1)
    assert a == Fraction(2 * (ends + b1 - 1), n * (n - 1))
    assert b == a + Fraction(2, n * (n - 1)) - Fraction(4, n)


def test_bound_validation():
    with pytest.raises(DomainError):
        bound_report(4, 0, 0, index=1)
    with pytest.raises(DomainError):
        bound_report(4, 2, -1, index=1)
    with pytest.raises(DomainError):
        bound_report(4, 2, 0)


def test_catenoid_curvature_tuple_rank():
    g = solve_profile(4, 1.0, 10.0, 500)
    k = principal_curvatures(g)
    assert all(constraint_rank(k[i]) == 7 for i in range(0, g.size, 50))
