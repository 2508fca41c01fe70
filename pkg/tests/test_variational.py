import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minsurf_index.errors import DegenerateInputError, DomainError, StencilError
from minsurf_index.geometry import plane_grid, solve_profile
from minsurf_index.harmonic import coordinate_form, harmonic_one_form_basis, truncated_harmonic, zero_form
from minsurf_index.fields import evaluate_angular
from minsurf_index.variational import (
    IDENTITIES,
    LAPLACE_IDENTITY,
    SampleSet,
    coordinate_projection_fields,
    laplace_identity_check,
    lemma_identities_check,
    projection_laplacian_sign_check,
    projection_rank,
    projection_residuals,
    q_sum,
    q_sum_convergence,
    richardson,
    sample_set,
    test_function,
    test_function_family,
    w12_check,
)


@pytest.fixture(scope="module")
def g4():
    return solve_profile(4, 1.0, 10.0, 500)


@pytest.fixture(scope="module")
def form4(g4):
    return harmonic_one_form_basis(g4)[0]


def cartesian_test_function(grid, omega, k, theta, i, j):
    """Independent evaluation in R^n: f = <e_i,nu><V_j,xi> - <e_j,nu><V_i,xi> at (s_k, theta)."""
    n = grid.n
    nu = np.append(-grid.zp[k] * theta, grid.rp[k])
    T = np.append(grid.rp[k] * theta, grid.zp[k])
    xi = omega.omega_radial[k] * T
    E = np.eye(n)

    def V(a):
        return E[a - 1] - (E[a - 1] @ nu) * nu

    return (E[i - 1] @ nu) * (V(j) @ xi) - (E[j - 1] @ nu) * (V(i) @ xi)


@pytest.mark.parametrize("n", [4, 5])
def test_test_function_matches_cartesian(n):
    g = solve_profile(n, 1.0, 6.0, 300)
    w = harmonic_one_form_basis(g)[0]
    smp = sample_set(g, 40, seed=3)
    for i, j in itertools.permutations(range(1, n + 1), 2):
        f = test_function(g, w, i, j, evaluate=False).field
        ang = evaluate_angular(f.angular, smp.theta)
        for k, th, a in zip(smp.indices, smp.theta, ang):
            assert f.radial[k] * a == pytest.approx(cartesian_test_function(g, w, k, th, i, j), abs=1e-13)


def test_projection_residuals(g4):
    res = projection_residuals(g4, sample_set(g4, 64))
    assert res["tangent_normal_split"] < 1e-12 and res["normal_unit"] < 1e-12


def test_coordinate_fields(g4):
    comps = coordinate_projection_fields(g4)
    assert len(comps) == 4 and [c.horizontal for c in comps] == [True, True, True, False]


def test_sample_set_deterministic(g4):
    a, b = sample_set(g4, 128, seed=7), sample_set(g4, 128, seed=7)
    assert np.array_equal(a.indices, b.indices) and np.array_equal(a.theta, b.theta)
    np.testing.assert_allclose(np.linalg.norm(a.theta, axis=1), 1.0)
    assert not np.array_equal(a.indices, sample_set(g4, 128, seed=8).indices)


def test_stencil_error(g4, form4):
    bad = SampleSet(np.array([0]), np.array([[1.0, 0.0, 0.0]]))
    with pytest.raises(StencilError):
        lemma_identities_check(g4, form4, bad)


@pytest.mark.parametrize("n", [4, 5])
def test_identity_orders(n):
    g = solve_profile(n, 1.0, 10.0, 500)
    w = harmonic_one_form_basis(g)[0]
    smp = sample_set(g, 128, seed=0)
    results = lemma_identities_check(g, w, smp) + [laplace_identity_check(g, w, samples=smp)]
    assert {r.identity_id for r in results} == set(IDENTITIES) | {LAPLACE_IDENTITY}
    for r in results:
        assert r.observed_order >= 1.8, r
        assert r.residuals[-1] < r.residuals[0] or r.residuals[0] <= 1e-12


def test_identities_on_plane():
    g = plane_grid(4, 10.0, 500)
    for r in lemma_identities_check(g, zero_form(g)):
        assert r.sup_residual <= 1e-12


def test_projection_laplacian_sign(g4, form4):
    res = projection_laplacian_sign_check(g4, form4)
    assert res["minus_S_S"] < 1e-2 < 1.0 < res["plus_S_S"]


def test_closed_form_reduction():
    g = solve_profile(5, 1.0, 20.0, 2000)
    dz = coordinate_form(g)
    comps = coordinate_projection_fields(g)
    for i in range(1, 5):
        f = test_function(g, dz, i, 5, evaluate=False).field
        assert np.max(np.abs(f.radial - comps[i - 1].normal.radial)) <= 1e-10
        assert f.angular == comps[i - 1].normal.angular
        for j in range(i + 1, 5):
            assert np.max(np.abs(test_function(g, dz, i, j, evaluate=False).field.radial)) <= 1e-12


@settings(max_examples=20, deadline=None)
@given(pair=st.permutations([1, 2, 3, 4]))
def test_antisymmetry(pair):
    g = solve_profile(4, 1.0, 5.0, 100)
    w = truncated_harmonic(g, 5.0)
    i, j = pair[:2]
    f = test_function(g, w, i, j, evaluate=False).field
    fT = test_function(g, w, j, i, evaluate=False).field
    assert np.array_equal(f.radial, -fT.radial) and f.angular == fT.angular


def test_pair_validation(g4, form4):
    with pytest.raises(DomainError):
        test_function(g4, form4, 2, 2)
    with pytest.raises(DomainError):
        test_function(g4, form4, 1, 5)


def test_w12():
    g = solve_profile(4, 1.0, 40.0, 4000)
    tf = test_function(g, coordinate_form(g), 1, 4)
    assert tf.w12_finite and np.isfinite(tf.l2) and np.isfinite(tf.w12)
    assert w12_check(test_function(g, zero_form(g), 1, 2))["finite"]


def test_q_sum_small_and_converging():
    g = solve_profile(4, 1.0, 20.0, 5000)
    w = harmonic_one_form_basis(g)[0]
    conv = q_sum_convergence(g, w)
    assert conv.observed_order >= 1.8
    assert abs(richardson(*conv.residuals[-2:])) < 0.05 * abs(conv.residuals[-1])


def test_q_sum_bilinear(g4, form4):
    a = q_sum(g4, form4)
    b = q_sum(g4, form4.scaled(2.0))
    assert b.total == pytest.approx(4.0 * a.total, rel=1e-12)
    assert set(a.terms) == set(itertools.combinations(range(1, 5), 2))


def test_q_sum_zero_form(g4):
    assert q_sum(g4, zero_form(g4)).total == 0.0


def test_projection_rank(g4, form4):
    pr = projection_rank(test_function_family(g4, [form4]))
    assert pr.max_rank == 1 and pr.required == 1 and pr.bound_ok and pr.injective
    dup = projection_rank(test_function_family(g4, [form4, form4.scaled(-3.0)]))
    assert dup.family_rank == 1 and not dup.injective
    zero = projection_rank(test_function_family(g4, [zero_form(g4)]))
    assert zero.max_rank == 0 and not zero.injective
    with pytest.raises(DegenerateInputError):
        projection_rank(test_function_family(g4, []))
