"""Test functions built from a harmonic 1-form, and the identities behind them.

For a harmonic 1-form omega and coordinate axes e_i, e_j,
f_ij = <e_i, nu><V_j, omega> - <e_j, nu><V_i, omega>.  On the catenoid
every f_ij is a Jacobi field, so each Q(f_ij) and their sum vanish in the
continuum; on a grid they vanish at second order.

    python3 demos/04_test_functions.py
"""

from minsurf_index.geometry import solve_profile
from minsurf_index.harmonic import harmonic_one_form_basis
from minsurf_index.variational import (
    laplace_identity_check,
    lemma_identities_check,
    projection_laplacian_sign_check,
    projection_rank,
    q_sum,
    q_sum_convergence,
    sample_set,
    test_function_family,
)

grid = solve_profile(4, 1.0, 10.0, 500)
omega = harmonic_one_form_basis(grid)[0]
samples = sample_set(grid, 128, seed=0)
print("pointwise identities (residual on the base grid, observed order under refinement):")
for r in lemma_identities_check(grid, omega, samples) + [laplace_identity_check(grid, omega, samples=samples)]:
    print(f"  {r.identity_id:24s} {r.sup_residual:.2e}  order {r.observed_order:.3f}")
print("projection Laplacian with either overall sign:", projection_laplacian_sign_check(grid, omega, samples))

grid = solve_profile(4, 1.0, 40.0, 40000)
omega = harmonic_one_form_basis(grid)[0]
qs = q_sum(grid, omega)
print("Q(f_ij):", {k: f"{v:.2e}" for k, v in qs.terms.items()})
conv = q_sum_convergence(grid, omega)
print(f"sum of Q under refinement: {[f'{t:.2e}' for t in conv.residuals]}, order {conv.observed_order:.3f}")

pr = projection_rank(test_function_family(grid, [omega]))
print(f"per-pair rank {pr.max_rank} >= required {pr.required}; omega -> (f_ij) injective: {pr.injective}")
