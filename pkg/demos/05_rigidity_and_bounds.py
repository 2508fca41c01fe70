"""Curvature multiplicity, constraint counts, and the index lower bounds.

The catenoid has principal curvatures (lambda, ..., lambda, -(n-2) lambda)
everywhere; the hyperplane is umbilic.  The bounds relate the index (plus
nullity) to the number of ends and b1.

    python3 demos/05_rigidity_and_bounds.py
"""

from minsurf_index.geometry import solve_profile
from minsurf_index.rigidity import bound_report, constraint_rank, reference_tuples, rigidity_report
from minsurf_index.spectral import morse_index

grid = solve_profile(4, 1.0, 80.0, 40000)
rep = rigidity_report(grid)
print("multiplicity classes:", rep.classification.counts, "->", rep.classification.branch)
print(f"frame relation residual: {rep.frame_residuals.a_residual:.1e}")

for n in range(3, 8):
    ranks = {k: constraint_rank(t) for k, t in reference_tuples(n).items()}
    print(f"n = {n}: admissible second-order data {ranks}")

spectral = morse_index(grid, [20.0, 40.0, 80.0])
for ends in (2, 20):
    b = bound_report(4, ends, 0, spectral=spectral if ends == 2 else None,
                     index=None if ends == 2 else 1, nullity_lb=None if ends == 2 else 0)
    print(f"ends = {ends}: index {b.index} + nullity {b.nullity_lb} >= {b.rhs_index_nullity}? {b.index_nullity_ok};  "
          f"index >= {b.rhs_distinct_point}? {b.distinct_point_ok}")
