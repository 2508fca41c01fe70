"""Bounded harmonic functions and L^2 harmonic 1-forms on the catenoid.

On each truncation the rotationally invariant harmonic function with values
0 and 1 on the two boundary spheres is explicit; as S grows these converge to
a limit whose differential is the L^2 harmonic 1-form spanning the space.
For n = 3 the construction fails: the Dirichlet energy tends to zero.

    python3 demos/03_harmonic_forms.py
"""

from minsurf_index.errors import DivergenceError
from minsurf_index.geometry import solve_profile
from minsurf_index.harmonic import (
    harmonic_one_form_basis,
    height_harmonic_comparison,
    limit_harmonic,
    truncated_harmonic,
)

grid = solve_profile(4, 1.0, 80.0, 40000)
for S in (20.0, 40.0, 80.0):
    d = truncated_harmonic(grid, S)
    print(f"S = {S:4.0f}: Dirichlet energy {d.dirichlet_energy:.8f}")
lim = limit_harmonic(grid)
print(f"limit:    Dirichlet energy {lim.dirichlet_energy:.8f}")

sup, zinf = height_harmonic_comparison(grid)
print(f"the limit is (z / z_inf + 1) / 2 up to {sup:.1e}")

basis = harmonic_one_form_basis(grid)
print(f"dimension of the form space: {basis.dimension} (2 ends, b1 = 0)")

try:
    limit_harmonic(solve_profile(3, 1.0, 80.0, 8000))
except DivergenceError as exc:
    print("n = 3:", exc)
