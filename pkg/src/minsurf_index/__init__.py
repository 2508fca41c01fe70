"""Morse index, harmonic 1-form test functions and rigidity checks for
rotationally symmetric minimal hypersurfaces (catenoids and hyperplanes).

Modules:

* :mod:`~minsurf_index.geometry` -- profile curves, curvature, asymptotics
* :mod:`~minsurf_index.spectral` -- mode-by-mode Jacobi spectrum and Morse index
* :mod:`~minsurf_index.harmonic` -- bounded harmonic functions and L^2 harmonic 1-forms
* :mod:`~minsurf_index.variational` -- test functions, pointwise identities, Q-sums
* :mod:`~minsurf_index.rigidity` -- curvature multiplicity, constraint ranks, index bounds
* :mod:`~minsurf_index.cli` -- the ``minsurf-index`` command line
"""

from .config import RunConfig
from .errors import (
    AccuracyError,
    ConsistencyError,
    DegenerateInputError,
    DivergenceError,
    DomainError,
    InconclusiveError,
    InsufficientRangeError,
    IntegrabilityError,
    MinsurfError,
    StencilError,
)
from .geometry import (
    CATENOID,
    PLANE,
    ProfileGrid,
    end_asymptotics,
    height_at_infinity,
    levelset_and_volume_checks,
    plane_grid,
    principal_curvatures,
    solve_profile,
    total_curvature,
)
from .harmonic import harmonic_one_form_basis, limit_harmonic, truncated_harmonic
from .rigidity import bound_report, constraint_rank, multiplicity_scan, rigidity_report
from .spectral import build_mode_operator, dense_negative_count, morse_index, negative_count
from .variational import lemma_identities_check, projection_rank, q_sum

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "CATENOID", "ConsistencyError", "DegenerateInputError", "DivergenceError",
    "DomainError", "InconclusiveError", "InsufficientRangeError", "IntegrabilityError",
    "MinsurfError", "PLANE", "ProfileGrid", "RunConfig", "StencilError", "bound_report",
    "build_mode_operator", "constraint_rank", "dense_negative_count", "end_asymptotics",
    "harmonic_one_form_basis", "height_at_infinity", "lemma_identities_check",
    "levelset_and_volume_checks", "limit_harmonic", "morse_index", "multiplicity_scan",
    "negative_count", "plane_grid", "principal_curvatures", "projection_rank", "q_sum",
    "rigidity_report", "solve_profile", "total_curvature", "truncated_harmonic",
]
