"""Bounded harmonic functions and L^2 harmonic 1-forms on the model surfaces.

A rotationally invariant function on a surface of revolution is harmonic iff
``(r^(n-2) phi')' = 0``, i.e. ``phi' = c r^(2-n)``.  The Dirichlet problem on
``|s| <= S`` with end values ``(a, b)`` is therefore solved by one quadrature

    phi(s) = a + (b - a) * int_{-S}^{s} r^(2-n) / int_{-S}^{S} r^(2-n),

and its Dirichlet energy is ``|S^{n-2}| (b - a)^2 / int_{-S}^{S} r^(2-n)``.
Letting ``S -> infinity`` gives a bounded harmonic function with finite energy
exactly when ``int r^(2-n) ds`` converges along both ends, i.e. for n >= 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .errors import DivergenceError, DomainError
from .fields import FactorizedField, field_integrals, radial_laplacian
from .geometry import height_at_infinity, radial_tail, sphere_volume


@dataclass(frozen=True, eq=False)
class HarmonicData:
    """A rotationally invariant harmonic function ``phi`` and ``omega = d phi``.

    ``grid`` is the grid the samples live on (the truncation window for a
    Dirichlet solution).  ``truncation`` is ``S`` or ``inf`` for limits.
    """

    grid: object
    phi: np.ndarray
    omega_radial: np.ndarray
    dirichlet_energy: float
    truncation: float
    end_values: tuple
    trivial: bool = False
    label: str = ""
    scale: float = 1.0

    @property
    def l2_norm_form(self):
        """``int |omega|^2``; equal to the Dirichlet energy since ``|d phi| = |grad phi|``."""
        return self.dirichlet_energy

    def scaled(self, c):
        """``c * phi`` (and ``c * omega``); end values scale with it."""
        c = float(c)
        return HarmonicData(self.grid, c * self.phi, c * self.omega_radial, c * c * self.dirichlet_energy,
                            self.truncation, tuple(c * v for v in self.end_values), self.trivial,
                            self.label, c * self.scale)

    def rebuilt(self, grid):
        """The same construction carried out on another grid of the same surface."""
        ev = tuple(v / self.scale for v in self.end_values) if self.scale else self.end_values
        if self.label == "dz":
            base = coordinate_form(grid)
        elif self.label == "zero":
            base = zero_form(grid)
        elif math.isinf(self.truncation):
            base = limit_harmonic(grid, ev)
        else:
            base = truncated_harmonic(grid, self.truncation, ev)
        if self.label and self.label != base.label:
            base = HarmonicData(base.grid, base.phi, base.omega_radial, base.dirichlet_energy, base.truncation,
                                base.end_values, base.trivial, self.label)
        return base.scaled(self.scale) if self.scale != 1.0 else base

    def as_field(self):
        return FactorizedField(self.grid, self.phi, (), self.omega_radial)

    def form_field(self):
        """Radial coefficient of ``omega`` as a mode-0 field (for quadrature)."""
        return FactorizedField(self.grid, self.omega_radial, ())

    def energy_quadrature(self):
        """``|S^{n-2}| int phi'^2 r^(n-2) ds`` by Simpson quadrature of the samples."""
        g = self.grid
        body = sphere_volume(g.n - 2) * float(integrate.simpson(self.omega_radial**2 * g.weight, dx=g.h))
        if math.isinf(self.truncation) and not self.trivial:
            # phi' = r^(2-n) / I beyond the grid
            I = self._normalizer()
            n = g.n
            tail, _ = radial_tail(g, lambda x: x ** (2 - n))
            body += sphere_volume(n - 2) * 2.0 * tail / I**2
        return body

    def _normalizer(self):
        return sphere_volume(self.grid.n - 2) * (self.end_values[1] - self.end_values[0]) ** 2 / self.dirichlet_energy

    def harmonicity_residual(self):
        """``sup |r^(2-n) (r^(n-2) phi')'|`` over interior samples."""
        lap = radial_laplacian(self.grid, self.phi)[1:-1]
        return float(np.max(np.abs(lap))) if lap.size else 0.0

    def to_dict(self):
        return {
            "S": self.truncation,
            "energy": self.dirichlet_energy,
            "l2_form_norm": self.l2_norm_form,
            "end_values": list(self.end_values),
            "trivial": self.trivial,
        }

    def csv_rows(self):
        return list(zip(self.grid.s.tolist(), self.phi.tolist(), self.omega_radial.tolist()))


CSV_HEADER = ("s", "phi", "omega_radial")


def _require_catenoid(grid):
    if grid.is_plane:
        raise DomainError("the plane has a single end; no non-constant bounded harmonic functions")


def _cumulative(grid, density):
    """``int_{s_0}^{s} density ds`` at every sample (spline antiderivative)."""
    if grid.size < 2:
        return np.zeros(grid.size)
    if grid.size < 4:
        c = np.concatenate([[0.0], np.cumsum(0.5 * grid.h * (density[1:] + density[:-1]))])
        return c
    spline = CubicSpline(grid.s, density)
    return spline.antiderivative()(grid.s) - spline.antiderivative()(grid.s[0])


def truncated_harmonic(grid, S, end_values=(0.0, 1.0)):
    """Rotationally invariant harmonic function on ``|s| <= S`` with given end values.

    ``end_values = (value at s = -S, value at s = +S)``.
    """
    _require_catenoid(grid)
    a, b = (float(v) for v in end_values)
    win, _ = grid.window(S)
    n = grid.n
    if a == b:
        const = np.full(win.size, a)
        return HarmonicData(win, const, np.zeros(win.size), 0.0, float(S), (a, b), trivial=True)
    dens = win.r ** (2 - n)
    cum = _cumulative(win, dens)
    I = float(cum[-1])
    phi = a + (b - a) * cum / I
    omega = (b - a) * dens / I
    energy = sphere_volume(n - 2) * (b - a) ** 2 / I
    return HarmonicData(win, phi, omega, energy, float(S), (a, b))


def _improper_normalizer(grid):
    n = grid.n
    if n == 3:
        raise DivergenceError(
            "int r^(2-n) ds diverges logarithmically for n = 3: "
            "bounded harmonic functions of finite Dirichlet energy need n >= 4"
        )
    dens = grid.r ** (2 - n)
    cum = _cumulative(grid, dens)
    tail, _ = radial_tail(grid, lambda x: x ** (2 - n))
    return dens, cum, tail, float(cum[-1] + 2.0 * tail)


def limit_harmonic(grid, end_values=(0.0, 1.0)):
    """The ``S -> infinity`` limit of :func:`truncated_harmonic` on the whole grid."""
    _require_catenoid(grid)
    a, b = (float(v) for v in end_values)
    dens, cum, tail, I = _improper_normalizer(grid)
    if a == b:
        return HarmonicData(grid, np.full(grid.size, a), np.zeros(grid.size), 0.0, math.inf, (a, b), trivial=True)
    phi = a + (b - a) * (tail + cum) / I
    omega = (b - a) * dens / I
    energy = sphere_volume(grid.n - 2) * (b - a) ** 2 / I
    return HarmonicData(grid, phi, omega, energy, math.inf, (a, b))


def height_harmonic_comparison(grid):
    """``sup |phi_limit - (z / z_inf + 1) / 2|`` and ``z_inf``."""
    lim = limit_harmonic(grid)
    zinf = height_at_infinity(grid)
    return float(np.max(np.abs(lim.phi - (grid.z / zinf + 1.0) / 2.0))), zinf


def end_functions(grid, S=None):
    """The ``k`` end functions ``f_i`` (``f_i -> 1`` on end ``i``, ``0`` elsewhere).

    Ends are labelled by the sign of ``s``: end 1 is ``s -> -inf``, end 2 is
    ``s -> +inf``.  With ``S=None`` the limit functions are returned.
    """
    if grid.is_plane:
        return [HarmonicData(grid, np.ones(grid.size), np.zeros(grid.size), 0.0, math.inf, (1.0,), trivial=True)]
    build = limit_harmonic if S is None else (lambda g, ev: truncated_harmonic(g, S, ev))
    return [build(grid, (1.0, 0.0)), build(grid, (0.0, 1.0))]


def coordinate_form(grid):
    """The height function ``z`` and ``omega = dz`` (harmonic: coordinates of a minimal immersion)."""
    n = grid.n
    if grid.is_plane:
        z = np.zeros(grid.size)
        return HarmonicData(grid, z, z.copy(), 0.0, math.inf, (0.0, 0.0), trivial=True, label="dz")
    if n == 3:
        raise DivergenceError("dz is not L^2 on the 3-dimensional catenoid")
    _, _, _, I = _improper_normalizer(grid)
    zinf = height_at_infinity(grid)
    # z' = r0^(n-2) r^(2-n), so int |dz|^2 = |S| r0^(2(n-2)) I
    energy = sphere_volume(n - 2) * grid.r0 ** (2 * (n - 2)) * I
    return HarmonicData(grid, grid.z.copy(), grid.zp.copy(), energy, math.inf, (-zinf, zinf), label="dz")


def zero_form(grid):
    """The zero 1-form (``phi = 0``)."""
    z = np.zeros(grid.size)
    return HarmonicData(grid, z, z.copy(), 0.0, math.inf, (0.0, 0.0), trivial=True, label="zero")


@dataclass
class OneFormBasis:
    """L^2 harmonic 1-forms from end functions: ``dim = k + b1 - 1``."""

    forms: list
    ends: int
    b1: int = 0
    function_count: int = field(init=False)

    def __post_init__(self):
        self.function_count = self.ends

    @property
    def dimension(self):
        return self.ends + self.b1 - 1

    def __len__(self):
        return len(self.forms)

    def __iter__(self):
        return iter(self.forms)

    def __getitem__(self, i):
        return self.forms[i]


def harmonic_one_form_basis(grid):
    """Basis ``[d phi_limit]`` on the catenoid, empty on the plane."""
    if grid.is_plane:
        return OneFormBasis([], ends=1)
    lim = limit_harmonic(grid)
    lim = HarmonicData(lim.grid, lim.phi, lim.omega_radial, lim.dirichlet_energy, lim.truncation,
                       lim.end_values, label="dphi_limit")
    return OneFormBasis([lim], ends=2)


def energy_cross_check(data):
    """Dirichlet energy from the closed form, and from the generic field quadrature."""
    fi = field_integrals(data.as_field())
    return data.dirichlet_energy, float(fi.gradsq + fi.tail_gradsq)
