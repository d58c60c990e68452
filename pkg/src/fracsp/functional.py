"""Energies, gradients and the Nehari defect.

Full problem::

    I(u) = 1/2 |(-Delta)^(s/2) u|^2 + 1/2 int V(eps x) u^2 + 1/4 int phi_u u^2 - int F(u)

Limit problem (constant ``mu``, no coupling)::

    E_mu(u) = 1/2 |(-Delta)^(s/2) u|^2 + mu/2 int u^2 - int F(u)

All integrals use the lattice rectangle rule.  Gradients are ``L^2``
representatives: ``<g, v>`` is the directional derivative along ``v``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .model import ModelParams, Nonlinearity, PowerNonlinearity, potential_values
from .poisson import RieszKernel, build_kernel, solve_poisson
from .spectral import Field, GridMismatchError, GridSpec, _symbol, frac_laplacian, half_laplacian_norm_sq, inner_product

__all__ = [
    "EnergyBreakdown",
    "GradientField",
    "Problem",
    "full_problem",
    "limit_problem",
    "energy_full",
    "energy_limit",
    "gradient_full",
    "gradient_limit",
    "nehari_defect",
    "precondition",
    "dealias",
]


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    potential: float
    coupling: float
    nonlinear: float

    @property
    def total(self) -> float:
        return self.kinetic + self.potential + self.coupling - self.nonlinear

    def to_dict(self) -> dict:
        return {
            "kinetic": self.kinetic,
            "potential": self.potential,
            "coupling": self.coupling,
            "nonlinear": self.nonlinear,
            "total": self.total,
        }


@dataclass(frozen=True, eq=False)
class GradientField:
    g: Field
    context: str  # "full" or "limit(mu)"


@dataclass(frozen=True, eq=False)
class Problem:
    """Everything needed to evaluate one energy functional on one grid.

    ``V`` is the sampled potential (array), ``kernel`` is ``None`` when the
    Poisson coupling is switched off.
    """

    grid: GridSpec
    s: float
    V: np.ndarray
    nonlin: Nonlinearity
    kernel: RieszKernel | None
    mp: ModelParams | None
    label: str

    def check(self, u: Field):
        if u.grid != self.grid:
            raise GridMismatchError(f"problem on {self.grid}, field on {u.grid}")

    def phi(self, u: Field) -> np.ndarray | None:
        if self.kernel is None:
            return None
        return solve_poisson(u, self.kernel, self.mp.frac).phi.values

    def norm_sq(self, u: Field) -> float:
        """``|(-Delta)^(s/2) u|^2 + int V u^2``."""
        return half_laplacian_norm_sq(u, self.s) + self.grid.cell_volume * float(np.sum(self.V * u.values**2))

    def coupling_value(self, u: Field) -> float:
        phi = self.phi(u)
        if phi is None:
            return 0.0
        return self.grid.cell_volume * float(np.sum(phi * u.values**2))

    def energy(self, u: Field) -> EnergyBreakdown:
        self.check(u)
        dv = self.grid.cell_volume
        kin = 0.5 * half_laplacian_norm_sq(u, self.s)
        pot = 0.5 * dv * float(np.sum(self.V * u.values**2))
        cpl = 0.25 * self.coupling_value(u)
        nl = dv * float(np.sum(self.nonlin.F(u.values)))
        return EnergyBreakdown(kin, pot, cpl, nl)

    def gradient(self, u: Field) -> Field:
        self.check(u)
        vals = frac_laplacian(u, self.s).values + self.V * u.values - self.nonlin.f(u.values)
        phi = self.phi(u)
        if phi is not None:
            vals = vals + phi * u.values
        return u.like(vals)

    def defect(self, u: Field) -> float:
        """``J(u) = ||u||^2 + int phi_u u^2 - int f(u) u``."""
        dv = self.grid.cell_volume
        return self.norm_sq(u) + self.coupling_value(u) - dv * float(np.sum(self.nonlin.f(u.values) * u.values))


def full_problem(mp: ModelParams) -> Problem:
    V = potential_values(mp.potential, mp.grid, mp.frac.eps)
    kernel = build_kernel(mp.grid, mp.frac.alpha) if mp.coupling else None
    return Problem(mp.grid, mp.frac.s, V, mp.nonlin, kernel, mp, "full")


def limit_problem(grid: GridSpec, mu: float, nonlin: Nonlinearity, s: float) -> Problem:
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    V = np.full(grid.shape, float(mu))
    V.setflags(write=False)
    return Problem(grid, float(s), V, nonlin, None, None, f"limit({mu:g})")


def energy_full(u: Field, mp: ModelParams) -> EnergyBreakdown:
    return full_problem(mp).energy(u)


def energy_limit(u: Field, mu: float, nonlin: Nonlinearity, s: float) -> EnergyBreakdown:
    return limit_problem(u.grid, mu, nonlin, s).energy(u)


def gradient_full(u: Field, mp: ModelParams) -> GradientField:
    """``(-Delta)^s u + V(eps x) u + phi_u u - f(u)``."""
    return GradientField(full_problem(mp).gradient(u), "full")


def gradient_limit(u: Field, mu: float, nonlin: Nonlinearity, s: float) -> GradientField:
    p = limit_problem(u.grid, mu, nonlin, s)
    return GradientField(p.gradient(u), p.label)


def nehari_defect(u: Field, mp: ModelParams) -> float:
    return full_problem(mp).defect(u)


def precondition(g: Field, s: float, shift: float = 1.0) -> Field:
    """Spectral division ``(shift + (-Delta)^s)^(-1) g``."""
    grid = g.grid
    c = sfft.rfftn(g.values) / (shift + _symbol(grid, 2.0 * s))
    return Field(grid, sfft.irfftn(c, s=grid.shape))


def dealias(u: Field) -> Field:
    """Zero the top third of the spectrum (2/3 rule) for convergence studies."""
    grid = u.grid
    n = grid.n_per_axis
    m = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    keep1 = m < n / 3.0
    mr = m[: n // 2 + 1]
    keep_r = mr < n / 3.0
    mask = keep_r if grid.dim == 1 else keep1[:, None] & keep_r[None, :]
    c = sfft.rfftn(u.values) * mask
    return Field(grid, sfft.irfftn(c, s=grid.shape))


def growth_bound_holds(u: Field, nonlin: PowerNonlinearity) -> bool:
    """``int u_+^(q+1) <= max(u_+)^(q-1) int u^2`` on lattice samples."""
    dv = u.grid.cell_volume
    lhs = nonlin.power_integral(u.values, dv)
    rhs = float(np.max(np.maximum(u.values, 0.0))) ** (nonlin.q - 1) * dv * float(np.sum(u.values**2))
    return lhs <= rhs * (1 + 1e-14)
