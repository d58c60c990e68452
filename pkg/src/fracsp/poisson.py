"""Free-space Riesz potential ``phi = eps^(alpha-theta) |x|^(alpha-N) * u^2``.

The convolution is linear (not periodic): sources are zero-padded to a
``(2n)^dim`` lattice and multiplied against the sampled kernel there.  The
singular origin sample is replaced by the cell average of ``|x|^(alpha-N)``,
which keeps every kernel entry finite and positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as sfft

from .model import FracParams, riesz_gamma
from .spectral import Field, GridMismatchError, GridSpec, check_same_grid, inner_product

__all__ = [
    "RieszKernel",
    "PoissonSolution",
    "origin_cell_average",
    "build_kernel",
    "solve_poisson",
    "solve_poisson_pair",
    "coupling_A",
    "strong_residual",
]


def origin_cell_average(dim: int, alpha: float, h: float) -> float:
    """Mean of ``|x|^(alpha - dim)`` over the cell at the origin.

    1D integrates exactly over ``[-h/2, h/2]``; 2D uses the disk of equal
    area (radius ``h / sqrt(pi)``).
    """
    if dim == 1:
        return (2.0 / alpha) * (0.5 * h) ** alpha / h
    r_e = h / math.sqrt(math.pi)
    return (2.0 * math.pi / alpha) * r_e**alpha / h**2


@dataclass(frozen=True, eq=False)
class RieszKernel:
    grid: GridSpec
    alpha: float
    samples: np.ndarray  # |x|^(alpha-N) on the padded lattice, FFT order
    origin_value: float
    spectrum: np.ndarray  # rfftn of samples

    @property
    def padded_shape(self) -> tuple[int, ...]:
        return (2 * self.grid.n_per_axis,) * self.grid.dim


@lru_cache(maxsize=32)
def _kernel(grid: GridSpec, alpha: float) -> RieszKernel:
    N, n, h = grid.dim, grid.n_per_axis, grid.spacing
    if not 0 < alpha < N:
        raise ValueError(f"Riesz kernel needs 0 < alpha < N, got alpha={alpha}, N={N}")
    m = np.fft.fftfreq(2 * n, d=1.0 / (2 * n))  # integer offsets, FFT order
    axes = np.meshgrid(*([m * h] * N), indexing="ij")
    r = np.sqrt(sum(a**2 for a in axes))
    K = np.empty_like(r)
    nz = r > 0
    K[nz] = r[nz] ** (alpha - N)
    c0 = origin_cell_average(N, alpha, h)
    K[~nz] = c0
    K.setflags(write=False)
    spec = sfft.rfftn(K)
    spec.setflags(write=False)
    return RieszKernel(grid, float(alpha), K, c0, spec)


def build_kernel(grid: GridSpec, alpha: float) -> RieszKernel:
    return _kernel(grid, float(alpha))


@dataclass(frozen=True, eq=False)
class PoissonSolution:
    phi: Field
    source: Field
    eps_factor: float


def _convolve(kernel: RieszKernel, rho: np.ndarray) -> np.ndarray:
    """``h^N sum_j K(x_i - x_j) rho_j`` by zero-padded FFT."""
    grid = kernel.grid
    n = grid.n_per_axis
    pshape = kernel.padded_shape
    rho_hat = sfft.rfftn(rho, s=pshape)
    conv = sfft.irfftn(rho_hat * kernel.spectrum, s=pshape)
    return grid.cell_volume * conv[(slice(0, n),) * grid.dim]


def _check(u: Field, kernel: RieszKernel, fp: FracParams):
    if u.grid != kernel.grid:
        raise GridMismatchError(f"kernel built for {kernel.grid}, field on {u.grid}")
    if abs(kernel.alpha - fp.alpha) > 0:
        raise ValueError(f"kernel alpha {kernel.alpha} != params alpha {fp.alpha}")


def solve_poisson_pair(u: Field, w: Field, kernel: RieszKernel, fp: FracParams) -> Field:
    """``eps^(alpha-theta) |x|^(alpha-N) * (u w)``."""
    check_same_grid(u, w)
    _check(u, kernel, fp)
    return Field(u.grid, fp.eps_factor * _convolve(kernel, u.values * w.values))


def solve_poisson(u: Field, kernel: RieszKernel, fp: FracParams) -> PoissonSolution:
    return PoissonSolution(solve_poisson_pair(u, u, kernel, fp), u, fp.eps_factor)


def coupling_A(u: Field, kernel: RieszKernel, fp: FracParams) -> float:
    """``A(u) = int phi_u u^2``."""
    phi = solve_poisson(u, kernel, fp).phi
    return inner_product(phi, u.like(u.values**2))


def strong_residual(u: Field, kernel: RieszKernel, fp: FracParams, pad_factor: int = 4) -> float:
    """Relative residual of ``(-Delta)^(alpha/2) phi = eps^(alpha-theta) gamma_alpha u^2``.

    ``phi`` is evaluated by direct convolution on a lattice ``pad_factor``
    times wider than the box, then the multiplier ``|k|^alpha`` is applied on
    that periodic lattice.  The max-norm of the residual over the interior
    half-box is divided by the max of the right-hand side.  Truncation of the
    slowly decaying ``phi`` pollutes this; it is a diagnostic only.
    """
    grid = kernel.grid
    N, n, h = grid.dim, grid.n_per_axis, grid.spacing
    big = pad_factor * n
    shape = (big,) * N
    lo = (big - n) // 2
    rho = np.zeros(shape)
    core = tuple(slice(lo, lo + n) for _ in range(N))
    rho[core] = u.values**2
    # phi on the wide lattice via linear convolution (kernel of size 2*big)
    m = np.fft.fftfreq(2 * big, d=1.0 / (2 * big))
    axes = np.meshgrid(*([m * h] * N), indexing="ij")
    r = np.sqrt(sum(a**2 for a in axes))
    K = np.where(r > 0, np.power(np.where(r > 0, r, 1.0), fp.alpha - N), origin_cell_average(N, fp.alpha, h))
    conv = sfft.irfftn(sfft.rfftn(rho, s=(2 * big,) * N) * sfft.rfftn(K), s=(2 * big,) * N)
    phi = fp.eps_factor * h**N * conv[(slice(0, big),) * N]
    k = 2 * np.pi * sfft.fftfreq(big, d=h)
    kr = np.abs(k[: big // 2 + 1])
    if N == 1:
        kk = kr
    else:
        kk = np.sqrt(k[:, None] ** 2 + kr[None, :] ** 2)
    lhs = sfft.irfftn(kk**fp.alpha * sfft.rfftn(phi), s=shape)
    rhs = fp.eps_factor * riesz_gamma(N, fp.alpha) * rho
    q = n // 4
    inner = tuple(slice(lo + q, lo + n - q) for _ in range(N))
    return float(np.max(np.abs(lhs[inner] - rhs[inner])) / np.max(np.abs(rhs)))
