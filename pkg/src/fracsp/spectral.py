"""Periodic lattice, Fourier transforms and fractional-Laplacian multipliers.

The box is ``[-L, L)^dim`` sampled with ``n`` points per axis,
``x_j = -L + j*h`` with ``h = 2L/n``.  Angular frequencies are
``k = (pi/L) * m`` for ``m`` in ``{-n/2, ..., n/2 - 1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import fft as sfft

__all__ = [
    "GridMismatchError",
    "GridSpec",
    "Field",
    "SpectrumCache",
    "make_grid",
    "forward_transform",
    "inverse_transform",
    "frac_laplacian",
    "half_laplacian_norm_sq",
    "inner_product",
    "spectral_shift",
]


class GridMismatchError(ValueError):
    """Raised when fields living on different lattices are combined."""


@dataclass(frozen=True)
class GridSpec:
    dim: int
    n_per_axis: int
    half_length: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        n = self.n_per_axis
        if n < 16 or n & (n - 1):
            raise ValueError(f"n_per_axis must be a power of two >= 16, got {n}")
        if not self.half_length > 0:
            raise ValueError(f"half length L must be positive, got {self.half_length}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.n_per_axis

    h = spacing

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.n_per_axis**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def axis(self) -> np.ndarray:
        """1D coordinates ``-L + j*h``."""
        return -self.half_length + self.spacing * np.arange(self.n_per_axis)

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays (``indexing='ij'``), one per axis."""
        ax = self.axis()
        return tuple(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def points(self) -> np.ndarray:
        """Lattice points as an array of shape ``shape + (dim,)``."""
        return np.stack(self.coordinates(), axis=-1)

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c**2 for c in self.coordinates()))

    def wavenumbers(self) -> np.ndarray:
        """Angular frequencies along one axis, in FFT order."""
        return 2.0 * np.pi * sfft.fftfreq(self.n_per_axis, d=self.spacing)

    def contains(self, point) -> bool:
        p = np.atleast_1d(np.asarray(point, dtype=float))
        return bool(np.all(p >= -self.half_length) and np.all(p < self.half_length))


def make_grid(dim: int, n_per_axis: int, L: float) -> GridSpec:
    return GridSpec(int(dim), int(n_per_axis), float(L))


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of a function on a :class:`GridSpec` lattice.

    ``values`` has shape ``grid.shape``; ``ravel()`` gives the row-major
    flat ordering used by the field file format.
    """

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} samples, got {v.size}")
        v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: GridSpec, func) -> Field:
        return cls(grid, func(*grid.coordinates()))

    @classmethod
    def zeros(cls, grid: GridSpec) -> Field:
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: GridSpec, c: float) -> Field:
        return cls(grid, np.full(grid.shape, float(c)))

    def ravel(self) -> np.ndarray:
        return self.values.ravel()

    def like(self, values) -> Field:
        return Field(self.grid, values)

    def positive_part(self) -> Field:
        return self.like(np.maximum(self.values, 0.0))

    def roll(self, shift) -> Field:
        """Periodic shift by an integer number of lattice sites per axis."""
        shift = tuple(np.broadcast_to(np.asarray(shift, dtype=int), (self.grid.dim,)))
        return self.like(np.roll(self.values, shift, axis=tuple(range(self.grid.dim))))

    def _other(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise GridMismatchError(f"{self.grid} != {other.grid}")
            return other.values
        return other

    def __add__(self, other):
        return self.like(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.like(self.values - self._other(other))

    def __rsub__(self, other):
        return self.like(self._other(other) - self.values)

    def __mul__(self, other):
        return self.like(self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self.like(self.values / self._other(other))

    def __neg__(self):
        return self.like(-self.values)


def check_same_grid(*fields: Field) -> GridSpec:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError(f"{grid} != {f.grid}")
    return grid


@lru_cache(maxsize=64)
def _abs_k(grid: GridSpec) -> np.ndarray:
    # |k| on the rfft half-lattice (last axis non-negative)
    k = grid.wavenumbers()
    kr = np.abs(k[: grid.n_per_axis // 2 + 1])
    if grid.dim == 1:
        out = kr.copy()
    else:
        out = np.sqrt(k[:, None] ** 2 + kr[None, :] ** 2)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=128)
def _symbol(grid: GridSpec, power: float) -> np.ndarray:
    k = _abs_k(grid)
    out = np.zeros_like(k)
    nz = k > 0
    out[nz] = k[nz] ** power
    out.setflags(write=False)
    return out


class SpectrumCache:
    """Tables of ``|k|^p`` on the real-FFT half-lattice of a grid.

    The zero frequency maps to exactly 0 for every power.  Instances are
    read-only and safe to share.
    """

    def __init__(self, grid: GridSpec, powers=()):
        self.grid = grid
        for p in powers:
            _symbol(grid, float(p))

    def multiplier(self, power: float) -> np.ndarray:
        return _symbol(self.grid, float(power))


def forward_transform(u: Field) -> np.ndarray:
    """Unnormalized real FFT of the samples."""
    return sfft.rfftn(u.values)


def inverse_transform(coeffs: np.ndarray, grid: GridSpec) -> Field:
    return Field(grid, sfft.irfftn(coeffs, s=grid.shape))


def frac_laplacian(u: Field, beta: float) -> Field:
    """Apply the Fourier multiplier ``|k|^(2 beta)``; constants go to zero."""
    mult = _symbol(u.grid, 2.0 * float(beta))
    return inverse_transform(mult * forward_transform(u), u.grid)


def inner_product(u: Field, v: Field) -> float:
    """Rectangle-rule ``L^2`` product ``h^dim * sum(u v)``."""
    grid = check_same_grid(u, v)
    return float(grid.cell_volume * np.sum(u.values * v.values))


def half_laplacian_norm_sq(u: Field, beta: float) -> float:
    """``<u, (-Delta)^beta u>`` evaluated on the Fourier side (Parseval)."""
    grid = u.grid
    c = forward_transform(u)
    w = np.abs(c) ** 2 * _symbol(grid, 2.0 * float(beta))
    # rfft stores half the spectrum: interior columns of the last axis count twice
    n = grid.n_per_axis
    weights = np.full(n // 2 + 1, 2.0)
    weights[0] = weights[-1] = 1.0
    total = np.sum(w * weights)
    return float(grid.cell_volume * total / grid.size)


def spectral_shift(u: Field, displacement) -> Field:
    """Translate ``u`` by ``displacement`` (physical units), periodically.

    Integer-cell displacements use an exact roll; otherwise trigonometric
    interpolation via a Fourier phase factor.
    """
    grid = u.grid
    d = np.broadcast_to(np.asarray(displacement, dtype=float), (grid.dim,))
    cells = d / grid.spacing
    if np.allclose(cells, np.round(cells), atol=1e-12, rtol=0):
        return u.roll(np.round(cells).astype(int))
    k = grid.wavenumbers()
    kr = k[: grid.n_per_axis // 2 + 1]
    c = forward_transform(u)
    if grid.dim == 1:
        phase = np.exp(-1j * kr * d[0])
    else:
        phase = np.exp(-1j * k[:, None] * d[0]) * np.exp(-1j * kr[None, :] * d[1])
    # Nyquist modes cannot carry a phase in a real signal; drop them.
    c = c * phase
    nyq = grid.n_per_axis // 2
    c[..., nyq] = 0.0
    if grid.dim == 2:
        c[nyq, :] = 0.0
    return inverse_transform(c, grid)
