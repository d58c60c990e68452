"""Problem data: fractional parameters, potentials, nonlinearity, hypotheses."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .spectral import Field, GridSpec

__all__ = [
    "riesz_gamma",
    "critical_exponent",
    "FracParams",
    "Potential",
    "Nonlinearity",
    "PowerNonlinearity",
    "ModelParams",
    "HypothesisReport",
    "sample_potential",
    "validate_hypotheses",
    "hypothesis_report",
]


def riesz_gamma(N: int, alpha: float) -> float:
    """``pi^(N/2) 2^alpha Gamma(alpha/2) / Gamma(N/2 - alpha/2)``.

    This is also the Fourier transform constant of ``|x|^(alpha - N)``,
    i.e. ``F[|x|^(alpha-N)](k) = gamma_alpha |k|^(-alpha)``.
    """
    if not 0 < alpha < N:
        raise ValueError(f"need 0 < alpha < N, got alpha={alpha}, N={N}")
    log_val = (
        0.5 * N * math.log(math.pi)
        + alpha * math.log(2.0)
        + gammaln(0.5 * alpha)
        - gammaln(0.5 * (N - alpha))
    )
    return float(math.exp(log_val))


def critical_exponent(N: int, s: float) -> float:
    """Fractional Sobolev exponent ``2N/(N - 2s)``."""
    return 2.0 * N / (N - 2.0 * s)


@dataclass(frozen=True)
class FracParams:
    s: float
    alpha: float
    theta: float
    eps: float
    dim: int

    def __post_init__(self):
        problems = h1_violations(self.s, self.alpha, self.theta, self.dim)
        if not self.eps > 0:
            problems.append(f"eps must be > 0 (got {self.eps})")
        if problems:
            raise ValueError("(H1) violated: " + "; ".join(problems))

    @property
    def eps_factor(self) -> float:
        """Coupling prefactor ``eps^(alpha - theta)``."""
        return self.eps ** (self.alpha - self.theta)

    def with_eps(self, eps: float) -> FracParams:
        return FracParams(self.s, self.alpha, self.theta, float(eps), self.dim)


def h1_violations(s, alpha, theta, N) -> list[str]:
    out = []
    if not 0 < s < 1:
        out.append(f"s in (0,1) fails: s={s}")
    if not 0 < alpha < N:
        out.append(f"alpha in (0,N) fails: alpha={alpha}, N={N}")
    if not 0 < theta < alpha:
        out.append(f"theta in (0,alpha) fails: theta={theta}, alpha={alpha}")
    if not 2 * s < N < 2 * s + alpha:
        out.append(f"N in (2s, 2s+alpha) fails: N={N}, 2s={2 * s}, 2s+alpha={2 * s + alpha}")
    return out


def _as_point(p, dim: int) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(p, dtype=float))
    if arr.shape != (dim,):
        raise ValueError(f"point {p!r} is not {dim}-dimensional")
    return tuple(float(x) for x in arr)


@dataclass(frozen=True)
class Potential:
    """A continuous potential with a known minimum set.

    Families:

    ``constant``
        ``V = mu`` everywhere; every point is a minimizer.
    ``multi_well``
        ``V = V0 + (Vinf - V0) * prod_i (1 - exp(-|x - c_i|^2 / width^2))``.
        Each factor vanishes only at its own center, so the minimum ``V0`` is
        attained exactly on ``{c_i}`` and ``V -> Vinf`` at infinity.
    ``ring``
        ``V = V0 + (Vinf - V0) * (1 - exp(-(|x| - radius)^2 / width^2))``,
        minimal on the circle ``|x| = radius``.
    """

    kind: str
    dim: int
    V0: float
    Vinf: float
    centers: tuple[tuple[float, ...], ...] = ()
    width: float = 1.0
    radius: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "multi_well", "ring"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if not self.V0 > 0:
            raise ValueError(f"(V1) needs V0 > 0, got {self.V0}")
        if self.kind != "constant" and not self.Vinf > self.V0:
            raise ValueError(f"(V1) needs V0 < Vinf, got V0={self.V0}, Vinf={self.Vinf}")
        if self.kind == "multi_well" and not self.centers:
            raise ValueError("multi_well needs at least one center")
        if self.kind == "ring" and (self.dim != 2 or not self.radius > 0):
            raise ValueError("ring potential needs dim=2 and radius > 0")
        if self.kind != "constant" and not self.width > 0:
            raise ValueError("width must be positive")

    @classmethod
    def constant(cls, mu: float, dim: int = 1) -> Potential:
        return cls("constant", dim, float(mu), float(mu))

    @classmethod
    def multi_well(cls, centers, V0: float, Vinf: float, width: float, dim: int | None = None) -> Potential:
        pts = [np.atleast_1d(np.asarray(c, dtype=float)) for c in centers]
        if dim is None:
            dim = pts[0].size if pts else 1
        cs = tuple(_as_point(c, dim) for c in pts)
        return cls("multi_well", dim, float(V0), float(Vinf), centers=cs, width=float(width))

    @classmethod
    def ring(cls, radius: float, V0: float, Vinf: float, width: float) -> Potential:
        return cls("ring", 2, float(V0), float(Vinf), width=float(width), radius=float(radius))

    @property
    def depth(self) -> float:
        return self.Vinf - self.V0

    def __call__(self, x) -> np.ndarray:
        """Evaluate at points ``x`` of shape ``(..., dim)`` (or ``(...,)`` in 1D)."""
        x = np.asarray(x, dtype=float)
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        if self.kind == "constant":
            return np.full(x.shape[:-1], self.V0)
        if self.kind == "multi_well":
            prod = np.ones(x.shape[:-1])
            for c in self.centers:
                r2 = np.sum((x - np.asarray(c)) ** 2, axis=-1)
                prod = prod * -np.expm1(-r2 / self.width**2)
            return self.V0 + self.depth * prod
        r = np.linalg.norm(x, axis=-1)
        return self.V0 + self.depth * -np.expm1(-((r - self.radius) ** 2) / self.width**2)

    @property
    def minima(self) -> tuple[tuple[float, ...], ...]:
        """Declared minimizers: well centers, or sample points on the ring."""
        if self.kind == "multi_well":
            return self.centers
        if self.kind == "ring":
            a = np.linspace(0, 2 * np.pi, 8, endpoint=False)
            return tuple((self.radius * math.cos(t), self.radius * math.sin(t)) for t in a)
        return ((0.0,) * self.dim,)

    @property
    def category(self) -> int:
        """Ljusternik-Schnirelmann category of the minimum set (declared)."""
        if self.kind == "multi_well":
            return len(self.centers)
        if self.kind == "ring":
            return 2
        return 1

    @property
    def delta(self) -> float:
        """Admissible neighborhood scale: ``M`` and ``M_{2 delta}`` homotopic.

        For separated wells the closed ``2 delta`` balls must stay disjoint,
        which needs ``delta < d_min / 4``; we take ``d_min / 5``.
        """
        if self.kind == "multi_well":
            if len(self.centers) == 1:
                return self.width
            c = np.asarray(self.centers)
            d = np.linalg.norm(c[:, None, :] - c[None, :, :], axis=-1)
            return 0.2 * float(np.min(d[np.triu_indices(len(c), 1)]))
        if self.kind == "ring":
            return min(self.width, 0.25 * self.radius)
        return 1.0

    def dist_to_minima(self, p) -> float:
        p = np.asarray(_as_point(p, self.dim))
        if self.kind == "constant":
            return 0.0
        if self.kind == "ring":
            return abs(float(np.linalg.norm(p)) - self.radius)
        c = np.asarray(self.centers)
        return float(np.min(np.linalg.norm(c - p, axis=-1)))


class Nonlinearity:
    """Base for nonlinearities ``f`` with primitive ``F``.

    Subclasses supply vectorized :meth:`f` and :meth:`F`.  :meth:`fiber`
    returns ``int f(t u) u / t`` which drives the Nehari projection.
    """

    name = "generic"

    def f(self, t):
        raise NotImplementedError

    def F(self, t):
        raise NotImplementedError

    def f_over_t3(self, t):
        t = np.asarray(t, dtype=float)
        return self.f(t) / t**3

    def fiber(self, u: np.ndarray, t: float, dv: float) -> float:
        return float(dv * np.sum(self.f(t * u) * u) / t)

    def describe(self) -> dict:
        return {"kind": self.name}


@dataclass(frozen=True)
class PowerNonlinearity(Nonlinearity):
    """``f(t) = max(t, 0)^q``, ``F(t) = max(t, 0)^(q+1) / (q+1)``."""

    q: float
    name = "power"

    def f(self, t):
        return np.maximum(np.asarray(t, dtype=float), 0.0) ** self.q

    def F(self, t):
        return np.maximum(np.asarray(t, dtype=float), 0.0) ** (self.q + 1) / (self.q + 1)

    def f_over_t3(self, t):
        return np.asarray(t, dtype=float) ** (self.q - 3)

    def power_integral(self, u: np.ndarray, dv: float) -> float:
        """``int u_+^(q+1)``."""
        return float(dv * np.sum(np.maximum(u, 0.0) ** (self.q + 1)))

    def fiber(self, u, t, dv):
        return t ** (self.q - 1) * self.power_integral(u, dv)

    def describe(self):
        return {"kind": self.name, "q": self.q}


@dataclass(frozen=True)
class ModelParams:
    frac: FracParams
    potential: Potential
    nonlin: Nonlinearity
    grid: GridSpec
    coupling: bool = True
    gamma_alpha: float = field(init=False)

    def __post_init__(self):
        if self.potential.dim != self.grid.dim or self.frac.dim != self.grid.dim:
            raise ValueError("dimension mismatch between grid, potential and frac params")
        object.__setattr__(self, "gamma_alpha", riesz_gamma(self.frac.dim, self.frac.alpha))

    @property
    def eps(self) -> float:
        return self.frac.eps

    def with_eps(self, eps: float) -> ModelParams:
        return ModelParams(self.frac.with_eps(eps), self.potential, self.nonlin, self.grid, self.coupling)

    def with_potential(self, potential: Potential) -> ModelParams:
        return ModelParams(self.frac, potential, self.nonlin, self.grid, self.coupling)

    def without_coupling(self) -> ModelParams:
        return ModelParams(self.frac, self.potential, self.nonlin, self.grid, False)


@lru_cache(maxsize=64)
def _sample(p: Potential, grid: GridSpec, eps: float) -> np.ndarray:
    vals = p(eps * grid.points())
    vals.setflags(write=False)
    return vals


def sample_potential(p: Potential, grid: GridSpec, eps: float) -> Field:
    """Lattice samples of ``V(eps x)``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    return Field(grid, _sample(p, grid, float(eps)))


def potential_values(p: Potential, grid: GridSpec, eps: float) -> np.ndarray:
    return _sample(p, grid, float(eps))


@dataclass
class HypothesisReport:
    checks: dict[str, tuple[bool, str]]

    @property
    def ok(self) -> bool:
        return all(passed for passed, _ in self.checks.values())

    def failures(self) -> dict[str, str]:
        return {k: msg for k, (passed, msg) in self.checks.items() if not passed}

    def to_dict(self) -> dict:
        return {k: {"pass": p, "detail": m} for k, (p, m) in self.checks.items()}

    def __str__(self):
        return "\n".join(f"{k:5s} {'pass' if p else 'FAIL'}  {m}" for k, (p, m) in self.checks.items())


def _check_power(nl: PowerNonlinearity, N: int, s: float) -> dict[str, tuple[bool, str]]:
    q = nl.q
    two_star = critical_exponent(N, s)
    upper = two_star - 1.0
    out = {}
    out["f1"] = (q >= 1, f"C^1 with f = 0 on t <= 0 needs q >= 1 (q={q})")
    out["f2"] = (q > 1, f"f(t)/t -> 0 needs q > 1 (q={q})")
    # t^q = o(t^q0) for some q0 in (2, 2*_s - 1) iff q < 2*_s - 1 (and the interval is nonempty)
    out["f3"] = (
        q < upper and upper > 2.0,
        f"some q0 in (2, 2*_s - 1) exceeds q: q < {upper:.6g} (2*_s = {two_star:.6g}, q={q})",
    )
    K = q + 1
    t = np.logspace(-6, 6, 241)
    lhs, rhs = K * nl.F(t), t * nl.f(t)
    f4_num = bool(np.all(lhs <= rhs * (1 + 1e-12)))
    out["f4"] = (K > 4 and f4_num, f"K = q+1 = {K:.6g} > 4 and K F(t) <= t f(t) on [1e-6, 1e6]")
    r = nl.f_over_t3(t)
    f5_num = bool(np.all(np.diff(r) > 0))
    out["f5"] = (q > 3 and f5_num, f"f(t)/t^3 = t^(q-3) strictly increasing needs q > 3 (q={q})")
    return out


def _check_generic(nl: Nonlinearity, N: int, s: float) -> dict[str, tuple[bool, str]]:
    t = np.logspace(-6, 6, 241)
    out = {}
    neg = np.array([-1.0, -1e-3, 0.0])
    out["f1"] = (bool(np.all(nl.f(neg) == 0)), "f = 0 on t <= 0 (sampled)")
    out["f2"] = (bool(abs(nl.f(1e-8) / 1e-8) < 1e-3), "f(t)/t small at t = 1e-8")
    two_star = critical_exponent(N, s)
    q0 = two_star - 1 - 1e-3
    out["f3"] = (bool(nl.f(1e6) / 1e6**q0 < 1e-3), f"f(t)/t^q0 small at t = 1e6, q0 = {q0:.4g}")
    ratio = t * nl.f(t) / np.maximum(nl.F(t), 1e-300)
    out["f4"] = (bool(np.min(ratio) > 4), f"min t f(t)/F(t) = {np.min(ratio):.4g} > 4")
    out["f5"] = (bool(np.all(np.diff(nl.f_over_t3(t)) > 0)), "f(t)/t^3 increasing on [1e-6, 1e6]")
    return out


def hypothesis_report(
    s: float,
    alpha: float,
    theta: float,
    N: int,
    potential: Potential,
    nonlin: Nonlinearity,
    grid: GridSpec | None = None,
    eps: float = 1.0,
) -> HypothesisReport:
    """Check (H1), (V1), (f1)-(f5) on raw parameters without raising."""
    h1 = h1_violations(s, alpha, theta, N)
    checks = {"H1": (not h1, "; ".join(h1) or "s, alpha, theta, N admissible")}
    pot = potential
    at_min = [float(pot(np.asarray(m))) for m in pot.minima]
    v1 = pot.V0 > 0 and all(abs(v - pot.V0) <= 1e-10 for v in at_min)
    if pot.kind == "constant":
        detail = f"constant control family, V = V0 = {pot.V0} (no strict V0 < Vinf)"
    else:
        v1 = v1 and pot.V0 < pot.Vinf
        detail = f"0 < V0={pot.V0} < Vinf={pot.Vinf}"
    if grid is not None:
        vmin = float(potential_values(pot, grid, eps).min())
        v1 = v1 and vmin >= pot.V0 - 1e-10
        detail += f", lattice min {vmin:.6g}"
    checks["V1"] = (bool(v1), detail)
    if isinstance(nonlin, PowerNonlinearity):
        checks.update(_check_power(nonlin, N, s))
    else:
        checks.update(_check_generic(nonlin, N, s))
    return HypothesisReport(checks)


def validate_hypotheses(mp: ModelParams) -> HypothesisReport:
    fp = mp.frac
    return hypothesis_report(fp.s, fp.alpha, fp.theta, fp.dim, mp.potential, mp.nonlin, mp.grid, fp.eps)
