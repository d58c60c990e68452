"""Nehari projection and Nehari-constrained gradient descent.

Each iterate lives on the Nehari set: after a gradient step (and optional
clipping to the positive part) the field is rescaled along its ray to the
unique ``t > 0`` with ``J(t u) = 0``.  Steps are accepted by Armijo
backtracking on the projected energy, so accepted energies never increase.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import analysis
from .functional import EnergyBreakdown, Problem, full_problem, limit_problem, precondition
from .model import ModelParams, Nonlinearity, PowerNonlinearity
from .spectral import Field, GridSpec, inner_product, spectral_shift

__all__ = [
    "NehariScalars",
    "SolveConfig",
    "SolutionRecord",
    "Seed",
    "EpsReport",
    "SweepReport",
    "fiber_root",
    "nehari_project",
    "nehari_project_limit",
    "smooth_cutoff",
    "bump_seed",
    "ground_state_limit",
    "solve_full",
    "multistart",
    "continuation_sweep",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NehariScalars:
    """Fiber data ``g(t) = t^2 a + t^4 b - t^2 * fiber(t)`` and its root."""

    a: float
    b: float
    c: float
    t: float
    bracket: tuple[float, float]


@dataclass(frozen=True)
class SolveConfig:
    step: float = 1.0
    max_iters: int = 5000
    tol_g: float = 1e-6
    tol_N: float = 1e-10
    backtrack: float = 0.5
    precondition: bool = True
    positivity: bool = True
    rng_seed: int = 0
    armijo: float = 1e-4
    step_growth: float = 1.5
    step_max: float = 4.0
    max_backtracks: int = 40

    def __post_init__(self):
        if not (self.step > 0 and self.tol_g > 0 and self.tol_N > 0):
            raise ValueError("step and tolerances must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtracking factor must lie in (0, 1)")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")


@dataclass(eq=False)
class SolutionRecord:
    u: Field
    energy: EnergyBreakdown
    residual: float
    defect: float
    barycenter: tuple[float, ...]
    provenance: dict
    iterations: int
    eps: float | None
    converged: bool
    history: list[float] = field(default_factory=list, repr=False)
    t_star: float = 1.0

    @property
    def total(self) -> float:
        return self.energy.total

    def summary(self) -> dict:
        return {
            "energy": self.energy.to_dict(),
            "residual": self.residual,
            "defect": self.defect,
            "barycenter": list(self.barycenter),
            "provenance": self.provenance,
            "iterations": self.iterations,
            "eps": self.eps,
            "converged": self.converged,
            "boundary_mass": analysis.boundary_mass(self.u),
            "boundary_ratio": self.boundary_ratio,
        }

    @property
    def boundary_ratio(self) -> float:
        """``max |u|`` on the box faces over ``max |u|``; tails are algebraic here."""
        v = np.abs(self.u.values)
        faces = [np.take(v, idx, axis=ax) for ax in range(v.ndim) for idx in (0, -1)]
        peak = float(v.max())
        return max(float(f.max()) for f in faces) / peak if peak else 0.0


@dataclass(frozen=True, eq=False)
class Seed:
    u: Field
    kind: str
    y: tuple[float, ...] | None = None
    rng_seed: int | None = None

    def provenance(self) -> dict:
        return {"kind": self.kind, "y": None if self.y is None else list(self.y), "rng_seed": self.rng_seed}


def fiber_root(a: float, b: float, fiber, exact_power: float | None = None, fiber_c: float | None = None):
    """Unique positive root of ``h(t) = fiber(t) - t^2 b - a``.

    ``fiber(t) = int f(t u) u / t``.  For ``b = 0`` and a pure power the
    root is ``(a / c)^(1/(q-1))`` in closed form.
    """
    if exact_power is not None and b == 0.0:
        t = (a / fiber_c) ** (1.0 / (exact_power - 1.0))
        return t, (t, t)

    def h(t):
        return fiber(t) - t * t * b - a

    lo, hi = 1.0, 1.0
    if h(1.0) < 0:
        while h(hi) < 0:
            lo, hi = hi, 2.0 * hi
            if hi > 1e150:
                raise RuntimeError("failed to bracket Nehari root")
    else:
        while h(lo) >= 0:
            hi, lo = lo, 0.5 * lo
            if lo < 1e-150:
                raise RuntimeError("failed to bracket Nehari root")
    t = brentq(h, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return t, (lo, hi)


def _project(problem: Problem, u: Field) -> tuple[NehariScalars, Field]:
    if not np.any(u.values > 0):
        raise ValueError("nonpositive direction: u_+ vanishes, no Nehari projection")
    dv = problem.grid.cell_volume
    a = problem.norm_sq(u)
    b = problem.coupling_value(u)
    nl = problem.nonlin
    if isinstance(nl, PowerNonlinearity):
        c = nl.power_integral(u.values, dv)
        t, br = fiber_root(a, b, lambda t: t ** (nl.q - 1) * c, nl.q, c)
    else:
        c = nl.fiber(u.values, 1.0, dv)
        t, br = fiber_root(a, b, lambda t: nl.fiber(u.values, t, dv))
    return NehariScalars(a, b, c, t, br), u * t


def nehari_project(u: Field, mp: ModelParams) -> tuple[float, Field]:
    sc, v = _project(full_problem(mp), u)
    return sc.t, v


def nehari_scalars(u: Field, mp: ModelParams) -> NehariScalars:
    return _project(full_problem(mp), u)[0]


def nehari_project_limit(u: Field, mu: float, nonlin: Nonlinearity, s: float) -> tuple[float, Field]:
    sc, v = _project(limit_problem(u.grid, mu, nonlin, s), u)
    return sc.t, v


def _norm(u: Field) -> float:
    return float(np.sqrt(inner_product(u, u)))


def descend(problem: Problem, u0: Field, cfg: SolveConfig):
    """Projected gradient descent on the Nehari set of ``problem``.

    Returns ``(u, residual, iterations, history, converged)``.
    """
    _, u = _project(problem, u0.positive_part() if cfg.positivity else u0)
    E = problem.energy(u).total
    history = [E]
    eta = cfg.step
    it = 0
    residual = np.inf
    while True:
        g = problem.gradient(u)
        residual = _norm(g) / _norm(u)
        if residual < cfg.tol_g or it >= cfg.max_iters:
            break
        d = precondition(g, problem.s) if cfg.precondition else g
        slope = inner_product(g, d)
        accepted = False
        for _ in range(cfg.max_backtracks):
            cand = u - eta * d
            if cfg.positivity:
                cand = cand.positive_part()
            if np.any(cand.values > 0):
                _, v = _project(problem, cand)
                Ev = problem.energy(v).total
                if Ev <= E - cfg.armijo * eta * slope:
                    accepted = True
                    break
            eta *= cfg.backtrack
        if not accepted:
            log.debug("line search stalled at iteration %d (residual %.3e)", it, residual)
            break
        assert Ev <= E
        u, E = v, Ev
        history.append(E)
        it += 1
        eta = min(eta * cfg.step_growth, cfg.step_max)
    converged = residual < cfg.tol_g and abs(problem.defect(u)) < cfg.tol_N * problem.norm_sq(u)
    return u, residual, it, history, converged


def _record(problem: Problem, u: Field, residual, it, history, converged, eps, provenance, trunc) -> SolutionRecord:
    bary = analysis.barycenter(u, 1.0 if eps is None else eps, trunc)
    return SolutionRecord(
        u=u,
        energy=problem.energy(u),
        residual=float(residual),
        defect=float(problem.defect(u)),
        barycenter=tuple(float(b) for b in bary),
        provenance=provenance,
        iterations=it,
        eps=eps,
        converged=bool(converged),
        history=history,
    )


def gaussian(grid: GridSpec, center=None, width: float = 1.0, amplitude: float = 1.0) -> Field:
    c = np.zeros(grid.dim) if center is None else np.broadcast_to(np.asarray(center, float), (grid.dim,))
    r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coordinates(), c))
    return Field(grid, amplitude * np.exp(-r2 / width**2))


def ground_state_limit(
    mu: float,
    grid: GridSpec,
    nonlin: Nonlinearity,
    cfg: SolveConfig,
    s: float,
    start: Field | None = None,
) -> SolutionRecord:
    """Minimize ``E_mu`` on its Nehari set, from a centered Gaussian by default."""
    problem = limit_problem(grid, mu, nonlin, s)
    u0 = gaussian(grid) if start is None else start
    u, res, it, hist, conv = descend(problem, u0, cfg)
    trunc = analysis.TruncationSpec(rho=grid.half_length * grid.dim, delta=1.0, check=False)
    prov = {"kind": "gaussian" if start is None else "given", "mu": mu, "rng_seed": cfg.rng_seed}
    if not conv:
        log.warning("limit solve (mu=%g) not converged: residual %.3e after %d iterations", mu, res, it)
    return _record(problem, u, res, it, hist, conv, None, prov, trunc)


def solve_full(seed: Field | Seed, mp: ModelParams, cfg: SolveConfig) -> SolutionRecord:
    """Descend ``I_eps`` on its Nehari set from ``seed``."""
    if isinstance(seed, Seed):
        u0, prov = seed.u, seed.provenance()
    else:
        u0, prov = seed, {"kind": "given", "y": None, "rng_seed": None}
    problem = full_problem(mp)
    u, res, it, hist, conv = descend(problem, u0, cfg)
    trunc = analysis.TruncationSpec.for_potential(mp.potential)
    if not conv:
        log.warning("full solve (eps=%g) not converged: residual %.3e after %d iterations", mp.eps, res, it)
    return _record(problem, u, res, it, hist, conv, mp.eps, prov, trunc)


def smooth_cutoff(r, delta: float) -> np.ndarray:
    """Nonincreasing cutoff: 1 on ``[0, delta/2]``, 0 on ``[delta, inf)``.

    Quintic smoothstep in between (C^2).
    """
    r = np.asarray(r, dtype=float)
    t = np.clip((r - 0.5 * delta) / (0.5 * delta), 0.0, 1.0)
    return 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t * t)


def bump_seed(y, eps: float, delta: float, w0: Field, mp: ModelParams) -> Field:
    """``eta(|eps x - y|) w0(x - y/eps)`` on the lattice of ``w0``."""
    grid = w0.grid
    if grid != mp.grid:
        raise ValueError("w0 must live on the model grid")
    y = np.broadcast_to(np.asarray(y, dtype=float), (grid.dim,))
    center = y / eps
    if not grid.contains(center):
        raise ValueError(
            f"seed center y/eps = {center.tolist()} lies outside the box [-{grid.half_length}, {grid.half_length}); enlarge L"
        )
    shifted = spectral_shift(w0, center)
    dist = np.sqrt(sum((eps * x - yi) ** 2 for x, yi in zip(grid.coordinates(), y)))
    return Field(grid, shifted.values * smooth_cutoff(dist, delta))


def multistart(mp: ModelParams, cfg: SolveConfig, seeds: list, workers: int | None = None) -> list[SolutionRecord]:
    """One :func:`solve_full` per seed, returned in seed order."""
    if not seeds:
        raise ValueError("multistart needs at least one seed")
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(lambda sd: solve_full(sd, mp, cfg), seeds))
    return [solve_full(sd, mp, cfg) for sd in seeds]


@dataclass(eq=False)
class EpsReport:
    eps: float
    records: list[SolutionRecord]
    ground_index: int | None
    seed_gaps: dict[str, float]
    seed_beta_errors: dict[str, float]
    clusters: "analysis.ClusterReport"

    @property
    def ground(self) -> SolutionRecord | None:
        return None if self.ground_index is None else self.records[self.ground_index]

    @property
    def m_hat(self) -> float:
        return float("nan") if self.ground is None else self.ground.total

    @property
    def h_hat(self) -> float:
        return max((abs(v) for v in self.seed_gaps.values()), default=float("nan"))


@dataclass(eq=False)
class SweepReport:
    eps_list: list[float]
    m_inf: float
    w0: SolutionRecord
    levels: list[EpsReport]
    category: int

    def table(self) -> list[dict]:
        rows = []
        for lv in self.levels:
            g = lv.ground
            rows.append(
                {
                    "eps": lv.eps,
                    "m_hat": lv.m_hat,
                    "gap": lv.m_hat - self.m_inf,
                    "ground_barycenter": None if g is None else list(g.barycenter),
                    "ground_dist_to_M": float("nan") if g is None else lv.clusters.dist_of(g),
                    "h_hat": lv.h_hat,
                    "count_distinct": lv.clusters.count_distinct,
                    "seed_gaps": lv.seed_gaps,
                    "seed_beta_errors": lv.seed_beta_errors,
                }
            )
        return rows


def _y_key(y) -> str:
    return ",".join(f"{v:g}" for v in y)


def random_points(potential, n: int, rng: np.random.Generator) -> list[tuple[float, ...]]:
    """Uniform points in the bounding box of ``M`` enlarged by ``delta``."""
    if n <= 0:
        return []
    m = np.asarray(potential.minima, dtype=float)
    if potential.kind == "ring":
        lo = -np.full(2, potential.radius)
        hi = -lo
    else:
        lo, hi = m.min(axis=0), m.max(axis=0)
    lo, hi = lo - potential.delta, hi + potential.delta
    return [tuple(float(v) for v in rng.uniform(lo, hi)) for _ in range(n)]


def _recenter(rec: SolutionRecord, eps_old: float, eps_new: float) -> Seed:
    grid = rec.u.grid
    beta = np.asarray(rec.barycenter)
    shift = beta / eps_new - beta / eps_old
    cells = np.round(shift / grid.spacing).astype(int)
    return Seed(rec.u.roll(cells), "warm", tuple(float(b) for b in beta), rec.provenance.get("rng_seed"))


def continuation_sweep(
    mp: ModelParams,
    cfg: SolveConfig,
    eps_list,
    wells=None,
    random_count: int = 0,
    w0: SolutionRecord | None = None,
    warm_start: bool = True,
    workers: int | None = None,
    merge_radius: float | None = None,
    energy_window: float | None = None,
) -> SweepReport:
    """Solve along decreasing ``eps``, seeding at wells, random points and warm starts.

    ``wells`` defaults to the declared minima of the potential.
    """
    eps_list = [float(e) for e in eps_list]
    if not eps_list or any(e <= 0 for e in eps_list):
        raise ValueError("eps_list must contain positive values")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    pot = mp.potential
    wells = list(pot.minima if wells is None else wells)
    if w0 is None:
        w0 = ground_state_limit(pot.V0, mp.grid, mp.nonlin, cfg, mp.frac.s)
    m_inf = w0.total
    delta = pot.delta
    rng = np.random.default_rng(cfg.rng_seed)
    rand_pts = random_points(pot, random_count, rng)
    trunc = analysis.TruncationSpec.for_potential(pot)
    levels: list[EpsReport] = []
    prev: list[SolutionRecord] = []
    prev_eps = None
    for eps in eps_list:
        mpe = mp.with_eps(eps)
        seeds = []
        gaps, beta_err = {}, {}
        for y in wells:
            s = bump_seed(y, eps, delta, w0.u, mpe)
            seeds.append(Seed(s, "bump", tuple(np.atleast_1d(np.asarray(y, float)).tolist()), cfg.rng_seed))
            _, phi_y = nehari_project(s, mpe)
            key = _y_key(np.atleast_1d(y))
            gaps[key] = full_problem(mpe).energy(phi_y).total - m_inf
            beta_err[key] = float(np.linalg.norm(np.asarray(analysis.barycenter(phi_y, eps, trunc)) - np.atleast_1d(y)))
        for y in rand_pts:
            seeds.append(Seed(bump_seed(y, eps, delta, w0.u, mpe), "random", y, cfg.rng_seed))
        if warm_start and prev:
            seeds.extend(_recenter(r, prev_eps, eps) for r in prev if r.converged)
        records = multistart(mpe, cfg, seeds, workers=workers)
        conv = [i for i, r in enumerate(records) if r.converged]
        ground = min(conv, key=lambda i: (records[i].total, i)) if conv else None
        window = energy_window if energy_window is not None else 2.0 * max(abs(v) for v in gaps.values())
        clusters = analysis.cluster_solutions(
            records, merge_radius if merge_radius is not None else delta, window, potential=pot
        )
        levels.append(EpsReport(eps, records, ground, gaps, beta_err, clusters))
        # warm starts come from cluster representatives only
        prev = [records[c.representative] for c in clusters.clusters]
        prev_eps = eps
    return SweepReport(eps_list, m_inf, w0, levels, pot.category)
