"""Barycenters, distances to the minimum set, and solution counting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import solver
from .functional import energy_full
from .model import ModelParams, Potential
from .spectral import Field

__all__ = [
    "TruncationSpec",
    "Cluster",
    "ClusterReport",
    "chi",
    "barycenter",
    "boundary_mass",
    "dist_to_M",
    "cluster_solutions",
    "seed_level_gap",
    "beta_of_seed_error",
]


@dataclass(frozen=True)
class TruncationSpec:
    rho: float
    delta: float
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        if not (self.rho > 0 and self.delta > 0):
            raise ValueError("rho and delta must be positive")

    @classmethod
    def for_potential(cls, potential: Potential, rho: float | None = None) -> TruncationSpec:
        """``delta`` from the potential, ``rho = max|y| + 2 delta + 1`` over ``M``."""
        delta = potential.delta
        far = max(float(np.linalg.norm(m)) for m in potential.minima)
        spec = cls(far + 2 * delta + 1.0 if rho is None else rho, delta)
        spec.validate(potential)
        return spec

    def validate(self, potential: Potential):
        for m in potential.minima:
            if np.linalg.norm(m) + 2 * self.delta > self.rho + 1e-12:
                raise ValueError(f"M_2delta not inside B_rho: |{m}| + 2*{self.delta} > {self.rho}")


def chi(x, rho: float) -> np.ndarray:
    """Radial clamp onto the closed ball ``B_rho``; works on arrays ``(..., dim)``."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1, keepdims=True)
    scale = np.where(r > rho, rho / np.where(r > 0, r, 1.0), 1.0)
    return x * scale


def barycenter(u: Field, eps: float, trunc: TruncationSpec) -> np.ndarray:
    """``int chi(eps x) u^2 / int u^2``."""
    w = u.values**2
    mass = float(np.sum(w))
    if mass == 0:
        raise ValueError("barycenter of the zero field is undefined")
    pts = chi(eps * u.grid.points(), trunc.rho)
    return np.tensordot(w, pts, axes=(tuple(range(u.grid.dim)), tuple(range(u.grid.dim)))) / mass


def boundary_mass(u: Field, width: int = 2) -> float:
    """Fraction of ``int u^2`` within ``width`` cells of the box boundary."""
    w = u.values**2
    inner = w[(slice(width, -width),) * u.grid.dim]
    total = float(np.sum(w))
    return (total - float(np.sum(inner))) / total if total else 0.0


def dist_to_M(p, potential: Potential) -> float:
    return potential.dist_to_minima(p)


@dataclass
class Cluster:
    representative: int
    members: list[int]
    centroid: tuple[float, ...]
    energy_range: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "representative": self.representative,
            "members": self.members,
            "centroid": list(self.centroid),
            "energy_range": list(self.energy_range),
        }


@dataclass(eq=False)
class ClusterReport:
    records: list
    clusters: list[Cluster]
    excluded: list[int]
    unconverged: list[int]
    merge_radius: float
    energy_window: float
    category: int | None = None
    potential: Potential | None = None

    @property
    def count_distinct(self) -> int:
        return len(self.clusters)

    def dist_of(self, record) -> float:
        if self.potential is None:
            return float("nan")
        return dist_to_M(record.barycenter, self.potential)

    def cluster_distances(self) -> list[float]:
        if self.potential is None:
            return [float("nan")] * len(self.clusters)
        return [dist_to_M(c.centroid, self.potential) for c in self.clusters]

    def to_dict(self) -> dict:
        return {
            "count_distinct": self.count_distinct,
            "category": self.category,
            "merge_radius": self.merge_radius,
            "energy_window": self.energy_window,
            "clusters": [c.to_dict() for c in self.clusters],
            "cluster_dist_to_M": self.cluster_distances(),
            "excluded": self.excluded,
            "unconverged": self.unconverged,
        }


def cluster_solutions(records, merge_radius: float, energy_window: float, potential: Potential | None = None) -> ClusterReport:
    """Single-linkage clustering of converged low-energy records by barycenter.

    Records above ``min energy + energy_window`` are listed as excluded.
    """
    if not merge_radius > 0:
        raise ValueError("merge_radius must be positive")
    conv = [i for i, r in enumerate(records) if r.converged]
    unconv = [i for i, r in enumerate(records) if not r.converged]
    if not conv:
        return ClusterReport(list(records), [], [], unconv, merge_radius, energy_window,
                             None if potential is None else potential.category, potential)
    e_min = min(records[i].total for i in conv)
    keep = [i for i in conv if records[i].total <= e_min + energy_window]
    excluded = [i for i in conv if i not in keep]
    pts = {i: np.asarray(records[i].barycenter, dtype=float) for i in keep}
    parent = {i: i for i in keep}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a_idx, i in enumerate(keep):
        for j in keep[a_idx + 1 :]:
            if np.linalg.norm(pts[i] - pts[j]) <= merge_radius:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in keep:
        groups.setdefault(find(i), []).append(i)
    clusters = []
    for members in sorted(groups.values(), key=lambda m: min(m)):
        energies = [records[i].total for i in members]
        rep = min(members, key=lambda i: (records[i].total, i))
        centroid = tuple(float(v) for v in np.mean([pts[i] for i in members], axis=0))
        clusters.append(Cluster(rep, sorted(members), centroid, (min(energies), max(energies))))
    return ClusterReport(list(records), clusters, excluded, unconv, merge_radius, energy_window,
                         None if potential is None else potential.category, potential)


def _w0_parts(w0):
    if isinstance(w0, solver.SolutionRecord):
        return w0.u, w0.total
    raise TypeError("w0 must be the SolutionRecord of a limit ground state")


def _seed_point(y, eps, mp: ModelParams, w0, delta):
    u0, _ = _w0_parts(w0)
    mpe = mp.with_eps(eps)
    seed = solver.bump_seed(y, eps, mp.potential.delta if delta is None else delta, u0, mpe)
    _, phi = solver.nehari_project(seed, mpe)
    return mpe, phi


def seed_level_gap(y, eps: float, mp: ModelParams, w0, delta: float | None = None) -> float:
    """``I_eps(Phi_eps(y)) - m_inf``, the discrete level gap at ``y``."""
    mpe, phi = _seed_point(y, eps, mp, w0, delta)
    return energy_full(phi, mpe).total - _w0_parts(w0)[1]


def beta_of_seed_error(y, eps: float, mp: ModelParams, w0, trunc: TruncationSpec | None = None,
                       delta: float | None = None) -> float:
    """``|beta_eps(Phi_eps(y)) - y|``."""
    trunc = TruncationSpec.for_potential(mp.potential) if trunc is None else trunc
    _, phi = _seed_point(y, eps, mp, w0, delta)
    return float(np.linalg.norm(barycenter(phi, eps, trunc) - np.atleast_1d(np.asarray(y, float))))
