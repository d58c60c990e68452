"""Run configuration, experiment orchestration and text persistence.

Config files are flat ``key = value`` text with namespaced keys; ``#``
starts a comment.  Lists are comma separated; point lists separate points
with ``;`` and coordinates with ``,`` (``model.centers = -1; 1`` in 1D,
``0,1; 0,-1`` in 2D).  Unknown keys are errors.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import ClusterReport, TruncationSpec, cluster_solutions, dist_to_M
from .functional import full_problem
from .model import FracParams, ModelParams, Potential, PowerNonlinearity, hypothesis_report, potential_values
from .solver import (
    Seed,
    SolveConfig,
    SolutionRecord,
    SweepReport,
    bump_seed,
    continuation_sweep,
    ground_state_limit,
    multistart,
    random_points,
)
from .spectral import Field, GridSpec

__all__ = [
    "ConfigError",
    "RunConfig",
    "ResultBundle",
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_UNCONVERGED",
    "EXIT_CHECK_FAILED",
    "COMMANDS",
    "PLOT_KINDS",
    "parse_config",
    "parse_config_text",
    "load_preset",
    "preset_names",
    "run_command",
    "emit_plot_data",
    "write_field",
    "read_field",
]

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNCONVERGED = 3
EXIT_CHECK_FAILED = 4

COMMANDS = ("validate", "limit", "solve", "sweep", "multiplicity")
PLOT_KINDS = ("profile", "energy_vs_eps", "barycenter_vs_eps", "potential_slice")


class ConfigError(ValueError):
    """Bad configuration: unknown/missing keys, bad types, violated hypotheses."""


# key -> (RunConfig attribute, kind)
_KEYS = {
    "grid.dim": ("dim", "int"),
    "grid.n": ("n", "int"),
    "grid.L": ("L", "float"),
    "frac.s": ("s", "float"),
    "frac.alpha": ("alpha", "float"),
    "frac.theta": ("theta", "float"),
    "frac.eps_list": ("eps_list", "floats"),
    "frac.eps": ("eps", "float?"),
    "model.potential": ("potential", "str"),
    "model.centers": ("centers", "points"),
    "model.V0": ("V0", "float"),
    "model.Vinf": ("Vinf", "float"),
    "model.width": ("width", "float"),
    "model.radius": ("radius", "float"),
    "model.mu": ("mu", "float?"),
    "model.q": ("q", "float"),
    "model.coupling": ("coupling", "bool"),
    "solve.tol_g": ("tol_g", "float"),
    "solve.tol_N": ("tol_N", "float"),
    "solve.max_iters": ("max_iters", "int"),
    "solve.step": ("step", "float"),
    "solve.backtrack": ("backtrack", "float"),
    "solve.precondition": ("precondition", "bool"),
    "solve.positivity": ("positivity", "bool"),
    "seeds.wells": ("wells", "points?"),
    "seeds.random": ("random", "int"),
    "seeds.warm_start": ("warm_start", "bool"),
    "analysis.merge_radius": ("merge_radius", "float?"),
    "analysis.energy_window": ("energy_window", "float?"),
    "out.dir": ("out_dir", "str"),
    "rng.seed": ("seed", "int"),
}


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a run.  Defaults reproduce the 1D double-well preset."""

    dim: int = 1
    n: int = 512
    L: float = 32.0
    s: float = 0.4
    alpha: float = 0.8
    theta: float = 0.3
    eps_list: tuple[float, ...] = (0.5, 0.25, 0.125)
    eps: float | None = None
    potential: str = "multi_well"
    centers: tuple[tuple[float, ...], ...] = ((-1.0,), (1.0,))
    V0: float = 1.0
    Vinf: float = 3.0
    width: float = 0.5
    radius: float = 1.0
    mu: float | None = None
    q: float = 3.5
    coupling: bool = True
    tol_g: float = 1e-6
    tol_N: float = 1e-10
    max_iters: int = 20000
    step: float = 1.0
    backtrack: float = 0.5
    precondition: bool = True
    positivity: bool = True
    wells: tuple[tuple[float, ...], ...] | None = None
    random: int = 0
    warm_start: bool = True
    merge_radius: float | None = None
    energy_window: float | None = None
    out_dir: str = "results"
    seed: int = 0

    # -- derived objects -------------------------------------------------
    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.dim, self.n, self.L)

    @property
    def solve_eps(self) -> float:
        return self.eps if self.eps is not None else self.eps_list[-1]

    def make_potential(self) -> Potential:
        if self.potential == "constant":
            return Potential.constant(self.V0, self.dim)
        if self.potential == "multi_well":
            return Potential.multi_well(self.centers, self.V0, self.Vinf, self.width, dim=self.dim)
        if self.potential == "ring":
            return Potential.ring(self.radius, self.V0, self.Vinf, self.width)
        raise ConfigError(f"model.potential: unknown family {self.potential!r}")

    def model_params(self, eps: float | None = None) -> ModelParams:
        eps = self.solve_eps if eps is None else eps
        frac = FracParams(self.s, self.alpha, self.theta, eps, self.dim)
        return ModelParams(frac, self.make_potential(), PowerNonlinearity(self.q), self.grid, self.coupling)

    def solve_config(self) -> SolveConfig:
        return SolveConfig(
            step=self.step,
            max_iters=self.max_iters,
            tol_g=self.tol_g,
            tol_N=self.tol_N,
            backtrack=self.backtrack,
            precondition=self.precondition,
            positivity=self.positivity,
            rng_seed=self.seed,
        )

    # -- text round trip -------------------------------------------------
    def to_text(self, include_out: bool = True) -> str:
        lines = []
        for key, (attr, kind) in _KEYS.items():
            if key == "out.dir" and not include_out:
                continue
            lines.append(f"{key} = {_format_value(getattr(self, attr), kind)}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        """SHA-256 of the canonical echo, excluding the output directory."""
        return hashlib.sha256(self.to_text(include_out=False).encode()).hexdigest()[:16]

    def replace(self, **kw) -> RunConfig:
        return dataclasses.replace(self, **kw)


def _format_value(v, kind: str) -> str:
    if v is None:
        return "auto"
    if kind.startswith("points"):
        return "; ".join(",".join(repr(float(c)) for c in p) for p in v)
    if kind == "floats":
        return ", ".join(repr(float(x)) for x in v)
    if kind == "bool":
        return "true" if v else "false"
    if kind.startswith("float"):
        return repr(float(v))
    return str(v)


def _parse_value(key: str, raw: str, kind: str):
    optional = kind.endswith("?")
    base = kind.rstrip("?")
    if raw == "":
        raise ConfigError(f"{key}: missing value")
    if optional and raw.lower() in ("auto", "none", "declared"):
        return None
    try:
        if base == "int":
            return int(raw)
        if base == "float":
            return float(raw)
        if base == "bool":
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if base == "floats":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if base == "points":
            return tuple(tuple(float(c) for c in p.split(",")) for p in raw.split(";") if p.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {base}") from exc


def parse_config_text(text: str, validate: bool = True, base: RunConfig | None = None) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (p.strip() for p in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, kind = _KEYS[key]
        values[attr] = _parse_value(key, raw, kind)
    cfg = dataclasses.replace(base or RunConfig(), **values)
    _check_structure(cfg)
    if validate:
        report = config_hypotheses(cfg)
        if not report.ok:
            failed = "; ".join(f"({k}) {m}" for k, m in report.failures().items())
            raise ConfigError(f"hypotheses violated: {failed}")
    return cfg


def _check_structure(cfg: RunConfig):
    try:
        cfg.grid
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc
    if not cfg.eps_list or any(e <= 0 for e in cfg.eps_list):
        raise ConfigError("frac.eps_list: need positive values")
    if any(b >= a for a, b in zip(cfg.eps_list, cfg.eps_list[1:])):
        raise ConfigError("frac.eps_list: must be strictly decreasing")
    if cfg.potential not in ("constant", "multi_well", "ring"):
        raise ConfigError(f"model.potential: unknown family {cfg.potential!r}")
    if cfg.potential == "multi_well" and any(len(c) != cfg.dim for c in cfg.centers):
        raise ConfigError("model.centers: point dimension does not match grid.dim")
    if cfg.potential == "ring" and cfg.dim != 2:
        raise ConfigError("model.potential: ring needs grid.dim = 2")
    if cfg.random < 0:
        raise ConfigError("seeds.random: must be >= 0")


def config_hypotheses(cfg: RunConfig):
    try:
        pot = cfg.make_potential()
    except ValueError as exc:
        from .model import HypothesisReport

        return HypothesisReport({"V1": (False, str(exc))})
    return hypothesis_report(cfg.s, cfg.alpha, cfg.theta, cfg.dim, pot, PowerNonlinearity(cfg.q), cfg.grid, cfg.solve_eps)


def parse_config(path, validate: bool = True) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(), validate=validate)


def preset_names() -> list[str]:
    files = resources.files("fracsp").joinpath("presets").iterdir()
    return sorted(p.name[:-4] for p in files if p.name.endswith(".cfg"))


def load_preset(name: str, validate: bool = True) -> RunConfig:
    res = resources.files("fracsp").joinpath("presets", f"{name}.cfg")
    if not res.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return parse_config_text(res.read_text(), validate=validate)


# -- persistence -------------------------------------------------------------


def _num(v) -> str:
    return f"{float(v):.17g}"


def write_field(path, u: Field, column: str = "u", config_hash: str = "") -> Path:
    """Text header then one value per line (row-major), 17 significant digits."""
    g = u.grid
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(f"# dim={g.dim} n={g.n_per_axis} L={_num(g.half_length)} column={column} config_hash={config_hash}\n")
        for v in u.ravel():
            fh.write(_num(v) + "\n")
    return path


def read_field(path) -> Field:
    with open(path) as fh:
        header = fh.readline()
        meta = dict(tok.split("=", 1) for tok in header.lstrip("#").split())
        vals = np.loadtxt(fh, ndmin=1)
    grid = GridSpec(int(meta["dim"]), int(meta["n"]), float(meta["L"]))
    return Field(grid, vals)


def _write_table(path, header: list[str], rows, config_hash: str) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_num(v) for v in row) + "\n")
    return path


@dataclass(eq=False)
class ResultBundle:
    config: RunConfig
    command: str
    out_dir: Path
    validation: dict | None = None
    records: list[SolutionRecord] = field(default_factory=list)
    limit: SolutionRecord | None = None
    sweep: SweepReport | None = None
    clusters: ClusterReport | None = None
    exit_code: int = EXIT_OK
    message: str = ""
    files: list[Path] = field(default_factory=list)

    @property
    def config_hash(self) -> str:
        return self.config.config_hash()

    def metadata(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "command": self.command,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "tool_version": __version__,
            "exit_code": self.exit_code,
            "message": self.message,
        }

    def to_json(self) -> dict:
        out = {"metadata": self.metadata(), "validation": self.validation}
        if self.limit is not None:
            out["limit"] = self.limit.summary()
        out["records"] = [r.summary() for r in self.records]
        if self.sweep is not None:
            out["sweep"] = {
                "m_inf": self.sweep.m_inf,
                "category": self.sweep.category,
                "levels": self.sweep.table(),
                "clusters": [lv.clusters.to_dict() for lv in self.sweep.levels],
            }
        if self.clusters is not None:
            out["clusters"] = self.clusters.to_dict()
        return out


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _write_bundle(bundle: ResultBundle):
    out = bundle.out_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "fields").mkdir(exist_ok=True)
    echo = out / "config.txt"
    echo.write_text(f"# config_hash={bundle.config_hash}\n" + bundle.config.to_text())
    bundle.files.append(echo)
    h = bundle.config_hash
    if bundle.limit is not None:
        bundle.files.append(write_field(out / "fields" / "w0.txt", bundle.limit.u, "w0", h))
    for i, rec in enumerate(bundle.records):
        tag = f"eps{rec.eps:g}_rec{i:03d}" if rec.eps is not None else f"rec{i:03d}"
        bundle.files.append(write_field(out / "fields" / f"u_{tag}.txt", rec.u, "u", h))
    for kind in PLOT_KINDS:
        try:
            bundle.files.extend(emit_plot_data(bundle, kind))
        except LookupError:
            pass
    report = out / "bundle.json"
    report.write_text(json.dumps(bundle.to_json(), indent=2, default=_json_default, allow_nan=True))
    bundle.files.append(report)


def _profile_record(bundle: ResultBundle):
    if bundle.sweep is not None and bundle.sweep.levels and bundle.sweep.levels[-1].ground is not None:
        return bundle.sweep.levels[-1].ground
    conv = [r for r in bundle.records if r.converged] or bundle.records
    if conv:
        return min(conv, key=lambda r: r.total)
    return bundle.limit


def emit_plot_data(bundle: ResultBundle, kind: str) -> list[Path]:
    """Write CSV plot tables; raises ``LookupError`` naming missing data."""
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}")
    cfg, out, h = bundle.config, Path(bundle.out_dir), bundle.config_hash
    out.mkdir(parents=True, exist_ok=True)
    if kind == "profile":
        rec = _profile_record(bundle)
        if rec is None:
            raise LookupError("profile: bundle has no solution record")
        grid = rec.u.grid
        if rec.eps is None:
            mu = cfg.mu if cfg.mu is not None else cfg.V0
            phi = np.zeros(grid.shape)
            V = np.full(grid.shape, mu)
            eps = 1.0
        else:
            mp = cfg.model_params(rec.eps)
            eps = rec.eps
            prob = full_problem(mp)
            phi = prob.phi(rec.u)
            phi = np.zeros(grid.shape) if phi is None else phi
            V = np.asarray(prob.V)
        coords = [c.ravel() for c in grid.coordinates()]
        names = ["x", "y"][: grid.dim]
        header = [f"{n} [lattice length]" for n in names] + ["u [1]", "phi [1]", f"V(eps x) [1] eps={eps:g}"]
        rows = zip(*coords, rec.u.ravel(), phi.ravel(), V.ravel())
        return [_write_table(out / "profile.csv", header, rows, h)]
    if kind == "potential_slice":
        grid = cfg.grid
        x = grid.axis()
        pot = cfg.make_potential()
        eps_vals = list(cfg.eps_list)
        cols = []
        for e in eps_vals:
            pts = np.zeros((grid.n_per_axis, grid.dim))
            pts[:, 0] = e * x
            cols.append(pot(pts))
        header = ["x [lattice length]"] + [f"V(eps x) [1] eps={e:g}" for e in eps_vals]
        return [_write_table(out / "potential_slice.csv", header, zip(x, *cols), h)]
    sw = bundle.sweep
    if sw is None:
        raise LookupError(f"{kind}: bundle has no sweep report")
    if kind == "energy_vs_eps":
        header = ["eps [1]", "m_hat_eps [energy]", "m_inf_V0 [energy]"]
        rows = [(lv.eps, lv.m_hat, sw.m_inf) for lv in sw.levels]
        return [_write_table(out / "energy_vs_eps.csv", header, rows, h)]
    width = max((lv.clusters.count_distinct for lv in sw.levels), default=0)
    header = ["eps [1]"] + [f"dist_to_M_cluster{i} [length]" for i in range(width)]
    rows = []
    for lv in sw.levels:
        d = lv.clusters.cluster_distances()
        rows.append([lv.eps] + d + [float("nan")] * (width - len(d)))
    return [_write_table(out / "barycenter_vs_eps.csv", header, rows, h)]


# -- orchestration -----------------------------------------------------------


def _seeds(cfg: RunConfig, mp: ModelParams, w0: SolutionRecord) -> list[Seed]:
    pot = mp.potential
    wells = list(pot.minima if cfg.wells is None else cfg.wells)
    rng = np.random.default_rng(cfg.seed)
    pts = [(y, "bump") for y in wells] + [(y, "random") for y in random_points(pot, cfg.random, rng)]
    return [Seed(bump_seed(y, mp.eps, pot.delta, w0.u, mp), kind, tuple(np.atleast_1d(y).tolist()), cfg.seed)
            for y, kind in pts]


def run_command(cmd: str, cfg: RunConfig, out_dir=None) -> ResultBundle:
    """Run one experiment and write its bundle; ``bundle.exit_code`` is the status."""
    if cmd not in COMMANDS:
        raise ValueError(f"unknown command {cmd!r}; expected one of {COMMANDS}")
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    bundle = ResultBundle(cfg, cmd, out)
    report = config_hypotheses(cfg)
    bundle.validation = report.to_dict()
    if not report.ok:
        bundle.exit_code = EXIT_CONFIG
        bundle.message = "hypotheses violated: " + "; ".join(f"({k}) {m}" for k, m in report.failures().items())
        _write_bundle(bundle)
        return bundle
    if cmd == "validate":
        bundle.message = "all hypotheses hold"
        _write_bundle(bundle)
        return bundle

    scfg = cfg.solve_config()
    mu = cfg.mu if cfg.mu is not None else cfg.V0
    w0 = ground_state_limit(cfg.V0, cfg.grid, PowerNonlinearity(cfg.q), scfg, cfg.s)
    if cmd == "limit":
        bundle.limit = w0 if mu == cfg.V0 else ground_state_limit(mu, cfg.grid, PowerNonlinearity(cfg.q), scfg, cfg.s)
        if not bundle.limit.converged:
            bundle.exit_code, bundle.message = EXIT_UNCONVERGED, "limit solve did not converge"
        _write_bundle(bundle)
        return bundle
    bundle.limit = w0
    if not w0.converged:
        bundle.exit_code, bundle.message = EXIT_UNCONVERGED, "limit ground state did not converge"
        _write_bundle(bundle)
        return bundle

    if cmd == "solve":
        mp = cfg.model_params()
        bundle.records = multistart(mp, scfg, _seeds(cfg, mp, w0))
        pot = mp.potential
        bundle.clusters = cluster_solutions(
            bundle.records,
            cfg.merge_radius or pot.delta,
            cfg.energy_window if cfg.energy_window is not None else float("inf"),
            potential=pot,
        )
    else:
        mp = cfg.model_params(cfg.eps_list[0])
        wells = None if cfg.wells is None else list(cfg.wells)
        sweep = continuation_sweep(
            mp,
            scfg,
            cfg.eps_list,
            wells=wells,
            random_count=cfg.random,
            w0=w0,
            warm_start=cfg.warm_start,
            merge_radius=cfg.merge_radius,
            energy_window=cfg.energy_window,
        )
        bundle.sweep = sweep
        bundle.records = [r for lv in sweep.levels for r in lv.records]
        bundle.clusters = sweep.levels[-1].clusters
    if any(not r.converged for r in bundle.records):
        bundle.exit_code = EXIT_UNCONVERGED
        bundle.message = f"{sum(not r.converged for r in bundle.records)} solve(s) did not converge"
    elif cmd == "multiplicity":
        count, cat = bundle.clusters.count_distinct, bundle.clusters.category
        if count < cat:
            bundle.exit_code = EXIT_CHECK_FAILED
            bundle.message = f"found {count} distinct solutions, fewer than cat M = {cat}"
        else:
            bundle.message = f"found {count} distinct solutions >= cat M = {cat} at eps = {cfg.eps_list[-1]:g}"
    _write_bundle(bundle)
    return bundle
