"""Acceptance criteria 1-9, each at its stated tolerance and time budget.

Every test records one ``criterion k: PASS|FAIL`` line; the lines are
printed in the pytest terminal summary and when this file is run as a
script.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from conftest import smooth_random_field
from fracsp.analysis import TruncationSpec, barycenter
from fracsp.functional import energy_full, energy_limit, full_problem, gradient_full, gradient_limit
from fracsp.io import load_preset, run_command
from fracsp.model import FracParams, PowerNonlinearity
from fracsp.poisson import build_kernel, coupling_A, origin_cell_average, solve_poisson
from fracsp.solver import SolveConfig, gaussian, ground_state_limit
from fracsp.spectral import Field, inner_product, make_grid

RESULTS: dict[int, str] = {}


def record(k: int, ok: bool, detail: str):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[k] = line
    print(line)
    assert ok, line


def _direct(u, alpha, factor):
    g = u.grid
    pts = g.points().reshape(-1, g.dim)
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    K = np.where(d > 0, np.where(d > 0, d, 1.0) ** (alpha - g.dim), origin_cell_average(g.dim, alpha, g.spacing))
    return factor * g.cell_volume * (K @ (u.values**2).ravel()).reshape(g.shape)


def test_criterion_1_poisson_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for dim, n, s, alpha, theta in [(1, 64, 0.4, 0.8, 0.3), (2, 16, 0.75, 1.5, 0.5)]:
        g = make_grid(dim, n, 5.0)
        fp = FracParams(s, alpha, theta, 0.5, dim)
        k = build_kernel(g, alpha)
        for _ in range(5):
            u = Field(g, rng.normal(size=g.shape))
            got = solve_poisson(u, k, fp).phi.values
            want = _direct(u, alpha, fp.eps_factor)
            worst = max(worst, float(np.max(np.abs(got - want)) / np.max(np.abs(want))))
    dt = time.perf_counter() - t0
    record(1, worst < 1e-10 and dt < 5, f"max rel err {worst:.2e} (< 1e-10), {dt:.2f} s (< 5 s)")


def test_criterion_2_algebraic_laws():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    g = make_grid(1, 128, 8.0)
    fp = FracParams(0.4, 0.8, 0.3, 0.5, 1)
    fp2 = fp.with_eps(0.125)
    k = build_kernel(g, 0.8)
    trunc = TruncationSpec(3.0, 0.4)
    errs = {"phi": 0.0, "A": 0.0, "eps": 0.0, "beta": 0.0}
    for _ in range(20):
        u = smooth_random_field(g, rng)
        t = float(rng.uniform(0.1, 10.0))
        phi = solve_poisson(u, k, fp).phi.values
        phit = solve_poisson(u * t, k, fp).phi.values
        errs["phi"] = max(errs["phi"], float(np.max(np.abs(phit - t * t * phi)) / np.max(np.abs(t * t * phi))))
        A = coupling_A(u, k, fp)
        errs["A"] = max(errs["A"], abs(coupling_A(u * t, k, fp) - t**4 * A) / (t**4 * A))
        ratio = A / coupling_A(u, k, fp2)
        want = (fp.eps / fp2.eps) ** (fp.alpha - fp.theta)
        errs["eps"] = max(errs["eps"], abs(ratio - want) / want)
        b, bt = barycenter(u, 0.5, trunc), barycenter(u * t, 0.5, trunc)
        errs["beta"] = max(errs["beta"], float(np.max(np.abs(bt - b)) / max(np.max(np.abs(b)), 1e-300)))
    dt = time.perf_counter() - t0
    ok = all(v < 1e-12 for v in errs.values()) and dt < 5
    record(2, ok, ", ".join(f"{k} {v:.1e}" for k, v in errs.items()) + f" (< 1e-12), {dt:.2f} s (< 5 s)")


def test_criterion_3_gradients():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    mp = load_preset("double_well_1d").replace(n=256, L=16.0).model_params(0.5)
    prob = full_problem(mp)
    nl, tau = mp.nonlin, 1e-5
    worst_full = worst_lim = 0.0
    for _ in range(20):
        u = smooth_random_field(mp.grid, rng, positive=True)
        v = smooth_random_field(mp.grid, rng)
        fd = (prob.energy(u + v * tau).total - prob.energy(u - v * tau).total) / (2 * tau)
        an = inner_product(gradient_full(u, mp).g, v)
        worst_full = max(worst_full, abs(an - fd) / abs(fd))
        fdl = (energy_limit(u + v * tau, 1.0, nl, 0.4).total - energy_limit(u - v * tau, 1.0, nl, 0.4).total) / (2 * tau)
        anl = inner_product(gradient_limit(u, 1.0, nl, 0.4).g, v)
        worst_lim = max(worst_lim, abs(anl - fdl) / abs(fdl))
    dt = time.perf_counter() - t0
    ok = worst_full < 1e-5 and worst_lim < 1e-5 and dt < 30
    record(3, ok, f"full {worst_full:.1e}, limit {worst_lim:.1e} (< 1e-5), {dt:.2f} s (< 30 s)")


def test_criterion_4_mountain_pass_geometry():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    mp = load_preset("double_well_1d").model_params(0.5)
    prob = full_problem(mp)
    e0 = prob.energy(Field.zeros(mp.grid)).total
    r = 1e-2
    vals = []
    for _ in range(100):
        v = smooth_random_field(mp.grid, rng)
        v = v * (r / np.sqrt(prob.norm_sq(v)))
        vals.append(prob.energy(v).total)
    bump = gaussian(mp.grid, (1.0 / mp.eps,), 1.0)
    ts = np.logspace(-2, 3, 200)
    neg = [t for t in ts if prob.energy(bump * t).total < 0]
    dt = time.perf_counter() - t0
    ok = e0 == 0.0 and min(vals) > 0 and bool(neg) and dt < 10
    t_neg = f"{neg[0]:.3g}" if neg else "none"
    record(4, ok, f"I(0) = {e0}, min I on |u| = {r}: {min(vals):.3e} > 0, first t with I(t v) < 0: {t_neg} (<= 1e3), {dt:.2f} s")


def test_criterion_5_limit_solver():
    t0 = time.perf_counter()
    g = make_grid(1, 256, 20.0)
    nl = PowerNonlinearity(3.5)
    cfg = SolveConfig()
    w = ground_state_limit(1.0, g, nl, cfg, 0.4)
    mono = bool(np.all(np.diff(w.history) <= 0))
    shifted = [ground_state_limit(1.0, g, nl, cfg, 0.4, start=gaussian(g, c, 1.0)) for c in (2.5, -4.0)]
    spread = max(abs(r.total - w.total) / w.total for r in shifted)
    levels = [w.total] + [ground_state_limit(mu, g, nl, cfg, 0.4).total for mu in (2.0, 4.0)]
    inc = levels[0] < levels[1] < levels[2]
    dt = time.perf_counter() - t0
    ok = w.converged and w.residual < 1e-6 and mono and spread < 1e-6 and inc and all(r.converged for r in shifted) and dt < 120
    record(
        5,
        ok,
        f"residual {w.residual:.1e} in {w.iterations} its, monotone {mono}, restart spread {spread:.1e}, "
        f"m(1,2,4) = {levels[0]:.6f} < {levels[1]:.6f} < {levels[2]:.6f}, {dt:.2f} s",
    )


def test_criterion_6_energy_ordering():
    t0 = time.perf_counter()
    g = make_grid(1, 256, 20.0)
    nl = PowerNonlinearity(3.5)
    recs = [ground_state_limit(mu, g, nl, SolveConfig(), 0.4) for mu in (1.0, 2.0, 3.0)]
    m = [r.total for r in recs]
    gaps = (m[1] - m[0], m[2] - m[1])
    dt = time.perf_counter() - t0
    ok = all(r.converged for r in recs) and min(gaps) > 1e-3 and dt < 180
    record(6, ok, f"m(V0) = {m[0]:.6f} < m(mid) = {m[1]:.6f} < m(Vinf) = {m[2]:.6f}, gaps {gaps[0]:.3e}, {gaps[1]:.3e} (> 1e-3), {dt:.2f} s")


@pytest.fixture(scope="module")
def sweep_run(tmp_path_factory):
    t0 = time.perf_counter()
    cfg = load_preset("double_well_1d")
    b = run_command("multiplicity", cfg, out_dir=tmp_path_factory.mktemp("acc7"))
    return b, time.perf_counter() - t0


def test_criterion_7_semiclassical_trends(sweep_run):
    b, dt = sweep_run
    sw = b.sweep
    pot = b.config.make_potential()
    delta = pot.delta
    gaps = [lv.m_hat - sw.m_inf for lv in sw.levels]
    dists = [lv.clusters.dist_of(lv.ground) for lv in sw.levels]
    last = sw.levels[-1]
    wells = sorted({int(np.argmin([abs(c.centroid[0] - m[0]) for m in pot.minima])) for c in last.clusters.clusters})
    a = all(x > 0 for x in gaps) and all(y < x for x, y in zip(gaps, gaps[1:]))
    bb = all(y < x for x, y in zip(dists, dists[1:])) and dists[-1] < delta / 2
    c = last.clusters.count_distinct >= pot.category and len(wells) >= pot.category
    ok = a and bb and c and b.exit_code == 0 and dt < 900
    record(
        7,
        ok,
        f"(a) gaps {', '.join(f'{x:.4f}' for x in gaps)}; (b) dist {', '.join(f'{x:.1e}' for x in dists)} (< {delta / 2:g}); "
        f"(c) count {last.clusters.count_distinct} >= {pot.category}, wells hit {wells}; {dt:.2f} s",
    )


def test_criterion_8_seed_limits(sweep_run):
    b, _ = sweep_run
    sw = b.sweep
    delta = b.config.make_potential().delta
    keys = list(sw.levels[0].seed_gaps)
    dec = all(
        all(lv2.seed_gaps[k] < lv1.seed_gaps[k] for lv1, lv2 in zip(sw.levels, sw.levels[1:])) for k in keys
    )
    beta = max(sw.levels[-1].seed_beta_errors.values())
    ok = dec and beta < delta / 2
    detail = "; ".join(f"y={k}: " + ", ".join(f"{lv.seed_gaps[k]:.4f}" for lv in sw.levels) for k in keys)
    record(8, ok, f"seed gaps {detail}; max beta error at eps=0.125 {beta:.1e} (< {delta / 2:g})")


def _tables(out: Path) -> dict[str, bytes]:
    files = [p for p in out.rglob("*") if p.is_file() and p.name != "bundle.json"]
    return {str(p.relative_to(out)): p.read_bytes() for p in sorted(files)}


def test_criterion_9_determinism(tmp_path, sweep_run):
    t0 = time.perf_counter()
    cfg = load_preset("double_well_1d").replace(eps=0.125)
    runs = [run_command("solve", cfg, out_dir=tmp_path / f"r{i}") for i in range(2)]
    same_solve = _tables(tmp_path / "r0") == _tables(tmp_path / "r1")
    # full sweep repeat against the criterion 7 bundle
    b, _ = sweep_run
    again = run_command("multiplicity", b.config, out_dir=tmp_path / "sweep")
    same_sweep = _tables(Path(b.out_dir)) == _tables(tmp_path / "sweep")
    n_files = len(_tables(tmp_path / "r0")) + len(_tables(tmp_path / "sweep"))
    dt = time.perf_counter() - t0
    ok = same_solve and same_sweep and all(r.exit_code == 0 for r in runs) and again.exit_code == 0 and dt < 300
    record(9, ok, f"{n_files} numeric files byte-identical across reruns: solve {same_solve}, sweep {same_sweep}; {dt:.2f} s")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
