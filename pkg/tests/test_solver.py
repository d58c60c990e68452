import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import double_well_params, smooth_random_field
from fracsp.functional import energy_full, energy_limit, full_problem, nehari_defect
from fracsp.model import PowerNonlinearity
from fracsp.solver import (
    Seed,
    SolveConfig,
    bump_seed,
    continuation_sweep,
    fiber_root,
    gaussian,
    ground_state_limit,
    multistart,
    nehari_project,
    nehari_project_limit,
    nehari_scalars,
    smooth_cutoff,
    solve_full,
)
from fracsp.spectral import Field, make_grid

NL = PowerNonlinearity(3.5)


@pytest.fixture(scope="module")
def w0_small():
    return ground_state_limit(1.0, make_grid(1, 256, 16.0), NL, SolveConfig(), 0.4)


@given(a=st.floats(1e-3, 1e3), b=st.floats(1e-3, 1e3), c=st.floats(1e-3, 1e3), q=st.floats(3.05, 7.0))
def test_fiber_root_solves_fiber_equation(a, b, c, q):
    t, (lo, hi) = fiber_root(a, b, lambda t: t ** (q - 1) * c)
    assert lo <= t <= hi
    # h(t) = t^(q-1) c - t^2 b - a vanishes, scaled by the size of its terms
    assert abs(t ** (q - 1) * c - t * t * b - a) <= 1e-12 * (t ** (q - 1) * c + t * t * b + a)


@given(a=st.floats(1e-3, 1e3), c=st.floats(1e-3, 1e3), q=st.floats(1.5, 7.0))
def test_fiber_root_closed_form_without_coupling(a, c, q):
    t, _ = fiber_root(a, 0.0, lambda t: t ** (q - 1) * c, q, c)
    assert t == pytest.approx((a / c) ** (1 / (q - 1)), rel=1e-14)
    t2, _ = fiber_root(a, 0.0, lambda t: t ** (q - 1) * c)
    assert t2 == pytest.approx(t, rel=1e-12)


@given(seed=st.integers(0, 2**16), scale=st.floats(0.01, 100.0))
def test_nehari_projection_lands_on_nehari_set(seed, scale):
    mp = double_well_params(n=128, L=12.0)
    u = smooth_random_field(mp.grid, np.random.default_rng(seed), positive=True, scale=scale)
    t, v = nehari_project(u, mp)
    sc = nehari_scalars(v, mp)
    assert abs(nehari_defect(v, mp)) <= 1e-11 * sc.a
    assert sc.t == pytest.approx(1.0, rel=1e-12)
    # the fiber maximum: energy along the ray peaks at t
    Eplus = energy_full(u * (t * 1.01), mp).total
    Eminus = energy_full(u * (t * 0.99), mp).total
    assert energy_full(v, mp).total > max(Eplus, Eminus)


def test_projection_rejects_nonpositive():
    mp = double_well_params(n=64, L=8.0)
    with pytest.raises(ValueError, match="nonpositive"):
        nehari_project(Field.constant(mp.grid, -1.0), mp)


def test_limit_projection():
    g = make_grid(1, 128, 10.0)
    t, v = nehari_project_limit(gaussian(g, None, 1.0, 3.0), 1.0, NL, 0.4)
    assert t == pytest.approx(nehari_project_limit(v, 1.0, NL, 0.4)[0] * t, rel=1e-12)


def test_solve_config_validation():
    for bad in ({"step": 0}, {"backtrack": 1.0}, {"max_iters": -1}, {"tol_g": 0.0}):
        with pytest.raises(ValueError):
            SolveConfig(**bad)


def test_limit_ground_state(w0_small):
    w = w0_small
    assert w.converged and w.residual < 1e-6
    assert np.all(np.diff(w.history) <= 0)
    assert np.all(w.u.values >= 0)
    # even profile peaked at the origin
    v = w.u.values
    np.testing.assert_allclose(v[1:], v[1:][::-1], atol=1e-7 * v.max())
    assert np.argmax(v) == len(v) // 2


def test_limit_scaling_law():
    # w_mu(x) = mu^(1/(q-1)) w_1(mu^(1/(2s)) x) maps the mu = 1 lattice problem exactly onto
    # the mu problem on a box shrunk by mu^(-1/(2s)), so m_mu = mu^((q+1)/(q-1) - N/(2s)) m_1
    s, q, mu = 0.4, 3.5, 2.0
    e1 = ground_state_limit(1.0, make_grid(1, 256, 20.0), NL, SolveConfig(), s).total
    e2 = ground_state_limit(mu, make_grid(1, 256, 20.0 * mu ** (-1 / (2 * s))), NL, SolveConfig(), s).total
    assert e2 == pytest.approx(mu ** ((q + 1) / (q - 1) - 1 / (2 * s)) * e1, rel=1e-8)


def test_flat_and_preconditioned_agree():
    g = make_grid(1, 128, 12.0)
    a = ground_state_limit(1.0, g, NL, SolveConfig(precondition=True), 0.4)
    b = ground_state_limit(1.0, g, NL, SolveConfig(precondition=False), 0.4)
    assert a.converged and b.converged
    assert a.iterations < b.iterations
    assert a.total == pytest.approx(b.total, rel=1e-9)


def test_unconverged_is_flagged():
    g = make_grid(1, 128, 12.0)
    r = ground_state_limit(1.0, g, NL, SolveConfig(max_iters=2), 0.4)
    assert not r.converged and r.iterations == 2


@given(delta=st.floats(0.1, 5.0), r=st.lists(st.floats(0, 10), min_size=2, max_size=20))
def test_smooth_cutoff(delta, r):
    r = np.sort(np.asarray(r))
    eta = smooth_cutoff(r, delta)
    assert np.all((eta >= 0) & (eta <= 1))
    assert np.all(np.diff(eta) <= 1e-15)
    assert np.all(eta[r <= delta / 2] == 1.0)
    assert np.all(eta[r >= delta] == 0.0)


def test_bump_seed(w0_small):
    mp = double_well_params(eps=0.5)
    u = bump_seed((1.0,), 0.5, mp.potential.delta, w0_small.u, mp)
    assert np.argmax(u.values) == np.argmin(np.abs(mp.grid.axis() - 2.0))
    # support inside |eps x - y| < delta
    x = mp.grid.axis()
    assert np.all(u.values[np.abs(0.5 * x - 1.0) >= mp.potential.delta] == 0.0)
    with pytest.raises(ValueError, match="outside"):
        bump_seed((10.0,), 0.5, 0.4, w0_small.u, mp)


def test_solve_full_and_multistart(w0_small):
    mp = double_well_params(eps=0.5)
    cfg = SolveConfig()
    seeds = [Seed(bump_seed((y,), 0.5, mp.potential.delta, w0_small.u, mp), "bump", (y,), 0) for y in (1.0, -1.0)]
    recs = multistart(mp, cfg, seeds)
    assert [r.provenance["y"] for r in recs] == [[1.0], [-1.0]]
    for r in recs:
        assert r.converged and abs(r.defect) < 1e-10 * full_problem(mp).norm_sq(r.u)
        assert r.total > w0_small.total
    # mirror symmetry of the double well, up to the stopping tolerance tol_g = 1e-6
    assert recs[0].total == pytest.approx(recs[1].total, rel=1e-7)
    assert recs[0].barycenter[0] == pytest.approx(-recs[1].barycenter[0], abs=1e-5)
    threaded = multistart(mp, cfg, seeds, workers=2)
    assert [r.total for r in threaded] == [r.total for r in recs]
    single = solve_full(seeds[0].u, mp, cfg)
    assert single.provenance["kind"] == "given"
    with pytest.raises(ValueError):
        multistart(mp, cfg, [])


def test_sweep_checks_eps_order(w0_small):
    mp = double_well_params()
    for bad in ([0.25, 0.5], [0.5, 0.5], [0.5, -0.1], []):
        with pytest.raises(ValueError):
            continuation_sweep(mp, SolveConfig(), bad, w0=w0_small)


def test_translated_start_same_level():
    g = make_grid(1, 256, 20.0)
    a = ground_state_limit(1.0, g, NL, SolveConfig(), 0.4)
    b = ground_state_limit(1.0, g, NL, SolveConfig(), 0.4, start=gaussian(g, 3.3, 1.5))
    assert b.converged
    assert b.total == pytest.approx(a.total, rel=1e-6)
    assert energy_limit(b.u, 1.0, NL, 0.4).total == pytest.approx(b.total)


def test_boundary_diagnostics_track_power_tail():
    # fractional ground states decay like |x|^-(N+2s), so doubling L divides the edge value by ~2^1.8
    ratios = []
    for L in (20.0, 40.0):
        w = ground_state_limit(1.0, make_grid(1, int(256 * L / 20), L), NL, SolveConfig(), 0.4)
        ratios.append(w.boundary_ratio)
        assert w.summary()["boundary_mass"] < 1e-4
    assert ratios[0] / ratios[1] == pytest.approx(2**1.8, rel=0.1)
