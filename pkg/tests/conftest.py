import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fracsp import FracParams, ModelParams, Potential, PowerNonlinearity, make_grid
from fracsp.spectral import Field

settings.register_profile(
    "numeric", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("numeric")


def smooth_random_field(grid, rng, modes=6, positive=False, scale=1.0):
    """Band-limited random field: a few low Fourier modes under a Gaussian envelope."""
    x = grid.coordinates()
    L = grid.half_length
    vals = np.zeros(grid.shape)
    for _ in range(modes):
        k = rng.integers(0, 4, size=grid.dim) * np.pi / L
        ph = rng.uniform(0, 2 * np.pi)
        vals += rng.normal() * np.cos(sum(ki * xi for ki, xi in zip(k, x)) + ph)
    env = np.exp(-sum(xi**2 for xi in x) / (0.2 * L) ** 2)
    vals = vals * env
    if positive:
        vals = np.abs(vals) + 0.1 * env
    return Field(grid, scale * vals)


def double_well_params(n=256, L=16.0, eps=0.5, coupling=True):
    grid = make_grid(1, n, L)
    frac = FracParams(0.4, 0.8, 0.3, eps, 1)
    pot = Potential.multi_well([(-1.0,), (1.0,)], 1.0, 3.0, 0.5)
    return ModelParams(frac, pot, PowerNonlinearity(3.5), grid, coupling)


def ring_params(n=32, L=6.0, eps=0.5):
    grid = make_grid(2, n, L)
    frac = FracParams(0.75, 1.5, 0.5, eps, 2)
    return ModelParams(frac, Potential.ring(1.0, 1.0, 3.0, 0.5), PowerNonlinearity(3.2), grid)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def mp1():
    return double_well_params()


@pytest.fixture
def mp2():
    return ring_params()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
