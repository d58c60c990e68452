"""Spectral solvers for a fractional Schrodinger-Poisson system on a periodic box."""

__version__ = "0.1.0"

from .spectral import Field, GridSpec, make_grid, frac_laplacian, half_laplacian_norm_sq, inner_product
from .model import FracParams, ModelParams, Potential, PowerNonlinearity, riesz_gamma, sample_potential, validate_hypotheses
from .poisson import build_kernel, coupling_A, solve_poisson, solve_poisson_pair
from .functional import energy_full, energy_limit, gradient_full, gradient_limit, nehari_defect
from .solver import (
    SolveConfig,
    SolutionRecord,
    bump_seed,
    continuation_sweep,
    ground_state_limit,
    multistart,
    nehari_project,
    solve_full,
)
from .analysis import TruncationSpec, barycenter, chi, cluster_solutions, dist_to_M, seed_level_gap, beta_of_seed_error

