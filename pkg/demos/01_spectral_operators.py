"""Fractional Laplacian as a Fourier multiplier.

On the periodic box every lattice cosine is an eigenfunction of
(-Delta)^beta with eigenvalue |k|^(2 beta).  We check that, then look at
how the quadratic form of a Gaussian grows with beta.
"""
import numpy as np

from fracsp import Field, frac_laplacian, half_laplacian_norm_sq, make_grid

grid = make_grid(1, 128, 10.0)
k = 3 * np.pi / grid.half_length
u = Field.from_function(grid, lambda x: np.cos(k * x))

print("eigenfunction check, cos(k x) with k = %.4f" % k)
for beta in (0.2, 0.4, 0.75, 1.0):
    err = np.max(np.abs(frac_laplacian(u, beta).values - k ** (2 * beta) * u.values))
    print(f"  beta={beta:4.2f}  |k|^(2beta)={k ** (2 * beta):.6f}  max err={err:.1e}")

g = Field.from_function(grid, lambda x: np.exp(-x**2))
print("\n|(-Delta)^(beta/2) exp(-x^2)|^2 as beta grows")
for beta in np.linspace(0.1, 1.0, 4):
    print(f"  beta={beta:4.2f}  {half_laplacian_norm_sq(g, beta):.6f}")
# beta = 1 is the Dirichlet energy int |u'|^2 = sqrt(pi/2)
print("  exact at beta=1:", np.sqrt(np.pi / 2))
