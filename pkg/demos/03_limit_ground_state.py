"""Ground state of the constant-potential limit problem.

Minimize E_mu on its Nehari set from a Gaussian.  The preconditioned
descent converges in a handful of steps; the level m_mu grows with mu.
On the lattice the problem also has an exact scaling symmetry, which we
use as an independent check.
"""
import numpy as np

from fracsp import PowerNonlinearity, SolveConfig, ground_state_limit, make_grid

s, q = 0.4, 3.5
nl = PowerNonlinearity(q)
grid = make_grid(1, 256, 20.0)

for pre in (True, False):
    r = ground_state_limit(1.0, grid, nl, SolveConfig(precondition=pre), s)
    print(f"precondition={pre!s:5}  energy={r.total:.10f}  residual={r.residual:.1e}  iterations={r.iterations}")

w = ground_state_limit(1.0, grid, nl, SolveConfig(), s)
print(f"peak {w.u.values.max():.4f} at x={grid.axis()[np.argmax(w.u.values)]:.3f}")
v = w.u.values
print("tail decays like a power (fractional): u(5)/u(10) =", v[np.searchsorted(grid.axis(), 5)] / v[np.searchsorted(grid.axis(), 10)])

print("\nm_mu against the scaling law mu^((q+1)/(q-1) - N/(2s)) m_1")
for mu in (1.0, 2.0, 4.0):
    same_box = ground_state_limit(mu, grid, nl, SolveConfig(), s).total
    scaled = make_grid(1, 256, 20.0 * mu ** (-1 / (2 * s)))
    exact = ground_state_limit(mu, scaled, nl, SolveConfig(), s).total
    print(f"  mu={mu}  m(box L=20)={same_box:.8f}  m(scaled box)={exact:.8f}  law={w.total * mu ** ((q + 1) / (q - 1) - 1 / (2 * s)):.8f}")
