"""A ring of minima in the plane.

V is minimal on the unit circle, whose category is 2.  Seeds placed at
eight points of the ring each converge; the lattice breaks the rotation
symmetry, so the eight solutions stay where they were seeded and the
count exceeds the category.
"""
import time

from fracsp.io import load_preset, run_command

cfg = load_preset("ring_2d")
t0 = time.perf_counter()
bundle = run_command("multiplicity", cfg, out_dir="results/demo_ring")
print(f"{time.perf_counter() - t0:.1f} s")
for r in bundle.records:
    b = r.barycenter
    print(f"seed {r.provenance['y']}  ->  barycenter ({b[0]:+.3f}, {b[1]:+.3f})  energy {r.total:.6f}  its {r.iterations}")
print(bundle.message)
